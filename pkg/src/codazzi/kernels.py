"""Backend selection for the batch expression evaluator.

The compiled extension ``codazzi._speedups`` is used when it is importable;
otherwise (or when ``CODAZZI_PURE_PYTHON=1``) the numpy implementation in
``codazzi._kernel_py`` runs instead. The two agree to rounding: numpy's
vectorized sin/exp/log may differ from libm in the last few bits.
"""

from __future__ import annotations

from ._kernel_py import eval_program as _eval_python
from .program import pure_python_requested

try:
    from ._speedups import eval_program as _eval_compiled
except ImportError:  # extension not built
    _eval_compiled = None

BACKENDS = {"python": _eval_python}
if _eval_compiled is not None:
    BACKENDS["compiled"] = _eval_compiled

DEFAULT_BACKEND = "compiled" if _eval_compiled is not None and not pure_python_requested() else "python"


def get_backend(name: str | None = None):
    name = name or DEFAULT_BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


def available_backends() -> list[str]:
    return sorted(BACKENDS)
