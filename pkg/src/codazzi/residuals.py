"""Scale-normalized residuals of tensor identities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class Residual:
    """Max-abs violation ``raw`` of an identity and the size ``scale`` of its terms.

    ``value = raw / (1 + scale)`` is what tolerances are compared against.
    """

    raw: float
    scale: float

    @property
    def value(self) -> float:
        return self.raw / (1.0 + self.scale)

    def passes(self, tol: float) -> bool:
        return self.value <= tol

    def __float__(self):
        return self.value


ZERO = Residual(0.0, 0.0)


def _maxabs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def residual(*terms) -> Residual:
    """Residual of the identity ``sum(terms) == 0``.

    Each term is an array already carrying its sign; the scale is the largest
    component over all individual terms.
    """
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    return Residual(_maxabs(total), max(_maxabs(t) for t in terms))


def worst(residuals) -> Residual:
    """The residual with the largest normalized value (first one on ties)."""
    best = None
    for r in residuals:
        if best is None or r.value > best.value:
            best = r
    return best if best is not None else ZERO
