"""Truncated Taylor jets of tensor fields at a point.

A :class:`Jet` of order ``K`` stores ``terms[k]`` for ``k = 0..K``, where
``terms[k]`` has ``k`` leading derivative axes followed by the tensor axes:
``terms[k][a1, ..., ak, *idx] = d_{a1} ... d_{ak} T[*idx]``. Derivative axes
are symmetric.

Products use the Leibniz rule summed over subsets of derivative slots, so
every quantity derived from exact metric derivatives (inverse metric,
Christoffel symbols, curvature, covariant derivatives) carries its own exact
partial derivatives with no finite differencing.
"""

from __future__ import annotations

from itertools import combinations
from typing import Callable

import numpy as np

_DERIV_LETTERS = "PQRSTUVW"


class Jet:
    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = [np.asarray(t, dtype=np.float64) for t in terms]

    @property
    def order(self) -> int:
        return len(self.terms) - 1

    @property
    def value(self) -> np.ndarray:
        return self.terms[0]

    @property
    def shape(self) -> tuple:
        return self.terms[0].shape

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError(f"jet has order {self.order}, cannot extend to {order}")
        return Jet(self.terms[: order + 1])

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "Jet":
        """Apply a linear map acting on the trailing tensor axes of every term."""
        return Jet([fn(t) for t in self.terms])

    def einsum(self, spec: str) -> "Jet":
        """Linear index manipulation, e.g. ``jet.einsum("ijkm->ijmk")``."""
        return self.map(lambda t: np.einsum("..." + spec.replace("->", "->..."), t))

    def derivative(self) -> "Jet":
        """The jet of the partial-derivative tensor ``dT`` (new leading axis)."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        return Jet(self.terms[1:])

    def __add__(self, other: "Jet") -> "Jet":
        k = min(self.order, other.order)
        return Jet([self.terms[i] + other.terms[i] for i in range(k + 1)])

    def __sub__(self, other: "Jet") -> "Jet":
        k = min(self.order, other.order)
        return Jet([self.terms[i] - other.terms[i] for i in range(k + 1)])

    def __neg__(self) -> "Jet":
        return Jet([-t for t in self.terms])

    def __mul__(self, c: float) -> "Jet":
        return Jet([c * t for t in self.terms])

    __rmul__ = __mul__

    def __repr__(self):
        return f"Jet(order={self.order}, shape={self.shape})"


def product(spec: str, a: Jet, b: Jet, order: int | None = None) -> Jet:
    """Bilinear contraction ``einsum(spec, A, B)`` differentiated by Leibniz."""
    inputs, out = spec.split("->")
    sa, sb = inputs.split(",")
    k_max = min(a.order, b.order) if order is None else order
    if k_max > min(a.order, b.order):
        raise ValueError("requested order exceeds operand orders")
    terms = []
    for k in range(k_max + 1):
        letters = _DERIV_LETTERS[:k]
        total = None
        for s in range(k + 1):
            for subset in combinations(range(k), s):
                la = "".join(letters[i] for i in subset)
                lb = "".join(letters[i] for i in range(k) if i not in subset)
                term = np.einsum(f"{la}{sa},{lb}{sb}->{letters}{out}", a.terms[s], b.terms[k - s])
                total = term if total is None else total + term
        terms.append(total)
    return Jet(terms)


def inverse(g: Jet, order: int | None = None) -> Jet:
    """Jet of the matrix inverse, from ``g @ ginv = I`` differentiated order by order."""
    k_max = g.order if order is None else order
    ginv0 = np.linalg.inv(g.value)
    terms = [ginv0]
    for k in range(1, k_max + 1):
        letters = _DERIV_LETTERS[:k]
        acc = np.zeros((g.shape[0],) * k + g.shape)
        for s in range(1, k + 1):
            for subset in combinations(range(k), s):
                la = "".join(letters[i] for i in subset)
                lb = "".join(letters[i] for i in range(k) if i not in subset)
                acc += np.einsum(f"{la}ij,{lb}jk->{letters}ik", g.terms[s], terms[k - s])
        terms.append(-np.einsum(f"li,{letters}ik->{letters}lk", ginv0, acc))
    return Jet(terms)


def constant(value: np.ndarray, n: int, order: int) -> Jet:
    value = np.asarray(value, dtype=np.float64)
    return Jet([value] + [np.zeros((n,) * k + value.shape) for k in range(1, order + 1)])


_SLOT_LETTERS = "abcdefgh"


def covariant_derivative(t: Jet, christoffel: Jet, pattern: str) -> Jet:
    """Jet of ``nabla_e T`` for a tensor with index positions ``pattern``.

    ``pattern`` holds one character per tensor axis: ``"d"`` for a lower
    (covariant) index and ``"u"`` for an upper one. ``christoffel`` holds
    ``Gamma^k_{ij}`` with axes ``(k, i, j)``. The result has the derivative
    index ``e`` as its first tensor axis and one order less than ``t``.
    """
    if len(pattern) != len(t.shape):
        raise ValueError(f"pattern {pattern!r} does not match tensor rank {len(t.shape)}")
    order = min(t.order - 1, christoffel.order)
    result = t.derivative().truncate(order)
    idx = _SLOT_LETTERS[: len(pattern)]
    for s, kind in enumerate(pattern):
        contracted = idx[:s] + "z" + idx[s + 1 :]
        if kind == "d":
            term = product(f"zy{idx[s]},{contracted}->y{idx}", christoffel, t, order)
            result = result - term
        elif kind == "u":
            term = product(f"{idx[s]}yz,{contracted}->y{idx}", christoffel, t, order)
            result = result + term
        else:
            raise ValueError(f"bad index kind {kind!r} in {pattern!r}")
    return result
