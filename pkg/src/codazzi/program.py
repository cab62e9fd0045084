"""Flattening of expression trees into a register program.

Many expressions (a metric and all of its partial derivatives up to fourth
order) share subtrees. :func:`compile_program` walks them once, removes
common subexpressions, and emits straight-line code that the batch kernels
in :mod:`codazzi.kernels` run over many points at once.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .expr import (
    Add,
    Call,
    Const,
    Div,
    DomainError,
    Expr,
    Mul,
    Neg,
    Pow,
    Sub,
    Var,
    to_text,
)

# Opcodes shared with the compiled kernel; keep in sync with _speedups.pyx.
OP_CONST, OP_VAR, OP_NEG, OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_POWI = range(8)
OP_SIN, OP_COS, OP_TAN, OP_SINH, OP_COSH, OP_EXP, OP_LOG, OP_SQRT = range(8, 16)

_BINARY_OPS = {Add: OP_ADD, Sub: OP_SUB, Mul: OP_MUL, Div: OP_DIV}
_CALL_OPS = {
    "sin": OP_SIN,
    "cos": OP_COS,
    "tan": OP_TAN,
    "sinh": OP_SINH,
    "cosh": OP_COSH,
    "exp": OP_EXP,
    "log": OP_LOG,
    "sqrt": OP_SQRT,
}

DOMAIN_REASONS = {
    1: "log of non-positive value",
    2: "sqrt of negative value",
    3: "division by zero",
    4: "zero to a negative power",
    5: "non-finite result",
}


@dataclass
class Program:
    """Straight-line code; register ``r`` holds the result of instruction ``r``."""

    ops: np.ndarray
    arg_a: np.ndarray
    arg_b: np.ndarray
    consts: np.ndarray
    outputs: np.ndarray
    n_vars: int
    nodes: list = field(repr=False, default_factory=list)

    def __len__(self) -> int:
        return len(self.ops)

    def run(self, points, backend: str | None = None) -> np.ndarray:
        """Evaluate every output at every row of ``points``; shape (m, n_outputs)."""
        from . import kernels

        pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=np.float64)))
        if pts.shape[1] != self.n_vars:
            raise ValueError(f"points have {pts.shape[1]} coordinates, program expects {self.n_vars}")
        fn = kernels.get_backend(backend)
        out, status, bad_point, bad_instr = fn(
            self.ops, self.arg_a, self.arg_b, self.consts, self.outputs, pts
        )
        if status:
            raise DomainError(
                to_text(self.nodes[bad_instr]), pts[bad_point], DOMAIN_REASONS.get(status, "")
            )
        return out


def compile_program(exprs: Sequence[Expr], n_vars: int) -> Program:
    ops: list[int] = []
    arg_a: list[int] = []
    arg_b: list[int] = []
    consts: list[float] = []
    nodes: list[Expr] = []
    table: dict[tuple, int] = {}
    by_id: dict[int, int] = {}

    def emit(key: tuple, node: Expr) -> int:
        reg = table.get(key)
        if reg is None:
            reg = len(ops)
            op, a, b, c = key
            ops.append(op)
            arg_a.append(a)
            arg_b.append(b)
            consts.append(c)
            nodes.append(node)
            table[key] = reg
        return reg

    def visit(node: Expr) -> int:
        hit = by_id.get(id(node))
        if hit is not None:
            return hit
        if isinstance(node, Const):
            # arg_b carries the sign bit so that 0.0 and -0.0 stay distinct
            reg = emit((OP_CONST, 0, int(math.copysign(1.0, node.value) < 0), node.value), node)
        elif isinstance(node, Var):
            if not 0 <= node.index < n_vars:
                raise ValueError(f"variable {node.name!r} outside the chart")
            reg = emit((OP_VAR, node.index, 0, 0.0), node)
        elif isinstance(node, Neg):
            reg = emit((OP_NEG, visit(node.arg), 0, 0.0), node)
        elif isinstance(node, Pow):
            reg = emit((OP_POWI, visit(node.base), node.exponent, 0.0), node)
        elif isinstance(node, Call):
            reg = emit((_CALL_OPS[node.fn], visit(node.arg), 0, 0.0), node)
        else:
            a = visit(node.left)
            b = visit(node.right)
            reg = emit((_BINARY_OPS[type(node)], a, b, 0.0), node)
        by_id[id(node)] = reg
        return reg

    outputs = [visit(e) for e in exprs]
    return Program(
        ops=np.asarray(ops, dtype=np.int32),
        arg_a=np.asarray(arg_a, dtype=np.int32),
        arg_b=np.asarray(arg_b, dtype=np.int32),
        consts=np.asarray(consts, dtype=np.float64),
        outputs=np.asarray(outputs, dtype=np.int32),
        n_vars=n_vars,
        nodes=nodes,
    )


def pure_python_requested() -> bool:
    return os.environ.get("CODAZZI_PURE_PYTHON", "") not in ("", "0")
