"""Pure-Python (numpy) batch evaluator for compiled programs.

Runs instruction by instruction, each one vectorized across all points.
Returns the same ``(out, status, bad_point, bad_instr)`` tuple as the
compiled kernel.
"""

from __future__ import annotations

import numpy as np

from .program import (
    OP_ADD,
    OP_CONST,
    OP_COS,
    OP_COSH,
    OP_DIV,
    OP_EXP,
    OP_LOG,
    OP_MUL,
    OP_NEG,
    OP_POWI,
    OP_SIN,
    OP_SINH,
    OP_SQRT,
    OP_SUB,
    OP_TAN,
    OP_VAR,
)

_UNARY = {
    OP_SIN: np.sin,
    OP_COS: np.cos,
    OP_TAN: np.tan,
    OP_SINH: np.sinh,
    OP_COSH: np.cosh,
    OP_EXP: np.exp,
}


def eval_program(ops, arg_a, arg_b, consts, outputs, points):
    m = points.shape[0]
    regs: list[np.ndarray] = []
    with np.errstate(all="ignore"):
        for r in range(len(ops)):
            op = int(ops[r])
            a = int(arg_a[r])
            bad = None
            status = 0
            if op == OP_CONST:
                val = np.full(m, consts[r])
            elif op == OP_VAR:
                val = points[:, a].copy()
            elif op == OP_NEG:
                val = -regs[a]
            elif op == OP_ADD:
                val = regs[a] + regs[int(arg_b[r])]
            elif op == OP_SUB:
                val = regs[a] - regs[int(arg_b[r])]
            elif op == OP_MUL:
                val = regs[a] * regs[int(arg_b[r])]
            elif op == OP_DIV:
                den = regs[int(arg_b[r])]
                bad, status = den == 0.0, 3
                val = regs[a] / den
            elif op == OP_POWI:
                n = int(arg_b[r])
                base = regs[a]
                if n < 0:
                    bad, status = base == 0.0, 4
                val = np.power(base, float(n))
            elif op == OP_LOG:
                x = regs[a]
                bad, status = x <= 0.0, 1
                val = np.log(x)
            elif op == OP_SQRT:
                x = regs[a]
                bad, status = x < 0.0, 2
                val = np.sqrt(x)
            else:
                val = _UNARY[op](regs[a])
            if bad is not None and bad.any():
                return None, status, int(np.argmax(bad)), r
            nonfinite = ~np.isfinite(val)
            if nonfinite.any():
                return None, 5, int(np.argmax(nonfinite)), r
            regs.append(val)
    out = np.empty((m, len(outputs)))
    for k, reg in enumerate(outputs):
        out[:, k] = regs[int(reg)]
    return out, 0, 0, 0
