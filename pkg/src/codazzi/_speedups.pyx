# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch evaluator for :class:`codazzi.program.Program`.

Opcodes mirror codazzi/program.py.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, tan, sinh, cosh, exp, log, sqrt, pow, isfinite

cnp.import_array()


def eval_program(const int[::1] ops, const int[::1] arg_a, const int[::1] arg_b,
                 const double[::1] consts, const int[::1] outputs,
                 const double[:, ::1] points):
    cdef Py_ssize_t m = points.shape[0]
    cdef Py_ssize_t n_ins = ops.shape[0]
    cdef Py_ssize_t n_out = outputs.shape[0]
    out_arr = np.empty((m, n_out), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    regs_arr = np.empty(max(n_ins, 1), dtype=np.float64)
    cdef double[::1] regs = regs_arr
    cdef Py_ssize_t p, r, k
    cdef int op, status
    cdef double x, y, v
    with nogil:
        for p in range(m):
            for r in range(n_ins):
                op = ops[r]
                status = 0
                if op == 0:
                    v = consts[r]
                elif op == 1:
                    v = points[p, arg_a[r]]
                elif op == 2:
                    v = -regs[arg_a[r]]
                elif op == 3:
                    v = regs[arg_a[r]] + regs[arg_b[r]]
                elif op == 4:
                    v = regs[arg_a[r]] - regs[arg_b[r]]
                elif op == 5:
                    v = regs[arg_a[r]] * regs[arg_b[r]]
                elif op == 6:
                    y = regs[arg_b[r]]
                    if y == 0.0:
                        status = 3
                    v = regs[arg_a[r]] / y
                elif op == 7:
                    x = regs[arg_a[r]]
                    if x == 0.0 and arg_b[r] < 0:
                        status = 4
                    v = pow(x, <double>arg_b[r])
                elif op == 8:
                    v = sin(regs[arg_a[r]])
                elif op == 9:
                    v = cos(regs[arg_a[r]])
                elif op == 10:
                    v = tan(regs[arg_a[r]])
                elif op == 11:
                    v = sinh(regs[arg_a[r]])
                elif op == 12:
                    v = cosh(regs[arg_a[r]])
                elif op == 13:
                    v = exp(regs[arg_a[r]])
                elif op == 14:
                    x = regs[arg_a[r]]
                    if x <= 0.0:
                        status = 1
                    v = log(x)
                else:
                    x = regs[arg_a[r]]
                    if x < 0.0:
                        status = 2
                    v = sqrt(x)
                if status == 0 and not isfinite(v):
                    status = 5
                if status != 0:
                    with gil:
                        return None, status, p, r
                regs[r] = v
            for k in range(n_out):
                out[p, k] = regs[outputs[k]]
    return out_arr, 0, 0, 0
