"""Hot evaluation kernels: batch evaluation of radial-log term tables.

A term table is the flat numeric form of a symbolic expression: arrays
``coeffs[k]``, ``monos[k, j]``, ``rpows[k]``, ``lpows[k]`` encoding the sum

    sum_k  coeffs[k] * prod_j x_j**monos[k, j] * |x|**rpows[k]
                     * log(5/|x|)**lpows[k].

Evaluating such tables at large batches of quadrature nodes dominates the
runtime of every verification suite, so this module carries the numba
``@njit`` kernels together with a pure-numpy fallback; ``polyharm.backend``
picks the active one.  Points must be nonzero (``|x| > 0``); callers are
responsible for keeping evaluation off the singularity.

Both implementations accumulate terms in index order per point, so each
backend is bitwise deterministic across runs.
"""

from __future__ import annotations

import numpy as np

from .backend import USING_NUMBA

__all__ = ["eval_term_table", "eval_term_table_numpy", "BACKEND_NAME"]

BACKEND_NAME = "numba" if USING_NUMBA else "numpy"


def eval_term_table_numpy(points, coeffs, monos, rpows, lpows):
    """Pure-numpy term-table evaluation at an (N, n) batch of points."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    npts = pts.shape[0]
    r2 = np.einsum("ij,ij->i", pts, pts)
    r = np.sqrt(r2)
    need_log = bool(np.any(lpows > 0))
    logl = np.log(5.0 / r) if need_log else None
    out = np.zeros(npts)
    for k in range(coeffs.shape[0]):
        term = np.full(npts, coeffs[k])
        for j in range(pts.shape[1]):
            for _ in range(monos[k, j]):
                term = term * pts[:, j]
        q = rpows[k]
        if q:
            term = term * r ** float(q)
        p = lpows[k]
        if p:
            term = term * logl**p
        out = out + term
    return out


def _eval_term_table_loops(points, coeffs, monos, rpows, lpows):
    # Loop form shared by the numba kernel; per-point accumulation runs in
    # term order, matching the numpy variant's summation sequence.
    npts, ndim = points.shape
    nterms = coeffs.shape[0]
    has_log = False
    for k in range(nterms):
        if lpows[k] > 0:
            has_log = True
            break
    out = np.zeros(npts)
    for i in range(npts):
        r2 = 0.0
        for j in range(ndim):
            r2 += points[i, j] * points[i, j]
        r = np.sqrt(r2)
        logl = np.log(5.0 / r) if has_log else 0.0
        acc = 0.0
        for k in range(nterms):
            v = coeffs[k]
            for j in range(ndim):
                e = monos[k, j]
                for _ in range(e):
                    v *= points[i, j]
            q = rpows[k]
            if q != 0:
                v *= r ** float(q)
            p = lpows[k]
            for _ in range(p):
                v *= logl
            acc += v
        out[i] = acc
    return out


if USING_NUMBA:
    import numba

    _eval_term_table_jit = numba.njit(cache=True, fastmath=False)(
        _eval_term_table_loops
    )

    def eval_term_table(points, coeffs, monos, rpows, lpows):
        pts = np.ascontiguousarray(points, dtype=np.float64)
        return _eval_term_table_jit(pts, coeffs, monos, rpows, lpows)

else:
    eval_term_table = eval_term_table_numpy
