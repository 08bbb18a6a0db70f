# Compiled pair-quadrature kernel: the hot loop of the nonlocal assembly.
# Semantics match _pairquad_py.pair_blocks; see the docstring there.
# Build: python3 setup.py build_ext --inplace

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow

cnp.import_array()


def pair_blocks(double[:, ::1] rects, double[:, :, ::1] vx,
                double[:, :, ::1] vy, double expo,
                double[::1] pts, double[::1] wts):
    cdef Py_ssize_t L = rects.shape[0]
    cdef Py_ssize_t P = pts.shape[0]
    out = np.zeros((L, 4, 4), dtype=np.float64)
    cdef double[:, :, ::1] blk = out
    vxp_arr = np.empty((P, 4), dtype=np.float64)
    vyq_arr = np.empty((P, 4), dtype=np.float64)
    cdef double[:, ::1] vxp = vxp_arr
    cdef double[:, ::1] vyq = vyq_arr
    cdef Py_ssize_t l, p, q, i, j
    cdef double x0, x1, y0, y1, jac, t, xv, yv, dd, kern
    cdef double d[4]
    cdef bint inv_sq = expo == 2.0

    for l in range(L):
        x0 = rects[l, 0]
        x1 = rects[l, 1]
        y0 = rects[l, 2]
        y1 = rects[l, 3]
        jac = (x1 - x0) * (y1 - y0)
        for p in range(P):
            t = pts[p]
            for i in range(4):
                vxp[p, i] = vx[l, i, 0] + (vx[l, i, 1] - vx[l, i, 0]) * t
                vyq[p, i] = vy[l, i, 0] + (vy[l, i, 1] - vy[l, i, 0]) * t
        for p in range(P):
            xv = x0 + (x1 - x0) * pts[p]
            for q in range(P):
                yv = y0 + (y1 - y0) * pts[q]
                dd = fabs(xv - yv)
                if inv_sq:
                    kern = wts[p] * wts[q] * jac / (dd * dd)
                else:
                    kern = wts[p] * wts[q] * jac * pow(dd, -expo)
                for i in range(4):
                    d[i] = vxp[p, i] - vyq[q, i]
                for i in range(4):
                    for j in range(4):
                        blk[l, i, j] += kern * d[i] * d[j]
    return out
