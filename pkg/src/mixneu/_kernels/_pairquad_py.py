"""Vectorized numpy twin of the compiled pair-quadrature kernel."""

import numpy as np


def pair_blocks(rects, vx, vy, expo, pts, wts):
    """Tensor-Gauss interaction blocks for a batch of leaf rectangles.

    Per leaf l the return value is

        blocks[l, i, j] = sum_{p,q} w_p w_q jac_l k(|x_p - y_q|)
                          * (vx_i(x_p) - vy_i(y_q)) * (vx_j(x_p) - vy_j(y_q))

    with k(d) = d^(-expo), x_p / y_q the mapped Gauss points of
    [x0, x1] / [y0, y1], and vx[l, i] = (value at x0, value at x1) the
    linear basis restriction of slot i on the x side (vy likewise on y).

    The x and y intervals of every leaf must be disjoint.
    """
    rects = np.ascontiguousarray(rects, dtype=np.float64)
    x0, x1, y0, y1 = (rects[:, c] for c in range(4))
    X = x0[:, None] + (x1 - x0)[:, None] * pts[None, :]
    Y = y0[:, None] + (y1 - y0)[:, None] * pts[None, :]
    dxy = np.abs(X[:, :, None] - Y[:, None, :])
    if expo == 2.0:
        K = 1.0 / (dxy * dxy)
    else:
        K = dxy ** (-expo)
    jac = (x1 - x0) * (y1 - y0)
    K *= jac[:, None, None] * (wts[:, None] * wts[None, :])[None, :, :]

    VX = vx[:, :, 0][:, :, None] + (vx[:, :, 1] - vx[:, :, 0])[:, :, None] * pts
    VY = vy[:, :, 0][:, :, None] + (vy[:, :, 1] - vy[:, :, 0])[:, :, None] * pts

    # expand (dI dJ) = (vxI - vyI)(vxJ - vyJ) to avoid a (L,4,P,P) temporary
    Kx = K.sum(axis=2)
    Ky = K.sum(axis=1)
    A = np.einsum("lp,lip,ljp->lij", Kx, VX, VX)
    C = np.einsum("lq,liq,ljq->lij", Ky, VY, VY)
    D = np.einsum("lpq,lip,ljq->lij", K, VX, VY)
    return A + C - D - D.transpose(0, 2, 1)
