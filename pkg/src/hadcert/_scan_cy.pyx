# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled mask-scan kernel for the block-quadruple search.

Mirrors hadcert._scan_py.scan_block_pairs exactly; see that module for the
contract. The compiled loop prunes each zone sum with an early exit, which
avoids materializing the (d1, d2) residual grids the numpy fallback builds.
"""

import numpy as np


def scan_block_pairs(double[:, ::1] qre, double[:, ::1] qim,
                     double[:, ::1] psum, unsigned char[:, ::1] cut,
                     int n, double thr):
    cdef int N = psum.shape[0]
    cdef int E = psum.shape[1]
    cdef int full = N - 1
    cdef int p1, p2, d1, d2, rest, restd, e, m, comp
    cdef int na, nb, nc
    cdef double sa, sb, sc, tr, ti
    cdef int[::1] za = np.empty(E, dtype=np.intc)
    cdef int[::1] zb = np.empty(E, dtype=np.intc)
    cdef int[::1] zc = np.empty(E, dtype=np.intc)
    out = []

    for p1 in range(1, full):
        rest = full & ~p1
        p2 = rest
        while p2 > 0:
            if p2 > p1:
                na = nb = nc = 0
                for e in range(E):
                    if cut[p1, e]:
                        if cut[p2, e]:
                            zc[nc] = e; nc += 1
                        else:
                            za[na] = e; na += 1
                    elif cut[p2, e]:
                        zb[nb] = e; nb += 1
                comp = p2 == (full ^ p1)
                for d1 in range(1, full):
                    sa = 0.0
                    for m in range(na):
                        sa += psum[d1, za[m]]
                        if sa > thr:
                            break
                    if sa > thr:
                        continue
                    restd = full & ~d1
                    d2 = restd
                    while d2 > 0:
                        if not (comp and d2 == (full ^ d1)):
                            sb = sa
                            for m in range(nb):
                                sb += psum[d2, zb[m]]
                                if sb > thr:
                                    break
                            if sb <= thr:
                                sc = sb
                                for m in range(nc):
                                    e = zc[m]
                                    tr = qre[d1, e] + qre[d2, e]
                                    ti = qim[d1, e] + qim[d2, e]
                                    sc += tr * tr + ti * ti
                                    if sc > thr:
                                        break
                                if sc <= thr:
                                    out.append((p1, p2, d1, d2))
                        d2 = (d2 - 1) & restd
            p2 = (p2 - 1) & rest
    return out
