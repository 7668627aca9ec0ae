"""Pure-numpy implementation of the block-quadruple mask scan.

Same contract as the compiled kernel in _scan_cy: given the per-mask edge
tables, enumerate all ordered quadruples of bitmasks (p1, p2, d1, d2) with
p1 < p2, p1 & p2 == 0, d1 & d2 == 0, all four masks proper (not 0, not full),
excluding the complement-degenerate pattern p2 == ~p1 & d2 == ~d1, and return
those whose zone residual sa + sb + sc is <= thr.

Zones for an edge e = (i, j), i < j, relative to (p1, p2):
  A: e crosses p1 only  -> |Q[d1]_e|^2 must vanish
  B: e crosses p2 only  -> |Q[d2]_e|^2 must vanish
  C: e crosses both     -> |Q[d1]_e + Q[d2]_e|^2 must vanish
and ||[P1, Q[d1]] - [P2, Q[d2]]||_F^2 = 2 * (sa + sb + sc).
"""

import numpy as np

BACKEND_NAME = "python"


def scan_block_pairs(qre, qim, psum, cut, n, thr):
    """Return a list of (p1, p2, d1, d2) bitmask tuples with residual^2/2 <= thr."""
    N = 1 << n
    full = N - 1
    qe = qre + 1j * qim
    masks = np.arange(N, dtype=np.int64)
    nontrivial = (masks != 0) & (masks != full)
    disjoint = (masks[:, None] & masks[None, :]) == 0

    out = []
    for p1 in range(1, full):
        # proper submasks of ~p1 above p1 (the p1 < p2 ordering removes the
        # swap (p1,d1) <-> (p2,d2) duplicate)
        rest = full & ~p1
        p2s = []
        sub = rest
        while sub > 0:
            if sub > p1:
                p2s.append(sub)
            sub = (sub - 1) & rest
        if not p2s:
            continue
        p2arr = np.array(p2s, dtype=np.int64)
        c1 = cut[p1].astype(bool)
        c2 = cut[p2arr].astype(bool)
        zc = c2 & c1[None, :]
        za = (c1[None, :] & ~zc).astype(np.float64)
        zb = (c2 & ~zc).astype(np.float64)
        zc = zc.astype(np.float64)
        sa_all = psum @ za.T          # (N, K) zone-A sums per d1
        sb_all = psum @ zb.T
        sc_diag = psum @ zc.T         # |Q[d]|^2 summed over zone C

        for k, p2 in enumerate(p2s):
            s1 = np.nonzero(nontrivial & (sa_all[:, k] <= thr))[0]
            if s1.size == 0:
                continue
            s2 = np.nonzero(nontrivial & (sb_all[:, k] <= thr))[0]
            if s2.size == 0:
                continue
            ce = np.nonzero(zc[k])[0]
            # sc[d1, d2] = sum_C |Q1 + Q2|^2 expanded through the cross term
            x1 = qe[np.ix_(s1, ce)]
            x2 = qe[np.ix_(s2, ce)]
            cross = 2.0 * np.real(x1 @ x2.conj().T)
            total = (
                sa_all[s1, k][:, None]
                + sb_all[s2, k][None, :]
                + sc_diag[s1, k][:, None]
                + sc_diag[s2, k][None, :]
                + cross
            )
            ok = (total <= thr) & disjoint[np.ix_(s1, s2)]
            if p2 == full ^ p1:
                ok &= (masks[s1][:, None] ^ masks[s2][None, :]) != full
            for a, b in np.argwhere(ok):
                out.append((p1, int(p2), int(s1[a]), int(s2[b])))
    return out
