"""Algebraic witnesses that break the span condition, and the one-parameter
families of biunitaries they generate.

Two kinds of witness on a biunitary base U, both with diagonal 0/1 masks and
the conjugated projections q = U diag(d) U*:

  * a commuting pair (p, d): [diag(p), q] = 0. The family is
    exp(i t diag(p) q) U, a curve of biunitaries through U.
  * a block quadruple (p1, p2, d1, d2) with p1 p2 = 0, d1 d2 = 0 and
    [P1, q1] = [P2, q2]. The family is
    (I + (lam - 1) P1 q1 + (conj(lam) - 1) P2 q2) U, which multiplies the
    (p1 x d1) block of U by lam and the (p2 x d2) block by conj(lam).

The finders are exhaustive over 0/1 masks (caps: n <= 14 for pairs, n <= 10
for quadruples). Quadruples of the shape (p, ~p, d, ~d) satisfy the identity
for every biunitary and generate only diagonal-phase equivalences, so they
are excluded as degenerate.
"""

from dataclasses import dataclass

import numpy as np

from . import _backend
from .cmatrix import (
    DEFAULT_POLICY,
    as_matrix,
    commutator,
    expi_hermitian,
    frobenius_norm,
    mask_indices,
    projection_matrix,
)
from .hadamard import verify_biunitary

__all__ = [
    "CommutingPairSpec",
    "BlockPairSpec",
    "commuting_residual",
    "block_residual",
    "commuting_pair_spec",
    "block_pair_spec",
    "find_commuting_pairs",
    "find_block_pairs",
    "constr1_family",
    "constr2_family",
    "verify_unitarity_identity",
    "spec_to_json_dict",
    "spec_from_json_dict",
    "COMMUTING_CAP",
    "BLOCK_CAP",
]

COMMUTING_CAP = 14
BLOCK_CAP = 10

# Absolute slack added to the quadruple-scan threshold: the fallback expands
# |Q1 + Q2|^2 through a cross term whose cancellation noise is ~E*eps even at
# an exact solution. Candidates only; the exact commutator norm decides.
SCAN_SLACK = 1e-12


@dataclass(frozen=True)
class CommutingPairSpec:
    """A diagonal projection p and conjugated projection q = U diag(d) U*
    with [p, q] = 0 (residual is the measured commutator norm)."""

    base: np.ndarray
    p_mask: np.ndarray
    d_mask: np.ndarray
    residual: float


@dataclass(frozen=True)
class BlockPairSpec:
    """Disjoint projections p1, p2 and disjoint d1, d2 with
    [P1, q1] - [P2, q2] = 0 for q_i = U diag(d_i) U*."""

    base: np.ndarray
    p1_mask: np.ndarray
    p2_mask: np.ndarray
    d1_mask: np.ndarray
    d2_mask: np.ndarray
    residual: float


def _conjugated(u, d_mask):
    d = np.asarray(d_mask, dtype=np.float64)
    return (u * d[None, :]) @ u.conj().T


def commuting_residual(u, p_mask, d_mask):
    """||[diag(p), U diag(d) U*]||_F."""
    p = np.asarray(p_mask, dtype=np.float64)
    q = _conjugated(u, d_mask)
    return frobenius_norm((p[:, None] - p[None, :]) * q)


def block_residual(u, p1_mask, p2_mask, d1_mask, d2_mask):
    """||[P1, U diag(d1) U*] - [P2, U diag(d2) U*]||_F."""
    p1 = np.asarray(p1_mask, dtype=np.float64)
    p2 = np.asarray(p2_mask, dtype=np.float64)
    q1 = _conjugated(u, d1_mask)
    q2 = _conjugated(u, d2_mask)
    k = (p1[:, None] - p1[None, :]) * q1 - (p2[:, None] - p2[None, :]) * q2
    return frobenius_norm(k)


def _as_mask(mask, n):
    m = np.asarray(mask, dtype=np.int8).ravel()
    if m.size != n or not np.all((m == 0) | (m == 1)):
        raise ValueError(f"expected a 0/1 mask of length {n}")
    return m


def _check_nontrivial(mask, name):
    s = int(np.sum(mask))
    if s == 0 or s == mask.size:
        raise ValueError(f"{name} must not be all-0 or all-1")


def commuting_pair_spec(u, p_mask, d_mask):
    """Build a CommutingPairSpec with the measured residual."""
    u = as_matrix(u)
    n = u.shape[0]
    p = _as_mask(p_mask, n)
    d = _as_mask(d_mask, n)
    _check_nontrivial(p, "p_mask")
    _check_nontrivial(d, "d_mask")
    return CommutingPairSpec(u, p, d, commuting_residual(u, p, d))


def block_pair_spec(u, p1_mask, p2_mask, d1_mask, d2_mask):
    """Build a BlockPairSpec with the measured residual; masks must be
    pairwise disjoint within each side and non-trivial."""
    u = as_matrix(u)
    n = u.shape[0]
    p1 = _as_mask(p1_mask, n)
    p2 = _as_mask(p2_mask, n)
    d1 = _as_mask(d1_mask, n)
    d2 = _as_mask(d2_mask, n)
    for m, name in ((p1, "p1_mask"), (p2, "p2_mask"), (d1, "d1_mask"), (d2, "d2_mask")):
        _check_nontrivial(m, name)
    if np.any(p1 * p2) or np.any(d1 * d2):
        raise ValueError("masks within each side must be disjoint")
    return BlockPairSpec(u, p1, p2, d1, d2, block_residual(u, p1, p2, d1, d2))


# --- exhaustive finders -------------------------------------------------------

def _edge_tables(u):
    """Per-mask tables over the edges (i, j), i < j:

    qe[m, e]  = (U diag(m) U*)_{ij}
    psum[m,e] = |qe[m, e]|^2
    cut[m, e] = 1 iff the edge crosses mask m
    """
    n = u.shape[0]
    N = 1 << n
    ei, ej = np.triu_indices(n, k=1)
    M = u[ei, :] * np.conj(u[ej, :])                     # (E, n)
    bits = ((np.arange(N)[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int8)
    qe = bits.astype(np.float64) @ M.T                   # (N, E)
    psum = np.ascontiguousarray(np.abs(qe) ** 2)
    cut = np.ascontiguousarray(bits[:, ei] ^ bits[:, ej]).astype(np.uint8)
    return bits, qe, psum, cut


def _mask_bits(bitmask, n):
    return np.array([(bitmask >> k) & 1 for k in range(n)], dtype=np.int8)


def _mask_sort_key(*bitmasks):
    n_needed = max(bitmasks).bit_length()
    return tuple(
        tuple(k for k in range(n_needed + 1) if (m >> k) & 1) for m in bitmasks
    )


def find_commuting_pairs(u, policy=DEFAULT_POLICY):
    """All non-trivial (p_mask, d_mask) with [diag(p), U diag(d) U*] = 0
    within policy.tol_unitary.

    Exhaustive over 0/1 masks; complement duplicates are removed on each side
    (both [~p, q] and [p, ~q] vanish together with [p, q]) by keeping the
    representative that excludes index 0. Only n <= 14 is accepted.
    """
    u = as_matrix(u)
    n = u.shape[0]
    if n > COMMUTING_CAP:
        raise ValueError(f"order {n} exceeds the exhaustive cap {COMMUTING_CAP}")
    if n < 2:
        return []
    verd = verify_biunitary(u, policy)
    if not verd.is_biunitary:
        raise ValueError("find_commuting_pairs requires a biunitary matrix")
    tol = policy.tol_unitary
    _, _, psum, cut = _edge_tables(u)
    N = 1 << n
    full = N - 1
    # canonical masks: bit 0 clear, not trivial
    cand = np.arange(2, full, 2, dtype=np.int64)
    if cand.size == 0:
        return []
    # ||[p, Q[d]]||^2 = 2 * sum_{cut edges of p} |Q[d]_e|^2
    thr = 2.0 * tol * tol        # loose scan gate; exact residual decides below
    p2d = psum[cand]             # (Nd, E)
    hits = []
    chunk = max(1, (1 << 24) // max(1, p2d.shape[0] * 8))
    for lo in range(0, cand.size, chunk):
        block = cand[lo : lo + chunk]
        r = p2d @ cut[block].T.astype(np.float64)      # (Nd, chunk)
        for di, pi in zip(*np.nonzero(r <= thr)):
            hits.append((int(block[pi]), int(cand[di])))
    out = []
    for pbits, dbits in hits:
        p = _mask_bits(pbits, n)
        d = _mask_bits(dbits, n)
        res = commuting_residual(u, p, d)
        if res <= tol:
            out.append((pbits, dbits, CommutingPairSpec(u, p, d, res)))
    out.sort(key=lambda t: _mask_sort_key(t[0], t[1]))
    return [spec for _, _, spec in out]


def find_block_pairs(u, policy=DEFAULT_POLICY):
    """All certified block quadruples (p1, p2 | d1, d2) on u, up to the
    (1 <-> 2) swap and excluding the degenerate complement pattern
    (p2, d2) = (~p1, ~d1).

    Exhaustive over disjoint 0/1 mask pairs; only n <= 10 is accepted. The
    scan runs on the compiled kernel when available (see hadcert.backend_name).
    """
    u = as_matrix(u)
    n = u.shape[0]
    if n > BLOCK_CAP:
        raise ValueError(f"order {n} exceeds the exhaustive cap {BLOCK_CAP}")
    if n < 2:
        return []
    verd = verify_biunitary(u, policy)
    if not verd.is_biunitary:
        raise ValueError("find_block_pairs requires a biunitary matrix")
    tol = policy.tol_unitary
    _, qe, psum, cut = _edge_tables(u)
    qre = np.ascontiguousarray(qe.real)
    qim = np.ascontiguousarray(qe.imag)
    # residual^2 = 2 * (sa + sb + sc); scan with slack, the exact commutator
    # norm decides membership
    thr = 2.0 * tol * tol + SCAN_SLACK
    raw = _backend.scan_block_pairs(qre, qim, psum, cut, n, thr)
    out = []
    for p1b, p2b, d1b, d2b in raw:
        masks = [_mask_bits(b, n) for b in (p1b, p2b, d1b, d2b)]
        res = block_residual(u, *masks)
        if res <= tol:
            out.append(((p1b, p2b, d1b, d2b), BlockPairSpec(u, *masks, res)))
    out.sort(key=lambda t: _mask_sort_key(*t[0]))
    return [spec for _, spec in out]


# --- family constructors ------------------------------------------------------

def constr1_family(spec, t, policy=DEFAULT_POLICY):
    """Family member exp(i t p q) U from a certified commuting pair.

    p q is Hermitian (the factors commute), so the conjugating factor is
    unitary to rounding; the result is verified biunitary before returning.
    """
    u = spec.base
    res = commuting_residual(u, spec.p_mask, spec.d_mask)
    if res > policy.tol_unitary:
        raise ValueError(f"uncertified commuting pair: residual {res:.3e}")
    if t == 0.0:
        return u.copy()
    h = projection_matrix(spec.p_mask) @ _conjugated(u, spec.d_mask)
    v = expi_hermitian(h, t, policy) @ u
    verd = verify_biunitary(v, policy)
    if not verd.is_biunitary:
        raise ValueError(
            f"family member failed biunitarity at t={t} "
            f"(unitarity residual {verd.max_unitarity_residual:.3e})"
        )
    return v


def constr2_family(spec, lam, policy=DEFAULT_POLICY):
    """Family member (I + (lam-1) P1 q1 + (conj(lam)-1) P2 q2) U from a
    certified block quadruple; |lam| must be 1.

    Entrywise this multiplies the (p1 x d1) block of U by lam and the
    (p2 x d2) block by conj(lam), leaving all moduli unchanged.
    """
    lam = complex(lam)
    if abs(abs(lam) - 1.0) > policy.tol_entry:
        raise ValueError(f"|lambda| = {abs(lam)} is not 1 within tolerance")
    u = spec.base
    res = block_residual(u, spec.p1_mask, spec.p2_mask, spec.d1_mask, spec.d2_mask)
    if res > policy.tol_unitary:
        raise ValueError(f"uncertified block quadruple: residual {res:.3e}")
    if lam == 1.0:
        return u.copy()
    n = u.shape[0]
    p1 = projection_matrix(spec.p1_mask)
    p2 = projection_matrix(spec.p2_mask)
    q1 = _conjugated(u, spec.d1_mask)
    q2 = _conjugated(u, spec.d2_mask)
    v = (np.eye(n) + (lam - 1.0) * p1 @ q1 + (np.conj(lam) - 1.0) * p2 @ q2) @ u
    verd = verify_biunitary(v, policy)
    if not verd.is_biunitary:
        raise ValueError(
            f"family member failed biunitarity "
            f"(unitarity residual {verd.max_unitarity_residual:.3e})"
        )
    return v


def verify_unitarity_identity(spec):
    """||P1 q1 P1 + P2 q2 P2 - q1 P1 - P2 q2||_F.

    This combination vanishes whenever [P1, q1] = [P2, q2] with disjoint
    projections, and is what makes the block-phase factor unitary.
    """
    u = spec.base
    p1 = projection_matrix(spec.p1_mask)
    p2 = projection_matrix(spec.p2_mask)
    q1 = _conjugated(u, spec.d1_mask)
    q2 = _conjugated(u, spec.d2_mask)
    return frobenius_norm(p1 @ q1 @ p1 + p2 @ q2 @ p2 - q1 @ p1 - p2 @ q2)


# --- serialization ------------------------------------------------------------

def spec_to_json_dict(spec, base_ref):
    """JSON form of a family spec; matrices are carried by reference."""
    if isinstance(spec, CommutingPairSpec):
        return {
            "theorem": "constr1",
            "base": base_ref,
            "p": mask_indices(spec.p_mask),
            "d": mask_indices(spec.d_mask),
            "residual": float(spec.residual),
        }
    if isinstance(spec, BlockPairSpec):
        return {
            "theorem": "constr2",
            "base": base_ref,
            "p1": mask_indices(spec.p1_mask),
            "p2": mask_indices(spec.p2_mask),
            "d1": mask_indices(spec.d1_mask),
            "d2": mask_indices(spec.d2_mask),
            "residual": float(spec.residual),
        }
    raise TypeError(f"not a family spec: {type(spec)}")


def spec_from_json_dict(doc, base):
    """Rebuild a spec against the given base matrix; the residual is
    recomputed, not trusted."""
    base = as_matrix(base)
    n = base.shape[0]
    tag = doc.get("theorem")
    if tag == "constr1":
        from .cmatrix import mask_from_indices

        return commuting_pair_spec(
            base, mask_from_indices(doc["p"], n), mask_from_indices(doc["d"], n)
        )
    if tag == "constr2":
        from .cmatrix import mask_from_indices

        return block_pair_spec(
            base,
            mask_from_indices(doc["p1"], n),
            mask_from_indices(doc["p2"], n),
            mask_from_indices(doc["d1"], n),
            mask_from_indices(doc["d2"], n),
        )
    raise ValueError(f"unknown family spec tag {tag!r}")
