"""Dense complex matrix kernel: products, traces, commutators, Hermitian
exponentials, singular values and numerical rank.

All matrices are numpy arrays of complex128. Indices are 0-based throughout;
add 1 to translate to the 1-based conventions common in the literature.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NumericPolicy",
    "DEFAULT_POLICY",
    "as_matrix",
    "matmul",
    "adjoint",
    "normalized_trace",
    "commutator",
    "expi_hermitian",
    "numerical_rank",
    "frobenius_norm",
    "conditional_expect_diag",
    "mask_from_indices",
    "mask_indices",
    "projection_matrix",
]


@dataclass(frozen=True)
class NumericPolicy:
    """Tolerances shared across the verification and certification routines.

    tol_entry      entrywise unimodularity check, |entry|*sqrt(n) vs 1
    tol_unitary    Frobenius residual for unitarity / commutation checks
    rank_rel_cut   singular values below rank_rel_cut * sigma_max count as zero
    cert_gap_min   minimum sigma_rank / sigma_{rank+1} ratio for a certified verdict
    """

    tol_entry: float = 1e-9
    tol_unitary: float = 1e-9
    rank_rel_cut: float = 1e-8
    cert_gap_min: float = 1e4

    def __post_init__(self):
        for name in ("tol_entry", "tol_unitary", "rank_rel_cut", "cert_gap_min"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if not self.rank_rel_cut < 1:
            raise ValueError("rank_rel_cut must be < 1")


DEFAULT_POLICY = NumericPolicy()


def as_matrix(a):
    """Coerce to a square complex128 array with finite entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def matmul(a, b):
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"order mismatch: {a.shape} @ {b.shape}")
    return a @ b


def adjoint(a):
    """Conjugate transpose."""
    return np.asarray(a, dtype=np.complex128).conj().T


def normalized_trace(a):
    """(1/n) * sum of diagonal entries."""
    a = np.asarray(a)
    return complex(np.trace(a)) / a.shape[0]


def commutator(a, b):
    """ab - ba. Raises on order mismatch."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise ValueError(f"order mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def expi_hermitian(h, t, policy=DEFAULT_POLICY):
    """exp(i*t*h) for Hermitian h, via the spectral decomposition.

    The eigenvector route keeps the result unitary to rounding, which the
    family constructions rely on. Raises if h is not Hermitian within
    policy.tol_unitary.
    """
    h = as_matrix(h)
    if frobenius_norm(h - h.conj().T) > policy.tol_unitary:
        raise ValueError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * t * w)) @ v.conj().T


def numerical_rank(a, policy=DEFAULT_POLICY):
    """SVD-based rank with the spectral gap at the cut.

    Returns (rank, gap, singular_values). rank counts singular values above
    rank_rel_cut * sigma_max; gap = sigma_rank / sigma_{rank+1}, infinite for
    full rank (or an exactly zero tail).
    """
    a = np.asarray(a, dtype=np.complex128)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0, np.inf, s
    rank = int(np.sum(s > policy.rank_rel_cut * s[0]))
    if rank >= s.size or s[rank] == 0.0:
        gap = np.inf
    else:
        gap = float(s[rank - 1] / s[rank])
    return rank, gap, s


def frobenius_norm(a):
    return float(np.linalg.norm(np.asarray(a)))


def conditional_expect_diag(a):
    """Trace-preserving projection onto the diagonal algebra (off-diagonal
    entries zeroed)."""
    a = np.asarray(a, dtype=np.complex128)
    return np.diag(np.diag(a))


# --- diagonal 0/1 projections -------------------------------------------------

def mask_from_indices(indices, n):
    """Length-n 0/1 vector with ones at the given positions."""
    m = np.zeros(n, dtype=np.int8)
    for i in indices:
        if not 0 <= i < n:
            raise ValueError(f"index {i} out of range for order {n}")
        m[i] = 1
    return m


def mask_indices(mask):
    """Sorted list of positions where the mask is 1."""
    return [int(i) for i in np.nonzero(np.asarray(mask))[0]]


def projection_matrix(mask):
    """Diagonal projection as a dense complex matrix."""
    return np.diag(np.asarray(mask, dtype=np.complex128))
