"""Isolation certificates for biunitary matrices via the commutator-span rank.

For a biunitary U of order n the commutators [D_i, U* D_j U] of diagonal
projections span a subspace of dimension at most n^2 - 2n + 1. When that
bound is attained the corresponding commuting square is rigid: no nearby
inequivalent biunitary exists. The certificate records the measured rank of
the stacked-commutator matrix, its full singular spectrum and the spectral
gap at the cut, and issues a three-valued verdict.
"""

from dataclasses import dataclass

import numpy as np

from .cmatrix import DEFAULT_POLICY, NumericPolicy, as_matrix, numerical_rank
from .hadamard import verify_biunitary

__all__ = [
    "ISOLATED",
    "SPAN_FAILS",
    "INCONCLUSIVE",
    "SpanCertificate",
    "span_matrix",
    "reduced_minor",
    "certify_isolation",
    "kernel_dimension",
]

ISOLATED = "Isolated"
SPAN_FAILS = "SpanFails"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class SpanCertificate:
    """Outcome of the span-rank isolation test.

    verdict semantics: Isolated requires rank == expected with a certified
    gap; SpanFails requires rank < expected with a certified gap and means
    only that the rank test fails, not that a family must exist; anything
    else (no clean gap, or rank above the bound under an absurd policy) is
    Inconclusive.
    """

    n: int
    rank: int
    expected: int
    singular_values: np.ndarray
    gap: float
    verdict: str
    policy: NumericPolicy

    def to_json_dict(self):
        """Canonical JSON object; key order is part of the wire format."""
        return {
            "n": self.n,
            "rank": self.rank,
            "expected": self.expected,
            "verdict": self.verdict,
            "gap": None if np.isinf(self.gap) else float(self.gap),
            "singular_values": [float(s) for s in self.singular_values],
            "policy": {
                "tol_entry": self.policy.tol_entry,
                "tol_unitary": self.policy.tol_unitary,
                "rank_rel_cut": self.policy.rank_rel_cut,
                "cert_gap_min": self.policy.cert_gap_min,
            },
        }


def span_matrix(u):
    """The n^2 x n^2 stacked-commutator matrix A.

    Row (i,j) holds the entries of [D_i, U* D_j U]; explicitly
    A[(i,j),(k,l)] = (delta_ik - delta_il) * conj(u_jk) * u_jl, with both
    index pairs in lexicographic 0-based order.
    """
    u = as_matrix(u)
    n = u.shape[0]
    E = np.eye(n)
    deltas = E[:, None, :, None] - E[:, None, None, :]
    prods = np.conj(u)[None, :, :, None] * u[None, :, None, :]
    return (deltas * prods).reshape(n * n, n * n)


def reduced_minor(a):
    """The (n-1)^2 x (n-1)^2 minor with the linearly dependent rows and
    columns removed.

    Rows {(i,0) for all i} u {(0,j) for all j} are dependent because the
    commutators sum to zero over either index; columns {(k,k)} vanish
    identically and columns {(0,l)} carry the matching dependencies. 2n-1
    of each are removed.
    """
    a = np.asarray(a)
    n2 = a.shape[0]
    n = int(round(np.sqrt(n2)))
    if n * n != n2 or a.shape != (n2, n2):
        raise ValueError(f"expected an n^2 x n^2 matrix, got {a.shape}")
    rows_rm = {i * n for i in range(n)} | set(range(n))
    cols_rm = {k * n + k for k in range(n)} | set(range(n))
    rk = [x for x in range(n2) if x not in rows_rm]
    ck = [x for x in range(n2) if x not in cols_rm]
    return a[np.ix_(rk, ck)]


def certify_isolation(u, policy=DEFAULT_POLICY):
    """Span-rank certificate for a biunitary matrix. Raises on non-biunitary
    input."""
    u = as_matrix(u)
    verdict = verify_biunitary(u, policy)
    if not verdict.is_biunitary:
        raise ValueError(
            "certify_isolation requires a biunitary matrix "
            f"(modulus dev {verdict.max_modulus_deviation:.3e}, "
            f"unitarity residual {verdict.max_unitarity_residual:.3e})"
        )
    n = u.shape[0]
    expected = n * n - 2 * n + 1
    rank, gap, sv = numerical_rank(span_matrix(u), policy)
    if gap >= policy.cert_gap_min and rank == expected:
        label = ISOLATED
    elif gap >= policy.cert_gap_min and rank < expected:
        label = SPAN_FAILS
    else:
        label = INCONCLUSIVE
    return SpanCertificate(
        n=n,
        rank=rank,
        expected=expected,
        singular_values=sv,
        gap=gap,
        verdict=label,
        policy=policy,
    )


def kernel_dimension(u, policy=DEFAULT_POLICY):
    """Dimension of the kernel of (c_kl) -> sum c_kl [D_k, U* D_l U],
    i.e. n^2 - rank of the span matrix. Equals 2n-1 exactly when the span
    bound is attained."""
    cert = certify_isolation(u, policy)
    return cert.n * cert.n - cert.rank
