"""Construction, verification and comparison of biunitary (complex Hadamard)
matrices.

A biunitary of order n is a unitary matrix whose entries all have modulus
1/sqrt(n). Built-in constructors: the Fourier matrix, circulants (including
the quadratic-residue circulant of Bjorck type at n=7) and Petrescu's 7x7
one-parameter family.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .cmatrix import DEFAULT_POLICY, as_matrix, frobenius_norm

__all__ = [
    "BiunitaryVerdict",
    "fourier",
    "verify_biunitary",
    "circulant",
    "first_row",
    "bjorck7",
    "qr_circulant",
    "petrescu",
    "dephase",
    "equivalent",
]

BJORCK7_A = -0.75 + 1j * np.sqrt(7.0) / 4.0


@dataclass(frozen=True)
class BiunitaryVerdict:
    is_biunitary: bool
    max_modulus_deviation: float
    max_unitarity_residual: float


def fourier(n):
    """Order-n Fourier biunitary: entry (i,j) = eps^(i*j)/sqrt(n), eps = e^(2*pi*i/n)."""
    if n < 1:
        raise ValueError("order must be >= 1")
    k = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def verify_biunitary(u, policy=DEFAULT_POLICY):
    """Report both residuals: flatness of entry moduli and unitarity.

    is_biunitary holds iff max| |u_ij|*sqrt(n) - 1 | <= tol_entry and
    ||U U* - I||_F <= tol_unitary.
    """
    u = as_matrix(u)
    n = u.shape[0]
    mod_dev = float(np.max(np.abs(np.abs(u) * np.sqrt(n) - 1.0)))
    uni_res = frobenius_norm(u @ u.conj().T - np.eye(n))
    ok = mod_dev <= policy.tol_entry and uni_res <= policy.tol_unitary
    return BiunitaryVerdict(ok, mod_dev, uni_res)


def circulant(row):
    """Circulant matrix S with S[i,j] = row[(j - i) mod n]."""
    row = np.asarray(row, dtype=np.complex128).ravel()
    n = row.size
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    return row[(j - i) % n]


def first_row(s):
    """Inverse of circulant(): the generating row."""
    return as_matrix(s)[0].copy()


def quadratic_residues(n):
    """The set {x^2 mod n}, 0 included."""
    return sorted({(x * x) % n for x in range(n)})


def is_prime(n):
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def _qr_row(n, a):
    row = np.full(n, a, dtype=np.complex128)
    for i in quadratic_residues(n):
        row[i] = 1.0
    return row / np.sqrt(n)


def bjorck7():
    """The order-7 quadratic-residue circulant biunitary.

    First row (1,1,1,a,1,a,a)/sqrt(7) with a = -3/4 + i*sqrt(7)/4: value 1 at
    positions {0} u QR(7) = {0,1,2,4}, a elsewhere.
    """
    return circulant(_qr_row(7, BJORCK7_A))


def qr_circulant(n, a="solve", policy=DEFAULT_POLICY):
    """Circulant with 1/sqrt(n) on the quadratic residues mod n and a/sqrt(n)
    on the rest.

    With a="solve" the unimodular value a is found numerically by locating the
    zeros of the unitarity defect over the phase of a. Raises if n is not
    prime, or if no unimodular solution exists (the final residual is
    reported); the returned matrix always passes verify_biunitary.
    """
    if not is_prime(n):
        raise ValueError(f"n={n} is not prime")
    if isinstance(a, str):
        if a != "solve":
            raise ValueError(f"unknown mode {a!r}")
        a = _solve_qr_phase(n)
    u = circulant(_qr_row(n, a))
    verdict = verify_biunitary(u, policy)
    if not verdict.is_biunitary:
        raise ValueError(
            "qr_circulant value does not give a biunitary "
            f"(modulus dev {verdict.max_modulus_deviation:.3e}, "
            f"unitarity residual {verdict.max_unitarity_residual:.3e})"
        )
    return u


def _solve_qr_phase(n, grid=4096):
    """Zeros of f(phi) = ||S(e^{i phi}) S* - I||_F^2 over the phase of a.

    f is a trigonometric polynomial; its zeros are located by bracketing the
    sign change of the analytic derivative around grid minima of f, which
    pins them to machine precision (direct minimization of the flat quadratic
    touchdown stalls near sqrt(eps)).
    """
    ones = np.zeros(n)
    ones[quadratic_residues(n)] = 1.0
    B = circulant(ones) / np.sqrt(n)
    C = circulant(1.0 - ones) / np.sqrt(n)
    base = B @ B.T + C @ C.T - np.eye(n)
    CB = C @ B.T
    BC = B @ C.T

    def defect(phi):
        r = base + np.exp(1j * phi) * CB + np.exp(-1j * phi) * BC
        return float(np.real(np.sum(r * np.conj(r))))

    def ddefect(phi):
        r = base + np.exp(1j * phi) * CB + np.exp(-1j * phi) * BC
        dr = 1j * np.exp(1j * phi) * CB - 1j * np.exp(-1j * phi) * BC
        return float(2.0 * np.real(np.sum(np.conj(r) * dr)))

    phis = np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False)
    fv = np.array([defect(p) for p in phis])
    best_phi, best_val = None, np.inf
    h = 2.0 * np.pi / grid
    for k in range(grid):
        if fv[k] <= fv[k - 1] and fv[k] <= fv[(k + 1) % grid]:
            lo, hi = phis[k] - h, phis[k] + h
            if ddefect(lo) < 0.0 < ddefect(hi):
                root = brentq(ddefect, lo, hi, xtol=1e-15)
                val = defect(root)
                if val < best_val:
                    best_phi, best_val = root, val
    if best_phi is None or best_val > 1e-18:
        raise ValueError(
            f"no unimodular circulant value found for n={n} "
            f"(best squared residual {best_val:.3e})"
        )
    return np.exp(1j * best_phi)


_PETRESCU_POWERS = np.array(
    [
        [1, 4, 5, 3, 3, 1, 0],
        [4, 1, 3, 5, 3, 1, 0],
        [5, 3, 1, 4, 1, 3, 0],
        [3, 5, 4, 1, 1, 3, 0],
        [3, 3, 1, 1, 4, 5, 0],
        [1, 1, 3, 3, 5, 4, 0],
        [0, 0, 0, 0, 0, 0, 0],
    ]
)


def petrescu(lam, policy=DEFAULT_POLICY):
    """Petrescu's 7x7 biunitary family member U(lambda), |lambda| = 1.

    Powers of w = e^(2*pi*i/6) per the classical listing; the (rows 0-1 x
    cols 0-1) block carries lambda, the (rows 2-3 x cols 2-3) block carries
    conj(lambda), the last row and column of the power table are w^0.
    """
    lam = complex(lam)
    if abs(abs(lam) - 1.0) > policy.tol_entry:
        raise ValueError(f"|lambda| = {abs(lam)} is not 1 within tolerance")
    w = np.exp(2j * np.pi / 6)
    u = w ** _PETRESCU_POWERS.astype(np.complex128)
    u[0:2, 0:2] *= lam
    u[2:4, 2:4] *= np.conj(lam)
    return u / np.sqrt(7)


def dephase(u, policy=DEFAULT_POLICY):
    """Normal form under diagonal phases: row 0 and column 0 real positive.

    Entry moduli are unchanged; idempotent. Requires a biunitary input.
    """
    u = as_matrix(u)
    if not verify_biunitary(u, policy).is_biunitary:
        raise ValueError("dephase requires a biunitary matrix")
    d2 = np.conj(u[0, :]) / np.abs(u[0, :])
    v = u * d2[None, :]
    d1 = np.conj(v[:, 0]) / np.abs(v[:, 0])
    return d1[:, None] * v


def equivalent(u, v, n_limit=8, policy=DEFAULT_POLICY):
    """Is v = D1 P1 u P2 D2 for permutations P1, P2 and unimodular diagonals?

    Decided exactly by backtracking over row/column matchings of dephased
    anchor forms, after a fail-fast filter on the phase-invariant multiset of
    closed quadruple products. Only n <= n_limit is accepted; equivalence at
    larger orders is refused rather than answered heuristically.
    """
    u = as_matrix(u)
    v = as_matrix(v)
    n = u.shape[0]
    if v.shape[0] != n:
        return False
    if n > n_limit:
        raise ValueError(f"order {n} exceeds n_limit={n_limit}")
    tol = max(policy.tol_entry, 1e-12)

    if _haagerup_distance(u, v) > 10.0 * tol:
        return False

    C = dephase(v, policy)
    rest = list(range(n))
    for r in range(n):
        rows = [r] + [i for i in rest if i != r]
        for c in range(n):
            cols = [c] + [j for j in rest if j != c]
            B = dephase(u[np.ix_(rows, cols)], policy)
            if _match_fixing_zero(B, C, tol):
                return True
    return False


def _haagerup_distance(u, v):
    """Separation of the closed-quadruple invariants u_ij u_kl conj(u_il u_kj).

    The multiset of these products is invariant under both equivalence moves.
    Sorted real and imaginary marginals are compared (sorting reals is
    1-Lipschitz, so near-ties cannot flip the answer); a gap well above
    tolerance certifies inequivalence cheaply.
    """

    def quads(x):
        g = np.einsum("ij,kl->ikjl", x, x) * np.conj(np.einsum("il,kj->ikjl", x, x))
        return g.ravel()

    qu, qv = quads(u), quads(v)
    return max(
        float(np.max(np.abs(np.sort(qu.real) - np.sort(qv.real)))),
        float(np.max(np.abs(np.sort(qu.imag) - np.sort(qv.imag)))),
    )


def _fuzzy_key(row, tol):
    dec = max(0, int(round(-np.log10(tol))) - 2)
    return tuple(sorted((round(z.real, dec), round(z.imag, dec)) for z in row))


def _match_fixing_zero(b, c, tol):
    """Exists row perm pi and col perm sigma with pi(0)=0, sigma(0)=0 and
    b[pi,sigma] == c entrywise within tol? Backtracking over rows with
    multiset pruning, then over column matchings."""
    n = b.shape[0]
    keyb = [_fuzzy_key(b[i], tol) for i in range(n)]
    keyc = [_fuzzy_key(c[i], tol) for i in range(n)]
    cand = [[0] if i == 0 else [j for j in range(1, n) if keyb[j] == keyc[i]]
            for i in range(n)]
    if any(not x for x in cand):
        return False
    used = [False] * n
    assign = []

    def cols_match():
        bp = b[assign, :]
        colcand = []
        for j in range(n):
            cc = [jj for jj in range(n)
                  if np.max(np.abs(bp[:, jj] - c[:, j])) < tol]
            if not cc:
                return False
            colcand.append(cc)
        order = sorted(range(n), key=lambda j: len(colcand[j]))
        usedc = [False] * n

        def bt(t):
            if t == n:
                return True
            for jj in colcand[order[t]]:
                if not usedc[jj]:
                    usedc[jj] = True
                    if bt(t + 1):
                        return True
                    usedc[jj] = False
            return False

        return bt(0)

    def partial_cols_ok():
        bp = b[assign, :]
        cp = c[: len(assign), :]
        for j in range(n):
            if not any(np.max(np.abs(bp[:, jj] - cp[:, j])) < tol for jj in range(n)):
                return False
        return True

    def bt_rows(i):
        if i == n:
            return cols_match()
        for j in cand[i]:
            if not used[j]:
                used[j] = True
                assign.append(j)
                if partial_cols_ok() and bt_rows(i + 1):
                    return True
                assign.pop()
                used[j] = False
        return False

    return bt_rows(0)
