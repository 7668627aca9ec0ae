"""Command-line front end: matrix file I/O, verification and certification
with canonical JSON output, family generation, phase search, and the
end-to-end order-7 circulant reproduction.

Exit codes are uniform across subcommands:
    0   positive verdict (or successful generation)
    1   negative or inconclusive verdict
    2   usage or input error

JSON goes to stdout, diagnostics to stderr. All JSON output is canonical:
fixed key order, repr-style float formatting, no locale dependence.

Matrix files:
    CART n      header, then n rows of n "re,im" tokens (17 significant
                digits; write -> read -> write is byte-identical)
    PHASE n     header, then n rows of n real angles theta; the entry is
                (1/sqrt(n)) e^{i theta}. Exact for biunitaries.
"""

import argparse
import json
import sys

import numpy as np

from . import families, hadamard, search, spancert
from .cmatrix import DEFAULT_POLICY, NumericPolicy, mask_from_indices, numerical_rank

__all__ = ["main", "read_matrix", "write_matrix", "format_matrix", "parse_matrix"]

DET_FMT = "%.17g"


class CliError(Exception):
    """Usage or input error; maps to exit code 2."""


# --- matrix file format ---------------------------------------------------------

def _fmt(x):
    return DET_FMT % x


def format_matrix(u, fmt="cart", policy=DEFAULT_POLICY):
    """Render a matrix in CART or PHASE format."""
    u = np.asarray(u, dtype=np.complex128)
    n = u.shape[0]
    fmt = fmt.lower()
    lines = []
    if fmt == "cart":
        lines.append(f"CART {n}")
        for row in u:
            lines.append(" ".join(f"{_fmt(z.real)},{_fmt(z.imag)}" for z in row))
    elif fmt == "phase":
        dev = float(np.max(np.abs(np.abs(u) * np.sqrt(n) - 1.0)))
        if dev > policy.tol_entry:
            raise CliError(
                f"PHASE format needs flat moduli 1/sqrt(n); deviation {dev:.3e}"
            )
        lines.append(f"PHASE {n}")
        for row in u:
            lines.append(" ".join(_fmt(t) for t in np.angle(row)))
    else:
        raise CliError(f"unknown format {fmt!r}")
    return "\n".join(lines) + "\n"


def parse_matrix(text):
    """Parse CART/PHASE text into a complex matrix."""
    rows = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise CliError("empty matrix file")
    head = rows[0].split()
    if len(head) != 2 or head[0] not in ("CART", "PHASE"):
        raise CliError(f"bad header {rows[0]!r}; expected 'CART n' or 'PHASE n'")
    try:
        n = int(head[1])
    except ValueError:
        raise CliError(f"bad order in header {rows[0]!r}") from None
    if n < 1:
        raise CliError("order must be >= 1")
    if len(rows) != n + 1:
        raise CliError(f"expected {n} matrix rows, found {len(rows) - 1}")
    out = np.empty((n, n), dtype=np.complex128)
    for i, line in enumerate(rows[1:]):
        toks = line.split()
        if len(toks) != n:
            raise CliError(f"row {i}: expected {n} entries, found {len(toks)}")
        for j, tok in enumerate(toks):
            try:
                if head[0] == "CART":
                    re_s, im_s = tok.split(",")
                    out[i, j] = complex(float(re_s), float(im_s))
                else:
                    out[i, j] = np.exp(1j * float(tok)) / np.sqrt(n)
            except ValueError:
                raise CliError(f"row {i}, column {j}: bad token {tok!r}") from None
    return out


def read_matrix(path):
    """Read a matrix file; '-' reads stdin."""
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from None
    return parse_matrix(text)


def write_matrix(u, path, fmt="cart"):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_matrix(u, fmt))


# --- helpers --------------------------------------------------------------------

def _policy_from(args):
    try:
        return NumericPolicy(
            tol_entry=args.tol_entry,
            tol_unitary=args.tol_unitary,
            rank_rel_cut=args.rank_cut,
            cert_gap_min=args.cert_gap,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _add_policy_flags(p):
    p.add_argument("--tol-entry", type=float, default=DEFAULT_POLICY.tol_entry,
                   help="unimodularity tolerance")
    p.add_argument("--tol-unitary", type=float, default=DEFAULT_POLICY.tol_unitary,
                   help="unitarity / commutation tolerance")
    p.add_argument("--rank-cut", type=float, default=DEFAULT_POLICY.rank_rel_cut,
                   help="relative singular value cut for rank")
    p.add_argument("--cert-gap", type=float, default=DEFAULT_POLICY.cert_gap_min,
                   help="minimum spectral gap for a certified verdict")


def _emit(obj):
    sys.stdout.write(json.dumps(obj) + "\n")


def _parse_complex_token(tok):
    try:
        re_s, im_s = tok.split(",")
        return complex(float(re_s), float(im_s))
    except ValueError:
        raise CliError(f"bad complex token {tok!r}; expected 're,im'") from None


def _parse_index_list(tok, n):
    tok = tok.strip()
    if not tok:
        return mask_from_indices([], n)
    try:
        idx = [int(t) for t in tok.split(",")]
    except ValueError:
        raise CliError(f"bad index list {tok!r}") from None
    try:
        return mask_from_indices(idx, n)
    except ValueError as exc:
        raise CliError(str(exc)) from None


# --- subcommands ----------------------------------------------------------------

def cmd_gen(args):
    kind = args.kind
    if kind == "fourier":
        if args.n is None:
            raise CliError("gen fourier requires --n")
        if args.n < 1:
            raise CliError("order must be >= 1")
        u = hadamard.fourier(args.n)
    elif kind == "petrescu":
        lam = np.exp(1j * args.lambda_angle)
        u = hadamard.petrescu(lam)
    elif kind == "bjorck7":
        u = hadamard.bjorck7()
    elif kind == "qr-circulant":
        if args.n is None:
            raise CliError("gen qr-circulant requires --n")
        a = "solve" if args.a == "solve" else _parse_complex_token(args.a)
        try:
            u = hadamard.qr_circulant(args.n, a, _policy_from(args))
        except ValueError as exc:
            raise CliError(str(exc)) from None
    elif kind == "circulant":
        if args.row is None:
            raise CliError("gen circulant requires --row FILE")
        try:
            text = open(args.row, encoding="utf-8").read()
        except OSError as exc:
            raise CliError(f"cannot read {args.row}: {exc}") from None
        row = [_parse_complex_token(t) for t in text.split()]
        if not row:
            raise CliError("empty circulant row file")
        u = hadamard.circulant(row)
    else:  # pragma: no cover - argparse restricts choices
        raise CliError(f"unknown kind {kind!r}")
    sys.stdout.write(format_matrix(u, args.format, _policy_from(args)))
    return 0


def cmd_verify(args):
    u = read_matrix(args.file)
    v = hadamard.verify_biunitary(u, _policy_from(args))
    _emit(
        {
            "is_biunitary": v.is_biunitary,
            "max_modulus_deviation": v.max_modulus_deviation,
            "max_unitarity_residual": v.max_unitarity_residual,
        }
    )
    return 0 if v.is_biunitary else 1


def cmd_certify(args):
    u = read_matrix(args.file)
    policy = _policy_from(args)
    try:
        cert = spancert.certify_isolation(u, policy)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    _emit(cert.to_json_dict())
    return 0 if cert.verdict == spancert.ISOLATED else 1


def cmd_pairs(args):
    u = read_matrix(args.file)
    policy = _policy_from(args)
    try:
        if args.mode == "commuting":
            specs = families.find_commuting_pairs(u, policy)
        else:
            specs = families.find_block_pairs(u, policy)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    _emit([families.spec_to_json_dict(s, args.file) for s in specs])
    return 0 if specs else 1


def cmd_family(args):
    u = read_matrix(args.file)
    policy = _policy_from(args)
    try:
        doc = json.loads(open(args.spec, encoding="utf-8").read())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read spec {args.spec}: {exc}") from None
    if isinstance(doc, list):
        if not doc:
            raise CliError("spec file holds an empty list")
        doc = doc[args.index]
    try:
        spec = families.spec_from_json_dict(doc, u)
        if doc["theorem"] == "constr1":
            member = families.constr1_family(spec, args.param, policy)
        else:
            member = families.constr2_family(spec, np.exp(1j * args.param), policy)
    except (ValueError, KeyError) as exc:
        raise CliError(str(exc)) from None
    sys.stdout.write(format_matrix(member, args.format, policy))
    return 0


def cmd_search(args):
    parts = args.masks.split(";")
    if len(parts) != 4:
        raise CliError("--masks must hold four ';'-separated index lists")
    if args.n < 1:
        raise CliError("order must be >= 1")
    if args.starts < 1:
        raise CliError("--starts must be >= 1")
    masks = [_parse_index_list(p, args.n) for p in parts]
    try:
        best = None
        best_key = None
        for k in range(args.starts):
            cfg = search.SearchConfig(
                n=args.n,
                p1=masks[0],
                p2=masks[1],
                p3=masks[2],
                p4=masks[3],
                max_iters=args.max_iters,
                step0=args.step0,
                tol_obj=args.tol_obj,
                rng_seed=args.seed + k,
            )
            res = search.local_search(cfg)
            key = (res.objective, k)
            if best_key is None or key < best_key:
                best, best_key = res, key
    except ValueError as exc:
        raise CliError(str(exc)) from None
    _emit(
        {
            "n": args.n,
            "phases": [float(t) for t in best.phases.ravel()],
            "objective": best.objective,
            "iterations": best.iterations,
            "converged": best.converged,
        }
    )
    return 0 if best.converged else 1


def cmd_repro(args):
    """End-to-end order-7 circulant check: span matrix, rank + gap, reduced
    minor and |det|."""
    policy = _policy_from(args)
    u = hadamard.bjorck7()
    a = spancert.span_matrix(u)
    cert = spancert.certify_isolation(u, policy)
    m = spancert.reduced_minor(a)
    _, logdet = np.linalg.slogdet(m)
    det_abs = float(np.exp(logdet))
    mrank, mgap, _ = numerical_rank(m, policy)
    det_ok = mrank == m.shape[0] and mgap >= policy.cert_gap_min
    rank_ok = cert.rank == cert.expected and cert.gap >= policy.cert_gap_min
    print(f"order-7 quadratic-residue circulant (value {hadamard.BJORCK7_A})", file=sys.stderr)
    print(f"span matrix: {a.shape[0]}x{a.shape[1]}, rank {cert.rank} "
          f"(expected {cert.expected}), gap {cert.gap:.3e}", file=sys.stderr)
    print(f"reduced minor: {m.shape[0]}x{m.shape[0]}, |det| = {det_abs:.12e}, "
          f"full rank: {det_ok}", file=sys.stderr)
    print(f"verdict: {cert.verdict}", file=sys.stderr)
    _emit(
        {
            "matrix": "bjorck7",
            "n": cert.n,
            "rank": cert.rank,
            "expected": cert.expected,
            "gap": None if np.isinf(cert.gap) else cert.gap,
            "verdict": cert.verdict,
            "minor_order": m.shape[0],
            "abs_det_minor": det_abs,
            "minor_full_rank": det_ok,
        }
    )
    return 0 if rank_ok and det_ok else 1


# --- parser ----------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(
        prog="hadcert",
        description="Biunitary (complex Hadamard) matrices: generate, verify, "
                    "certify isolation, find and generate one-parameter families.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a built-in matrix")
    p.add_argument("kind", choices=["fourier", "petrescu", "bjorck7", "qr-circulant", "circulant"])
    p.add_argument("--n", type=int, default=None, help="order")
    p.add_argument("--lambda-angle", type=float, default=0.0,
                   help="family parameter as an angle in radians (petrescu)")
    p.add_argument("--a", type=str, default="solve",
                   help="'re,im' value or 'solve' (qr-circulant)")
    p.add_argument("--row", type=str, default=None,
                   help="file of 're,im' tokens for the first row (circulant)")
    p.add_argument("--format", choices=["cart", "phase"], default="cart")
    _add_policy_flags(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="biunitarity verdict as JSON")
    p.add_argument("file")
    _add_policy_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("certify", help="span-rank isolation certificate as JSON")
    p.add_argument("file")
    _add_policy_flags(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("pairs", help="exhaustive witness search")
    p.add_argument("file")
    p.add_argument("--mode", choices=["commuting", "block"], required=True)
    _add_policy_flags(p)
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("family", help="emit one family member from a spec file")
    p.add_argument("file", help="base matrix file")
    p.add_argument("--spec", required=True, help="JSON spec (as emitted by pairs)")
    p.add_argument("--param", type=float, required=True,
                   help="t (commuting pair) or angle of lambda (block quadruple)")
    p.add_argument("--index", type=int, default=0,
                   help="which spec when the file holds a list")
    p.add_argument("--format", choices=["cart", "phase"], default="cart")
    _add_policy_flags(p)
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("search", help="phase-descent search for block quadruple bases")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--masks", type=str, required=True,
                   help="four ';'-separated comma index lists: p1;p2;p3;p4")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--starts", type=int, default=1)
    p.add_argument("--max-iters", type=int, default=10000)
    p.add_argument("--step0", type=float, default=0.1)
    p.add_argument("--tol-obj", type=float, default=1e-10)
    _add_policy_flags(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("repro", help="order-7 circulant rank/determinant reproduction")
    _add_policy_flags(p)
    p.set_defaults(func=cmd_repro)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
