"""Command-line entry point: ``isotropy <command> ...``.

Exit status is 0 on success, 1 when a verification reports a failure and 2
for usage errors (bad flags, malformed form literals, non-prime moduli).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction

from . import densities, fpforms, global_density, kovaleva, qp, verify
from .ratfun import render, rf_eval
from .streams import THREADS_ENV


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    samples: int = 10**5
    digits: int = 0
    prime_bound: int = 10**4
    output_format: str = "plain"

    def __post_init__(self):
        if self.samples < 1:
            raise UsageError("--samples must be at least 1")
        if self.prime_bound < 2:
            raise UsageError("--prime-bound must be at least 2")
        if not 0 <= self.seed < 2**64:
            raise UsageError("--seed must fit in 64 bits")


class Out:
    """Writes rows in the selected format; plain rows are joined by spaces."""

    def __init__(self, fmt: str, stream=None):
        self.fmt = fmt
        self.stream = stream or sys.stdout

    def text(self, line: str):
        if self.fmt == "plain":
            print(line, file=self.stream)

    def config(self, cfg: RunConfig):
        d = asdict(cfg)
        if self.fmt == "json-lines":
            print(json.dumps({"config": d}, sort_keys=True), file=self.stream)
        else:
            print("# config " + " ".join(f"{k}={v}" for k, v in d.items()), file=self.stream)

    def table(self, header: list[str], rows: list[list], plain=None):
        if self.fmt == "csv":
            print(",".join(header), file=self.stream)
            for r in rows:
                print(",".join(str(x) for x in r), file=self.stream)
        elif self.fmt == "json-lines":
            for r in rows:
                print(json.dumps(dict(zip(header, [_jsonable(x) for x in r])), sort_keys=True), file=self.stream)
        else:
            for r in rows:
                print(plain(r) if plain else " ".join(str(x) for x in r), file=self.stream)


def _jsonable(x):
    if isinstance(x, (bool, int, float)) or x is None:
        return x
    return str(x)


def _prime(text: str) -> int:
    try:
        p = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if not fpforms.is_prime(p):
        raise argparse.ArgumentTypeError(f"{p} is not prime")
    return p


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


# --------------------------------------------------------------------------
# exact commands
# --------------------------------------------------------------------------


def _function_rows(f, at, out: Out, key: dict):
    header = [*key, "at", "value"]
    rows = [[*key.values(), "p", render(f)]]
    rows += [[*key.values(), p, rf_eval(f, p)] for p in at]

    def plain(r):
        return r[-1] if r[-2] == "p" else f"p={r[-2]}: {r[-1]}"

    out.table(header, rows, plain)


def cmd_rho_p(a, out):
    if a.k < 1 or a.n < 1:
        raise UsageError("need --k >= 1 and --n >= 1")
    _function_rows(densities.rho_closed(a.k, a.n), a.at, out, {"k": a.k, "n": a.n})


def cmd_delta(a, out):
    try:
        f = densities.delta_closed(a.i, a.j, a.k, a.n)
    except ValueError as e:
        raise UsageError(str(e)) from None
    _function_rows(f, a.at, out, {"i": a.i, "j": a.j, "k": a.k, "n": a.n})


def cmd_pi(a, out):
    try:
        f = densities.pi(a.i, a.l, a.m, a.n)
    except ValueError as e:
        raise UsageError(str(e)) from None
    _function_rows(f, a.at, out, {"i": a.i, "l": a.l, "m": a.m, "n": a.n})


def _literal(text: str, p: int | None):
    try:
        lp, n, coeffs = fpforms.parse_form_literal(text)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if lp is not None and not fpforms.is_prime(lp):
        raise UsageError(f"{lp} is not prime")
    if lp is not None and p is not None and lp != p:
        raise UsageError(f"literal prime {lp} disagrees with --p {p}")
    return lp or p, n, coeffs


def cmd_witt_class(a, out):
    p, n, coeffs = _literal(a.form, a.p)
    if p is None:
        raise UsageError("give the prime in the literal (p=..;) or with --p")
    wc = fpforms.witt_class(fpforms.FpForm(p, n, coeffs))
    out.table(["p", "l", "m", "n", "radical_dim"], [[p, wc.l, wc.m, wc.n, wc.radical_dim]],
              lambda r: f"[{r[1]},{r[2]},{r[3]}] radical_dim={r[4]}")


def cmd_qp_invariants(a, out):
    _, n, coeffs = _literal(a.form, a.p)
    Q = qp.ZForm(n, coeffs)
    inv = qp.qp_invariants(Q, a.p)
    w = qp.witt_index(inv, a.p)
    row = [a.p, inv.rank, inv.det_class.rep, inv.hasse, inv.radical_dim, w]
    out.table(["p", "rank", "det_class", "hasse", "radical_dim", "witt_index"], [row],
              lambda r: f"rank={r[1]} det_class={r[2]} hasse={r[3]:+d} radical_dim={r[4]} witt_index={r[5]}")


def cmd_k_isotropic(a, out):
    _, n, coeffs = _literal(a.form, a.p)
    ans = qp.k_isotropic(qp.ZForm(n, coeffs), a.p, a.k)
    out.table(["p", "k", "k_isotropic"], [[a.p, a.k, str(ans).lower()]], lambda r: r[2])


def cmd_euler_product(a, out):
    r = global_density.euler_product(a.k, a.n, a.prime_bound)
    rows = [[a.k, a.n, a.prime_bound, r.partial_product, r.tail_lower_bound, r.decimal(8), int(r.degenerate)]]
    header = ["k", "n", "B", "partial_product", "tail_lower_bound", "partial_product_8dp", "degenerate"]

    def plain(row):
        if r.degenerate:
            return f"degenerate: product over all primes is 0 for n <= 2k+1 (k={a.k}, n={a.n})"
        lo = global_density._round_decimal(r.lower, 10)
        hi = global_density._round_decimal(r.upper, 10)
        return f"partial={row[5]} bracket=[{lo}, {hi}] B={a.prime_bound}"

    out.table(header, rows, plain)


# --------------------------------------------------------------------------
# sampling commands
# --------------------------------------------------------------------------


def _cfg(a, digits=0, prime_bound=10**4) -> RunConfig:
    return RunConfig(a.seed, a.samples, digits, prime_bound, a.format)


def cmd_mc_rho(a, out):
    digits = a.digits or qp.default_digits(a.p)
    out.config(_cfg(a, digits))
    r = qp.mc_rho(a.p, a.k, a.n, digits, a.samples, a.seed, a.workers)
    exact = rf_eval(densities.rho_closed(a.k, a.n), a.p)
    header = ["p", "k", "n", "N", "samples", "seed", "estimate", "stderr", "exact"]
    row = [a.p, a.k, a.n, digits, a.samples, a.seed, f"{r.estimate:.6f}", f"{r.stderr:.6f}", exact]
    out.table(header, [row], lambda r_: f"estimate={r_[6]} stderr={r_[7]} exact={r_[8]}")


def cmd_kovaleva(a, out):
    if a.p == 2:
        raise UsageError("the invariant distribution is implemented for odd p only")
    digits = a.digits or qp.default_digits(a.p)
    if a.samples and a.empirical:
        out.config(_cfg(a, digits))
        rep = kovaleva.invariant_frequency_mc(a.n, a.p, digits, a.samples, a.seed, a.workers)
        rows = [r.split(",") for r in rep.csv_rows()]
        out.table(rep.CSV_HEADER.split(","), rows,
                  lambda r: f"d={r[2]} c={r[3]:>2} prob={r[4]} empirical={r[5]} stderr={r[6]}")
        return
    rows = []
    for d in kovaleva.class_representatives(a.p):
        for c in (1, -1):
            cell = kovaleva.InvariantCell(a.n, qp.SquareClass(a.p, d), c)
            rows.append([a.n, a.p, cell.d.label(), c, kovaleva.kovaleva_prob(cell, a.p)])
    out.table(["n", "p", "d_class", "c", "probability"], rows,
              lambda r: f"d={r[2]} c={r[3]:+d} prob={r[4]}")


def cmd_rho_infinity(a, out):
    out.config(_cfg(a))
    r = global_density.rho_infinity_mc(a.k, a.n, a.samples, a.seed, a.workers)
    row = [a.k, a.n, a.samples, a.seed, f"{r.estimate:.6f}", f"{r.stderr:.6f}", r.exact_fallbacks]
    out.table(["k", "n", "samples", "seed", "estimate", "stderr", "exact_fallbacks"], [row],
              lambda r_: f"estimate={r_[4]} stderr={r_[5]}")


def cmd_table(a, out):
    if not a.remark:
        raise UsageError("only `table --remark` is available")
    out.config(_cfg(a, prime_bound=a.prime_bound))
    rows = global_density.reference_table(a.samples, a.seed, a.prime_bound, workers=a.workers)
    if a.format == "plain":
        print(global_density.table_markdown(rows), file=out.stream)
    else:
        cols = global_density.TABLE_COLUMNS
        out.table(cols, [[r[c] for c in cols] for r in rows])


# --------------------------------------------------------------------------
# verification
# --------------------------------------------------------------------------


def _suite(a):
    quick = a.tier == "quick"
    ks = [a.k] if a.k else range(1, 3 if quick else 5)
    n_max = a.n_max if a.n_max is not None else (8 if quick else 12)
    if a.suite == "identities":
        return verify.identity_checks(n_max)
    if a.suite == "symmetry":
        return verify.symmetry_checks(ks, n_max)
    if a.suite == "solver":
        return verify.solver_checks(ks, n_max)
    if a.suite == "census":
        return verify.census_checks(verify.CENSUS_QUICK if quick else verify.CENSUS_FULL, a.workers)
    if a.suite == "hilbert":
        return verify.hilbert_checks((2, 3) if quick else (2, 3, 5, 7))
    if a.suite == "kovaleva":
        return verify.kovaleva_checks()
    return verify.asymptotic_checks(ks)


def cmd_verify(a, out):
    failed = 0
    rows = []
    for chk in _suite(a):
        failed += not chk.ok
        rows.append(["PASS" if chk.ok else "FAIL", chk.suite, chk.label, chk.detail])
    rows.append(["FAIL" if failed else "PASS", a.suite, f"summary checks={len(rows)} failed={failed}", ""])
    out.table(["status", "suite", "check", "detail"], rows, lambda r: " ".join(x for x in r if x))
    return 1 if failed else 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="isotropy", description="Isotropy densities of random quadratic forms.")
    ap.add_argument("--format", choices=["plain", "csv", "json-lines"], default="plain")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        sp.add_argument("--format", choices=["plain", "csv", "json-lines"], default=argparse.SUPPRESS)
        return sp

    def sampling(sp, samples=10**5):
        sp.add_argument("--samples", type=_positive, default=samples)
        sp.add_argument("--seed", type=_nonneg, default=0)
        sp.add_argument("--workers", type=_positive, default=None,
                        help=f"worker processes (default from {THREADS_ENV}, else 1)")

    sp = add("rho-p", cmd_rho_p, "closed-form k-isotropy probability over Q_p")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--at", type=_prime, nargs="*", default=[])

    sp = add("delta", cmd_delta, "closed-form delta_i(k; 0, j, n)")
    for f in ("--i", "--j", "--k", "--n"):
        sp.add_argument(f, type=_nonneg, required=True)
    sp.add_argument("--at", type=_prime, nargs="*", default=[])

    sp = add("pi", cmd_pi, "class probability pi_i(l, m, n) over F_p")
    for f in ("--i", "--l", "--m", "--n"):
        sp.add_argument(f, type=_nonneg, required=True)
    sp.add_argument("--at", type=_prime, nargs="*", default=[])

    sp = add("witt-class", cmd_witt_class, "class [l,m,n] of a form over F_p")
    sp.add_argument("form")
    sp.add_argument("--p", type=_prime, default=None)

    sp = add("qp-invariants", cmd_qp_invariants, "rank, determinant class, Hasse invariant over Q_p")
    sp.add_argument("form")
    sp.add_argument("--p", type=_prime, required=True)

    sp = add("k-isotropic", cmd_k_isotropic, "decide k-isotropy over Q_p")
    sp.add_argument("form")
    sp.add_argument("--p", type=_prime, required=True)
    sp.add_argument("--k", type=_nonneg, required=True)

    sp = add("mc-rho", cmd_mc_rho, "Monte Carlo estimate of rho_p(k, n)")
    sp.add_argument("--p", type=_prime, required=True)
    sp.add_argument("--k", type=_positive, required=True)
    sp.add_argument("--n", type=_positive, required=True)
    sp.add_argument("--digits", type=_nonneg, default=0, help="p-adic digits per coefficient (0: default)")
    sampling(sp)

    sp = add("kovaleva", cmd_kovaleva, "distribution of (det class, Hasse invariant), odd p")
    sp.add_argument("--p", type=_prime, required=True)
    sp.add_argument("--n", type=_positive, required=True)
    sp.add_argument("--empirical", action="store_true", help="also sample and tabulate frequencies")
    sp.add_argument("--digits", type=_nonneg, default=0)
    sampling(sp)

    sp = add("verify", cmd_verify, "run a verification suite")
    sp.add_argument("suite", choices=["identities", "symmetry", "census", "hilbert", "solver", "kovaleva", "asymptotic"])
    sp.add_argument("--tier", choices=["quick", "full"], default="quick")
    sp.add_argument("--k", type=_positive, default=None)
    sp.add_argument("--n-max", type=_nonneg, default=None)
    sp.add_argument("--workers", type=_positive, default=None)

    sp = add("euler-product", cmd_euler_product, "product of rho_p over primes up to a bound")
    sp.add_argument("--k", type=_positive, required=True)
    sp.add_argument("--n", type=_positive, required=True)
    sp.add_argument("--prime-bound", type=int, default=10**4)

    sp = add("rho-infinity", cmd_rho_infinity, "Monte Carlo estimate of the real density")
    sp.add_argument("--k", type=_positive, required=True)
    sp.add_argument("--n", type=_positive, required=True)
    sampling(sp, 10**6)

    sp = add("table", cmd_table, "reference table of global densities")
    sp.add_argument("--remark", action="store_true")
    sp.add_argument("--prime-bound", type=int, default=10**4)
    sampling(sp, 10**6)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    out = Out(a.format)
    if getattr(a, "prime_bound", 2) < 2:
        ap.error("--prime-bound must be at least 2")
    try:
        status = a.fn(a, out)
    except (UsageError, ValueError) as e:
        print(f"isotropy {a.command}: error: {e}", file=sys.stderr)
        return 2
    return status or 0


if __name__ == "__main__":
    sys.exit(main())
