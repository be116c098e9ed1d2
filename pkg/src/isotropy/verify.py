"""Verification suites shared by the CLI and the acceptance tests.

Each suite yields ``Check`` records; a run passes iff every record does.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .densities import (
    IDENTITIES,
    DeltaKey,
    DensityTable,
    delta_closed,
    delta_recursive,
    pi,
    rho_closed,
    verify_appendix_identity,
    verify_symmetry,
)
from .fpforms import conditioned_census
from .kovaleva import rho_via_invariants
from .qp import hilbert_by_search, hilbert_symbol, square_class_reps
from .ratfun import rf_eval, rf_laurent_at_infinity

CENSUS_QUICK = [(2, 2), (2, 3), (3, 2), (3, 3), (5, 2), (7, 2)]
CENSUS_FULL = [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (3, 4), (5, 2), (5, 3), (7, 2)]


@dataclass(frozen=True)
class Check:
    suite: str
    label: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        s = f"{'PASS' if self.ok else 'FAIL'} {self.suite} {self.label}"
        return f"{s} {self.detail}".rstrip()


def solver_checks(ks=range(1, 5), n_max: int = 12) -> Iterator[Check]:
    """Recursion solver against the closed forms."""
    table = DensityTable()
    for k in ks:
        for i in range(3):
            for j in range(3):
                for n in range(i + j, n_max + 1):
                    ok = delta_recursive(DeltaKey(i, k, 0, j, n), table) == delta_closed(i, j, k, n)
                    yield Check("solver", f"i={i} j={j} k={k} n={n}", ok)


def symmetry_checks(ks=range(1, 5), n_max: int = 12) -> Iterator[Check]:
    for k in ks:
        for i, j, n, ok in verify_symmetry(k, range(n_max + 1)):
            yield Check("symmetry", f"i={i} j={j} k={k} n={n}", ok)


def identity_checks(n_max: int = 12, names=None) -> Iterator[Check]:
    for name in names or IDENTITIES:
        for res in verify_appendix_identity(name, range(n_max + 1)):
            yield Check("identities", f"{name} n={res.n}", res.ok, res.detail)


def census_checks(pairs=CENSUS_FULL, workers: int | None = None) -> Iterator[Check]:
    """pi_0, pi_1, pi_2 against exhaustive class counts over F_p."""
    for p, n in pairs:
        censuses = conditioned_census(p, n, workers)
        for i, census in enumerate(censuses):
            total = sum(census.values())
            bad = []
            for l in range(n // 2 + 1):
                for m in range(3):
                    if 2 * l + m > n:
                        continue
                    got = Fraction(census.get((l, m, n), 0), total)
                    want = rf_eval(pi(i, l, m, n), p)
                    if got != want:
                        bad.append(f"[{l},{m},{n}] count={got} formula={want}")
            yield Check("census", f"p={p} n={n} pi{i}", not bad, "; ".join(bad))


def hilbert_checks(primes=(2, 3, 5, 7)) -> Iterator[Check]:
    for p in primes:
        bad = []
        reps = square_class_reps(p)
        for a in reps:
            for b in reps:
                if hilbert_symbol(a, b, p) != hilbert_by_search(a, b, p):
                    bad.append(f"({a},{b})")
        yield Check("hilbert", f"p={p} pairs={len(reps) ** 2}", not bad, " ".join(bad))


def kovaleva_checks(primes=(3, 5, 7, 11, 13), ks=range(1, 4)) -> Iterator[Check]:
    for p in primes:
        for k in ks:
            for n in (2 * k, 2 * k + 1, 2 * k + 2):
                a, b = rho_via_invariants(k, n, p), rf_eval(rho_closed(k, n), p)
                yield Check("kovaleva", f"p={p} k={k} n={n}", a == b, f"{a} vs {b}" if a != b else "")


ASYMPTOTIC_HEADS = {
    0: [Fraction(1, 2)],
    1: [Fraction(1), Fraction(-1, 2)],
    2: [Fraction(1), Fraction(0), Fraction(0), Fraction(-1, 4)],
}


def asymptotic_checks(ks=range(1, 5)) -> Iterator[Check]:
    for k in ks:
        for extra, head in ASYMPTOTIC_HEADS.items():
            n = 2 * k + extra
            got = rf_laurent_at_infinity(rho_closed(k, n), max(1, len(head) - 1))[: len(head)]
            ok = got == head
            yield Check("asymptotic", f"k={k} n={n}", ok, "" if ok else f"got {[str(c) for c in got]}")
