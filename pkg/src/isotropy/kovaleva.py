"""Distribution of (determinant class, Hasse invariant) of random Z_p-integral
forms for odd p, and the isotropy probabilities recombined from it.

Only the unit/non-unit split of the determinant and its Legendre symbol enter
the probabilities, so the value for a class does not depend on which
representative names it.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .fpforms import is_prime
from .qp import (
    SquareClass,
    default_digits,
    hilbert_symbol,
    invariants_fast,
    least_nonresidue,
    sample_coefficients,
    square_class,
)
from .streams import Estimate, chunk_rng, run_chunks

__all__ = [
    "InvariantCell",
    "kovaleva_prob",
    "rho_via_invariants",
    "invariant_frequency_mc",
    "class_representatives",
    "FrequencyReport",
]


@dataclass(frozen=True)
class InvariantCell:
    n: int
    d: SquareClass
    c: int

    def __post_init__(self):
        if self.c not in (1, -1):
            raise ValueError("c must be +1 or -1")
        p = self.d.p
        if p != 2 and self.d.rep not in class_representatives(p):
            raise ValueError(f"{self.d.rep} is not a canonical class representative mod {p}")


def class_representatives(p: int) -> tuple[int, int, int, int]:
    u = least_nonresidue(p)
    return (1, u, p, u * p)


def _legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def _ratio_product(p: int, d: int) -> Fraction:
    out = Fraction(1)
    for i in range(1, d + 1):
        out *= Fraction(p ** (2 * i - 1) - 1, p ** (2 * i) - 1)
    return out


def _require_odd_prime(p: int) -> None:
    if p == 2 or not is_prime(p):
        raise ValueError(f"an odd prime is required, got {p}")


def kovaleva_prob(cell: InvariantCell, p: int) -> Fraction:
    """Probability that a random n-ary Z_p-form has determinant class d and Hasse invariant c."""
    _require_odd_prime(p)
    if cell.d.p != p:
        raise ValueError("cell square class belongs to a different prime")
    n, c = cell.n, cell.c
    if n < 1:
        raise ValueError("rank must be positive")
    eps = _legendre(-1, p)
    rep = cell.d.rep
    unit = rep % p != 0
    k, odd = divmod(n, 2)
    quarter = Fraction(1, 4)
    if odd:
        prod = _ratio_product(p, k + 1)
        if unit:
            return quarter * Fraction(p, p + 1) + quarter * c * p ** (k + 1) * prod
        return quarter * Fraction(1, p + 1) + quarter * c * eps**k * prod
    if unit:
        se = _legendre(rep, p) * eps**k
        head = p**k + se
        return quarter * head * (Fraction(p ** (k + 2) - se, (p + 1) * (p ** (2 * k + 1) - 1)) + c * _ratio_product(p, k))
    return quarter * Fraction(p, p + 1) * Fraction(p ** (2 * k) - 1, p ** (2 * k + 1) - 1)


def rho_via_invariants(k: int, n: int, p: int) -> Fraction:
    """k-isotropy probability assembled from the invariant distribution."""
    _require_odd_prime(p)
    if n <= 2 * k - 1:
        return Fraction(0)
    if n >= 2 * k + 3:
        return Fraction(1)
    sign_k = (-1) ** k
    if n == 2 * k:
        # only k hyperbolic planes: d = (-1)^k, c = +1
        return kovaleva_prob(InvariantCell(n, square_class(sign_k, p), 1), p)
    if n == 2 * k + 1:
        total = Fraction(0)
        for a in class_representatives(p):
            d = square_class(sign_k * a, p)
            c = hilbert_symbol(-1, a, p) ** k
            total += kovaleva_prob(InvariantCell(n, d, c), p)
        return total
    # not k-isotropic only with k-1 planes and the anisotropic quaternary form
    d = square_class((-1) ** (k - 1), p)
    return 1 - kovaleva_prob(InvariantCell(n, d, -1), p)


# --------------------------------------------------------------------------
# empirical frequencies
# --------------------------------------------------------------------------


def _freq_chunk(p, n, digits, seed, chunk, size):
    rng = chunk_rng(seed, chunk)
    rows = sample_coefficients(rng, p, digits, size, n * (n + 1) // 2)
    tally = Counter()
    for row in rows:
        inv = invariants_fast(row, n, p)
        if inv.radical_dim:
            tally["singular"] += 1
        else:
            tally[(inv.det_class.rep, inv.hasse)] += 1
    return tally


@dataclass(frozen=True)
class FrequencyReport:
    n: int
    p: int
    digits: int
    samples: int
    seed: int
    counts: dict
    singular: int

    def frequency(self, cell: InvariantCell) -> Estimate:
        return Estimate(self.counts.get((cell.d.rep, cell.c), 0), self.samples)

    def cells(self) -> list[InvariantCell]:
        return [InvariantCell(self.n, SquareClass(self.p, d), c)
                for d in class_representatives(self.p) for c in (1, -1)]

    CSV_HEADER = "n,p,d_class,c,probability,empirical,stderr"

    def csv_rows(self) -> list[str]:
        rows = []
        for cell in self.cells():
            est = self.frequency(cell)
            prob = kovaleva_prob(cell, self.p)
            rows.append(f"{self.n},{self.p},{cell.d.label()},{cell.c},{prob},{est.value:.6f},{est.stderr:.6f}")
        return rows


def invariant_frequency_mc(n: int, p: int, digits: int | None = None, samples: int = 10**5,
                           seed: int = 0, workers: int | None = None) -> FrequencyReport:
    """Tabulate (det class, Hasse invariant) over sampled forms; singular samples counted apart."""
    _require_odd_prime(p)
    digits = digits or default_digits(p)
    total = Counter()
    for part in run_chunks(_freq_chunk, (p, n, digits), samples, seed, workers):
        total.update(part)
    singular = total.pop("singular", 0)
    return FrequencyReport(n, p, digits, samples, seed, dict(sorted(total.items())), singular)
