"""Global isotropy densities.

The local factors at finite primes come from the closed forms and are
multiplied exactly up to a prime bound, with a certified lower bound on the
remaining tail.  The real factor is estimated by sampling forms with
coefficients on a dyadic grid in [-1, 1] and reading off their inertia.

Grid coefficients are ``u / 2**52 - 1`` with ``u`` an integer in
``[0, 2**53]``; these are exact doubles, so the float matrix handed to the
eigenvalue routine *is* the sampled form.  Eigenvalues that are clear of zero
by a wide margin give the signature directly (Sylvester); anything closer is
redone by exact rational elimination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .densities import rho_closed
from .qp import ZForm, diagonalize
from .ratfun import ONE, Polynomial, count_real_roots, rf_eval
from .streams import Estimate, chunk_rng, run_chunks

__all__ = [
    "primes_up_to",
    "EulerProductResult",
    "euler_product",
    "certify_tail_constant",
    "TAIL_CONSTANT",
    "inertia",
    "real_k_isotropic",
    "rho_infinity_mc",
    "InfinityEstimate",
    "GlobalEstimate",
    "rho_global",
    "reference_table",
    "REFERENCE_VALUES",
]

TAIL_CONSTANT = Fraction(1, 2)
GRID_BITS = 52

# printed values of the reference table: (prod_p, rho_inf, rho_glob)
REFERENCE_VALUES = {
    1: ("0.98743625", "0.9823", "0.9699"),
    2: ("0.98229463", "0.9705", "0.9533"),
    3: ("0.98007620", "0.9623", "0.9431"),
    4: ("0.97906880", "0.9561", "0.9361"),
    5: ("0.97859528", "0.9512", "0.9309"),
}


def primes_up_to(bound: int) -> list[int]:
    if bound < 2:
        return []
    sieve = np.ones(bound + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(bound) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.flatnonzero(sieve).tolist()


def _tree_product(xs: list[int]) -> int:
    if not xs:
        return 1
    while len(xs) > 1:
        xs = [xs[i] * xs[i + 1] if i + 1 < len(xs) else xs[i] for i in range(0, len(xs), 2)]
    return xs[0]


# --------------------------------------------------------------------------
# Euler product
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EulerProductResult:
    k: int
    n: int
    prime_bound: int
    partial_product: Fraction
    tail_lower_bound: Fraction
    degenerate: bool = False

    def __post_init__(self):
        lo, part = self.tail_lower_bound, self.partial_product
        if not (0 <= lo <= 1 and 0 <= part <= 1):
            raise ValueError("product and tail bound must lie in [0, 1]")

    @property
    def lower(self) -> Fraction:
        return self.partial_product * self.tail_lower_bound

    @property
    def upper(self) -> Fraction:
        return self.partial_product

    def contains(self, value: Fraction) -> bool:
        return self.lower <= value <= self.upper

    def decimal(self, places: int = 8) -> str:
        return _round_decimal(self.partial_product, places)


def _round_decimal(x: Fraction, places: int) -> str:
    scaled = x * 10**places
    q = math.floor(scaled + Fraction(1, 2))
    sign = "-" if q < 0 else ""
    q = abs(q)
    whole, frac = divmod(q, 10**places)
    return f"{sign}{whole}.{frac:0{places}d}" if places else f"{sign}{whole}"


def certify_tail_constant(k: int, C: Fraction = TAIL_CONSTANT, start: int = 2) -> bool:
    """True iff 0 <= p^3 (1 - rho_p(k, 2k+2)) <= C for every real p >= start.

    Decided with Sturm sequences on the cleared numerators, so the statement
    covers all primes at once.
    """
    f = rho_closed(k, 2 * k + 2)
    num, den = f.num, f.den
    if count_real_roots(den, start, math.inf) or den(start) == 0:
        return False
    sgn = 1 if den(start) > 0 else -1
    cube = Polynomial([0, 0, 0, 1])
    gap = den - num  # (1 - rho) * den
    upper = Polynomial([C]) * den - cube * gap
    for poly in (gap, upper):
        if poly.is_zero():
            continue
        if count_real_roots(poly, start, math.inf) or sgn * poly(start) < 0:
            return False
    return True


def euler_product(k: int, n: int, prime_bound: int, C: Fraction = TAIL_CONSTANT) -> EulerProductResult:
    """Exact product of rho_p(k, n) over p <= prime_bound, with a tail bracket.

    Only n = 2k+2 has a nontrivial tail; below that the product diverges to 0
    and above it every factor equals 1.
    """
    if k < 1 or prime_bound < 2:
        raise ValueError("need k >= 1 and prime_bound >= 2")
    if n <= 2 * k + 1:
        return EulerProductResult(k, n, prime_bound, Fraction(0), Fraction(0), degenerate=True)
    f = rho_closed(k, n)
    if f == ONE:
        return EulerProductResult(k, n, prime_bound, Fraction(1), Fraction(1))
    vals = [rf_eval(f, p) for p in primes_up_to(prime_bound)]
    partial = Fraction(_tree_product([v.numerator for v in vals]), _tree_product([v.denominator for v in vals]))
    # prod_{p>B}(1 - C p^-3) >= 1 - C sum_{m>B} m^-3 >= 1 - C / (2 B^2)
    tail = 1 - C / (2 * prime_bound**2)
    return EulerProductResult(k, n, prime_bound, partial, max(tail, Fraction(0)))


# --------------------------------------------------------------------------
# real place
# --------------------------------------------------------------------------


def inertia(Q: ZForm) -> tuple[int, int, int]:
    """(n_plus, n_minus, n_zero) by exact rational elimination."""
    diag, rad = diagonalize(Q)
    pos = sum(1 for a in diag if a > 0)
    return pos, len(diag) - pos, rad


def real_k_isotropic(sig: tuple[int, int, int], k: int) -> bool:
    pos, neg, zero = sig
    return min(pos, neg) + zero >= k


def _grid_matrices(u: np.ndarray, n: int) -> np.ndarray:
    """Symmetric matrices of the forms with coefficients u / 2^52 - 1."""
    a = u.astype(np.float64) / 2.0**GRID_BITS - 1.0
    iu = np.triu_indices(n)
    m = np.zeros((u.shape[0], n, n))
    m[:, iu[0], iu[1]] = a
    off = iu[0] != iu[1]
    m[:, iu[0][off], iu[1][off]] *= 0.5
    m[:, iu[1][off], iu[0][off]] = m[:, iu[0][off], iu[1][off]]
    return m


def _rho_inf_chunk(k, n, margin, seed, chunk, size):
    rng = chunk_rng(seed, chunk)
    u = rng.integers(0, 2**53 + 1, size=(size, n * (n + 1) // 2), dtype=np.int64)
    mats = _grid_matrices(u, n)
    eig = np.linalg.eigvalsh(mats)
    scale = np.linalg.norm(mats, axis=(1, 2))
    pos = (eig > 0).sum(axis=1)
    neg = n - pos
    hits = (np.minimum(pos, neg) >= k)
    unsure = (np.abs(eig) <= margin * scale[:, None]).any(axis=1)
    fallbacks = 0
    for idx in np.flatnonzero(unsure):
        fallbacks += 1
        coeffs = (u[idx] - 2**GRID_BITS).tolist()
        hits[idx] = real_k_isotropic(inertia(ZForm(n, tuple(coeffs))), k)
    return int(hits.sum()), fallbacks


@dataclass(frozen=True)
class InfinityEstimate:
    k: int
    n: int
    samples: int
    seed: int
    hits: int
    exact_fallbacks: int

    @property
    def estimate(self) -> float:
        return Estimate(self.hits, self.samples).value

    @property
    def stderr(self) -> float:
        return Estimate(self.hits, self.samples).stderr


def rho_infinity_mc(k: int, n: int, samples: int = 10**6, seed: int = 0, workers: int | None = None,
                    margin: float = 1e-9) -> InfinityEstimate:
    """Fraction of grid forms in [-1,1]^d that have a k-dimensional isotropic subspace over R."""
    if samples < 1:
        raise ValueError("samples must be positive")
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    parts = run_chunks(_rho_inf_chunk, (k, n, margin), samples, seed, workers)
    return InfinityEstimate(k, n, samples, seed, sum(h for h, _ in parts), sum(f for _, f in parts))


# --------------------------------------------------------------------------
# global density
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GlobalEstimate:
    k: int
    n: int
    value: float
    stderr: float
    tail_error: float
    euler: EulerProductResult | None
    infinity: InfinityEstimate | None

    @property
    def error_budget(self) -> float:
        return 4 * self.stderr + self.tail_error


def rho_global(k: int, n: int, prime_bound: int = 10**4, samples: int = 10**6, seed: int = 0,
               workers: int | None = None) -> GlobalEstimate:
    """rho_inf * prod_p rho_p, with statistical and tail errors kept apart."""
    if n <= 2 * k + 1:
        return GlobalEstimate(k, n, 0.0, 0.0, 0.0, None, None)
    euler = euler_product(k, n, prime_bound)
    inf = rho_infinity_mc(k, n, samples, seed, workers)
    part = float(euler.partial_product)
    value = inf.estimate * part
    tail = value * float(1 - euler.tail_lower_bound)
    return GlobalEstimate(k, n, value, inf.stderr * part, tail, euler, inf)


# --------------------------------------------------------------------------
# reference table
# --------------------------------------------------------------------------

TABLE_COLUMNS = ["k", "prod_p", "prod_p_lower", "prod_p_upper", "rho_inf", "rho_inf_stderr",
                 "rho_glob", "rho_glob_stderr", "rho_glob_tail_error"]


def reference_table(samples: int = 10**6, seed: int = 0, prime_bound: int = 10**4, ks=range(1, 6),
                    workers: int | None = None) -> list[dict]:
    rows = []
    for k in ks:
        g = rho_global(k, 2 * k + 2, prime_bound, samples, seed, workers)
        e = g.euler
        rows.append({
            "k": k,
            "prod_p": e.decimal(8),
            "prod_p_lower": _round_decimal(e.lower, 10),
            "prod_p_upper": _round_decimal(e.upper, 10),
            "rho_inf": f"{g.infinity.estimate:.6f}",
            "rho_inf_stderr": f"{g.infinity.stderr:.6f}",
            "rho_glob": f"{g.value:.6f}",
            "rho_glob_stderr": f"{g.stderr:.6f}",
            "rho_glob_tail_error": f"{g.tail_error:.2e}",
        })
    return rows


def table_csv(rows: list[dict]) -> str:
    lines = [",".join(TABLE_COLUMNS)]
    lines += [",".join(str(r[c]) for c in TABLE_COLUMNS) for r in rows]
    return "\n".join(lines)


def table_markdown(rows: list[dict]) -> str:
    lines = ["| " + " | ".join(TABLE_COLUMNS) + " |", "|" + "---|" * len(TABLE_COLUMNS)]
    lines += ["| " + " | ".join(str(r[c]) for c in TABLE_COLUMNS) + " |" for r in rows]
    return "\n".join(lines)
