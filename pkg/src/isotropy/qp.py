"""Quadratic forms over Q_p: square classes, Hilbert symbols, Hasse invariants,
Witt index, and exact k-isotropy decisions for integral forms.

The k-isotropy decision rests on the classification of regular forms over Q_p
by (rank, determinant square class, Hasse invariant), with the Hasse
invariant taken as ``prod_{i<j} (a_i, a_j)`` over a diagonalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .fpforms import is_prime, parse_form_literal
from .streams import Estimate, chunk_rng, run_chunks

__all__ = [
    "ZForm",
    "SquareClass",
    "QpInvariants",
    "valuation",
    "least_nonresidue",
    "square_class",
    "hilbert_symbol",
    "hilbert_by_search",
    "square_class_reps",
    "diagonalize",
    "hasse_invariant",
    "qp_invariants",
    "is_isotropic",
    "witt_index",
    "k_isotropic",
    "k_isotropic_fast",
    "mc_rho",
    "MCResult",
    "default_digits",
    "sample_coefficients",
]


@dataclass(frozen=True)
class ZForm:
    """Integral quadratic form sum_{i<=j} a_ij x_i x_j."""

    n: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.n * (self.n + 1) // 2:
            raise ValueError(f"need {self.n * (self.n + 1) // 2} coefficients for n={self.n}")
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))

    @classmethod
    def parse(cls, text: str) -> "ZForm":
        _, n, coeffs = parse_form_literal(text)
        return cls(n, coeffs)

    @classmethod
    def diagonal(cls, entries: Sequence[int]) -> "ZForm":
        n = len(entries)
        coeffs = [entries[i] if i == j else 0 for i in range(n) for j in range(i, n)]
        return cls(n, tuple(coeffs))

    def matrix(self) -> list[list[Fraction]]:
        """Symmetric M with Q(x) = x^T M x."""
        n = self.n
        m = [[Fraction(0)] * n for _ in range(n)]
        it = iter(self.coeffs)
        for i in range(n):
            for j in range(i, n):
                c = next(it)
                if i == j:
                    m[i][i] = Fraction(c)
                else:
                    m[i][j] = m[j][i] = Fraction(c, 2)
        return m

    def gram2(self) -> list[list[int]]:
        """Integer matrix 2M (even diagonal)."""
        n = self.n
        g = [[0] * n for _ in range(n)]
        it = iter(self.coeffs)
        for i in range(n):
            for j in range(i, n):
                c = next(it)
                if i == j:
                    g[i][i] = 2 * c
                else:
                    g[i][j] = g[j][i] = c
        return g

    def __call__(self, x: Sequence) -> int:
        it = iter(self.coeffs)
        s = 0
        for i in range(self.n):
            for j in range(i, self.n):
                s += next(it) * x[i] * x[j]
        return s

    def substitute(self, T: Sequence[Sequence[int]]) -> "ZForm":
        """x -> Q(T x)."""
        n = self.n
        m = self.matrix()
        cols = range(len(T[0]))
        new = [[sum(T[a][i] * m[a][b] * T[b][j] for a in range(n) for b in range(n)) for j in cols] for i in cols]
        k = len(T[0])
        coeffs = []
        for i in range(k):
            for j in range(i, k):
                v = new[i][i] if i == j else 2 * new[i][j]
                coeffs.append(int(v))
        return ZForm(k, tuple(coeffs))

    def __str__(self):
        return f"n={self.n}; [{','.join(str(c) for c in self.coeffs)}]"


# --------------------------------------------------------------------------
# square classes and the Hilbert symbol
# --------------------------------------------------------------------------


def valuation(a, p: int) -> int:
    """p-adic valuation of a nonzero integer or Fraction."""
    a = Fraction(a)
    if not a:
        raise ValueError("valuation of zero")
    return _vint(a.numerator, p) - _vint(a.denominator, p)


def _vint(x: int, p: int) -> int:
    x = abs(x)
    if p == 2:
        return (x & -x).bit_length() - 1
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def least_nonresidue(p: int) -> int:
    for u in range(2, p):
        if pow(u, (p - 1) // 2, p) == p - 1:
            return u
    raise ValueError(f"no non-residue mod {p}")


def _split(a, p: int) -> tuple[int, int]:
    """(valuation, unit datum): Legendre symbol of the unit part for odd p,
    unit part mod 8 for p = 2."""
    a = Fraction(a)
    if not a:
        raise ValueError("zero has no square class")
    num, den = a.numerator, a.denominator
    vn, vd = _vint(num, p), _vint(den, p)
    un, ud = num // p**vn, den // p**vd
    if p == 2:
        return vn - vd, (un * ud) % 8
    leg = pow(un * ud % p, (p - 1) // 2, p)
    return vn - vd, 1 if leg == 1 else -1


_UNIT2_REP = {1: 1, 3: -5, 5: 5, 7: -1}


def _rep_from_split(v: int, unit: int, p: int) -> int:
    if p == 2:
        return _UNIT2_REP[unit] * (2 if v % 2 else 1)
    u = 1 if unit == 1 else least_nonresidue(p)
    return u * (p if v % 2 else 1)


@dataclass(frozen=True)
class SquareClass:
    """Class of a nonzero rational in Q_p^* / (Q_p^*)^2, by canonical representative."""

    p: int
    rep: int

    def __mul__(self, other: "SquareClass") -> "SquareClass":
        if other.p != self.p:
            raise ValueError("square classes at different primes")
        return square_class(self.rep * other.rep, self.p)

    def __neg__(self) -> "SquareClass":
        return square_class(-self.rep, self.p)

    def __str__(self):
        return str(self.rep)

    def label(self) -> str:
        """'1', 'u', 'p', 'up' for odd p; the integer representative for p = 2."""
        if self.p == 2:
            return str(self.rep)
        if self.rep % self.p == 0:
            return "p" if self.rep == self.p else "up"
        return "1" if self.rep == 1 else "u"


def square_class(a, p: int) -> SquareClass:
    v, unit = _split(a, p)
    return SquareClass(p, _rep_from_split(v, unit, p))


def _hilbert_split(sa: tuple[int, int], sb: tuple[int, int], p: int) -> int:
    al, u = sa
    be, w = sb
    if p == 2:
        eps_u, eps_w = ((u - 1) // 2) % 2, ((w - 1) // 2) % 2
        om_u, om_w = ((u * u - 1) // 8) % 2, ((w * w - 1) // 8) % 2
        e = eps_u * eps_w + al * om_w + be * om_u
        return -1 if e % 2 else 1
    s = -1 if (al * be * ((p - 1) // 2)) % 2 else 1
    if be % 2:
        s *= u
    if al % 2:
        s *= w
    return s


def hilbert_symbol(a, b, p: int) -> int:
    """(a, b)_p: +1 iff a x^2 + b y^2 = z^2 has a nontrivial solution in Q_p."""
    return _hilbert_split(_split(a, p), _split(b, p), p)


def square_class_reps(p: int) -> tuple[int, ...]:
    if p == 2:
        return (1, -1, 2, -2, 5, -5, 10, -10)
    u = least_nonresidue(p)
    return (1, u, p, u * p)


def _v_array(vals: np.ndarray, p: int, cap: int) -> np.ndarray:
    out = np.zeros(vals.shape, dtype=np.int64)
    cur = vals.copy()
    for _ in range(cap):
        div = (cur % p == 0)
        out += div
        cur = np.where(div, cur // p, cur)
    return out


def hilbert_by_search(a: int, b: int, p: int) -> int:
    """(a, b)_p decided by looking for a primitive zero of a x^2 + b y^2 - z^2.

    Needs v_p(a), v_p(b) <= 1.  A primitive solution modulo p^e whose
    gradient has a coordinate of valuation t with 2t + 1 <= e lifts by Hensel;
    with e = 2 v_p(2) + 3 every true zero reduces to such a solution.
    """
    if valuation(a, p) > 1 or valuation(b, p) > 1:
        raise ValueError("entries must have valuation 0 or 1")
    e = 2 * (1 if p == 2 else 0) + 3
    mod = p**e
    tmax = (e - 1) // 2
    r = np.arange(mod, dtype=np.int64)
    s, t = np.meshgrid(r, r, indexing="ij")
    s, t = s.ravel(), t.ravel()
    one = np.ones_like(s)
    for x, y, z in ((one, s, t), (s, one, t), (s, t, one)):
        f = (a * x * x + b * y * y - z * z) % mod
        ok = f == 0
        if not ok.any():
            continue
        grads = [(2 * a * x) % mod, (2 * b * y) % mod, (2 * z) % mod]
        lift = np.zeros_like(ok)
        for g in grads:
            lift |= _v_array(g, p, tmax + 1) <= tmax
        if (ok & lift).any():
            return 1
    return -1


# --------------------------------------------------------------------------
# diagonalization and invariants
# --------------------------------------------------------------------------


def diagonalize(Q: ZForm) -> tuple[list[Fraction], int]:
    """Rational diagonal entries of Q's regular part and the radical dimension."""
    m = Q.matrix()
    n = Q.n
    diag = []
    active = list(range(n))
    while active:
        i = active[0]
        if m[i][i] == 0:
            j = next((j for j in active[1:] if m[j][j] != 0), None)
            if j is not None:
                active.remove(j)
                active.insert(0, j)
                i = j
            else:
                j = next((j for j in active[1:] if m[i][j] != 0), None)
                if j is None:
                    active.pop(0)  # row i is zero in the remaining block: radical direction
                    continue
                # x_i <- x_i + x_j makes the pivot 2 m_ij
                for r in range(n):
                    m[r][i] += m[r][j]
                for c in range(n):
                    m[i][c] += m[j][c]
        piv = m[i][i]
        diag.append(piv)
        active.pop(0)
        for r in active:
            f = m[r][i] / piv
            if f:
                for c in active:
                    m[r][c] -= f * m[i][c]
            m[r][i] = Fraction(0)
        for c in active:
            m[i][c] = Fraction(0)
    return diag, n - len(diag)


def hasse_invariant(diag: Sequence, p: int) -> int:
    splits = [_split(a, p) for a in diag]
    c = 1
    for i in range(len(splits)):
        for j in range(i + 1, len(splits)):
            c *= _hilbert_split(splits[i], splits[j], p)
    return c


@dataclass(frozen=True)
class QpInvariants:
    rank: int
    det_class: SquareClass
    hasse: int
    radical_dim: int = 0

    def __post_init__(self):
        if self.hasse not in (1, -1):
            raise ValueError("Hasse invariant must be +1 or -1")


def qp_invariants(Q: ZForm, p: int) -> QpInvariants:
    """Invariants of the regular part of Q over Q_p."""
    diag, rad = diagonalize(Q)
    det = math.prod(diag, start=Fraction(1))
    return QpInvariants(len(diag), square_class(det, p), hasse_invariant(diag, p), rad)


def is_isotropic(rank: int, d: int, c: int, p: int) -> bool:
    """Isotropy of a regular form from (rank, determinant representative, Hasse invariant)."""
    if rank <= 1:
        return False
    if rank == 2:
        return square_class(d, p) == square_class(-1, p)
    if rank == 3:
        return c == hilbert_symbol(-1, -d, p)
    if rank == 4:
        return not (square_class(d, p).rep == 1 and c == -hilbert_symbol(-1, -1, p))
    return True


def witt_index(inv: QpInvariants, p: int) -> int:
    """Number of hyperbolic planes split off the regular part."""
    rank, d, c = inv.rank, inv.det_class.rep, inv.hasse
    l = 0
    while is_isotropic(rank, d, c, p):
        # Q = H + Q', c(Q) = (-1, d(Q')) c(Q'), d(Q') = -d(Q)
        rank -= 2
        d = square_class(-d, p).rep
        c = c * hilbert_symbol(-1, d, p)
        l += 1
    return l


def k_isotropic(Q: ZForm, p: int, k: int) -> bool:
    """Whether Q has a k-dimensional totally isotropic subspace over Q_p."""
    if k <= 0:
        return True
    inv = qp_invariants(Q, p)
    return inv.radical_dim + witt_index(inv, p) >= k


# --------------------------------------------------------------------------
# fast path for sampling: fraction-free elimination on 2M
# --------------------------------------------------------------------------


def _leading_minors(g: list[list[int]]) -> list[int] | None:
    """Leading principal minors by Bareiss elimination; None if one vanishes."""
    n = len(g)
    a = [row[:] for row in g]
    minors = []
    prev = 1
    for k in range(n):
        piv = a[k][k]
        if piv == 0:
            return None
        minors.append(piv)
        for i in range(k + 1, n):
            aik = a[i][k]
            ri = a[i]
            rk = a[k]
            for j in range(k + 1, n):
                ri[j] = (piv * ri[j] - aik * rk[j]) // prev
        prev = piv
    return minors


def _diag_splits(coeffs: Sequence[int], n: int, p: int):
    """Split data of a diagonalization of Q when all leading minors of 2M are nonzero."""
    g = [[0] * n for _ in range(n)]
    it = iter(coeffs)
    for i in range(n):
        for j in range(i, n):
            c = int(next(it))
            if i == j:
                g[i][i] = 2 * c
            else:
                g[i][j] = g[j][i] = c
    minors = _leading_minors(g)
    if minors is None:
        return None
    # pivot i of M is D_i / (2 D_{i-1}), square class of 2 D_{i-1} D_i
    mins = [_split(x, p) for x in minors]
    two = _split(2, p)
    prev = (0, 1 if p != 2 else 1)
    out = []
    for s in mins:
        v = s[0] + prev[0] + two[0]
        if p == 2:
            unit = (s[1] * prev[1] * two[1]) % 8
        else:
            unit = s[1] * prev[1] * two[1]
        out.append((v, unit))
        prev = s
    return out


def _witt_from_splits(splits, p: int) -> int:
    c = 1
    for i in range(len(splits)):
        for j in range(i + 1, len(splits)):
            c *= _hilbert_split(splits[i], splits[j], p)
    v = sum(s[0] for s in splits)
    if p == 2:
        unit = math.prod(s[1] for s in splits) % 8
    else:
        unit = math.prod(s[1] for s in splits)
    d = _rep_from_split(v, unit, p)
    return witt_index(QpInvariants(len(splits), SquareClass(p, d), c), p)


def k_isotropic_fast(coeffs: Sequence[int], n: int, p: int, k: int) -> bool:
    """Same decision as ``k_isotropic`` on integer coefficients, via Bareiss minors
    when possible and the rational diagonalization otherwise."""
    if k <= 0:
        return True
    splits = _diag_splits(coeffs, n, p)
    if splits is None:
        return k_isotropic(ZForm(n, tuple(int(c) for c in coeffs)), p, k)
    return _witt_from_splits(splits, p) >= k


def invariants_fast(coeffs: Sequence[int], n: int, p: int) -> QpInvariants:
    splits = _diag_splits(coeffs, n, p)
    if splits is None:
        return qp_invariants(ZForm(n, tuple(int(c) for c in coeffs)), p)
    c = 1
    for i in range(len(splits)):
        for j in range(i + 1, len(splits)):
            c *= _hilbert_split(splits[i], splits[j], p)
    v = sum(s[0] for s in splits)
    unit = math.prod(s[1] for s in splits)
    if p == 2:
        unit %= 8
    return QpInvariants(n, SquareClass(p, _rep_from_split(v, unit, p)), c, 0)


# --------------------------------------------------------------------------
# Monte Carlo
# --------------------------------------------------------------------------


def default_digits(p: int) -> int:
    return 8 if p in (2, 3) else 5


def sample_coefficients(rng: np.random.Generator, p: int, digits: int, size: int, d: int) -> list[list[int]]:
    """``size`` rows of ``d`` integers uniform on [0, p**digits)."""
    top = p**digits
    if top < 2**62:
        arr = rng.integers(0, top, size=(size, d), dtype=np.int64)
        return arr.tolist()
    dig = rng.integers(0, p, size=(size, d, digits), dtype=np.int64).tolist()
    return [[sum(x * p**e for e, x in enumerate(cell)) for cell in row] for row in dig]


def _mc_rho_chunk(p, k, n, digits, seed, chunk, size):
    rng = chunk_rng(seed, chunk)
    rows = sample_coefficients(rng, p, digits, size, n * (n + 1) // 2)
    return sum(1 for row in rows if k_isotropic_fast(row, n, p, k))


@dataclass(frozen=True)
class MCResult:
    p: int
    k: int
    n: int
    digits: int
    samples: int
    seed: int
    hits: int
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def estimate(self) -> float:
        return Estimate(self.hits, self.samples).value

    @property
    def stderr(self) -> float:
        return Estimate(self.hits, self.samples).stderr

    CSV_HEADER = "p,k,n,N,samples,seed,estimate,stderr"

    def csv_row(self) -> str:
        return f"{self.p},{self.k},{self.n},{self.digits},{self.samples},{self.seed},{self.estimate:.6f},{self.stderr:.6f}"


def mc_rho(p: int, k: int, n: int, digits: int | None = None, samples: int = 10**5,
           seed: int = 0, workers: int | None = None) -> MCResult:
    """Fraction of sampled integral forms that are k-isotropic over Q_p."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    digits = digits or default_digits(p)
    if digits < 2 or samples < 1:
        raise ValueError("need digits >= 2 and samples >= 1")
    hits = sum(run_chunks(_mc_rho_chunk, (p, k, n, digits), samples, seed, workers))
    return MCResult(p, k, n, digits, samples, seed, hits)
