"""Isotropy densities as rational functions of p.

Three layers live here:

* ``pi`` -- the probability that a uniformly random form over F_p lies in the
  class [l, m, n], optionally conditioned on a nonzero first coefficient
  (kind 1) or on an anisotropic leading binary block (kind 2);
* ``DensityTable`` / ``delta_recursive`` -- the coupled linear system for the
  conditional isotropy probabilities delta_i(k; l, m, n), solved level by level
  over the field of rational functions;
* ``phi``, ``psi``, ``delta_closed``, ``rho_closed`` -- the closed forms, plus
  the identity checks that tie the two routes together.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache

from .ratfun import ONE, ZERO, P, RationalFunction

__all__ = [
    "DeltaKey",
    "DensityTable",
    "pi",
    "pi0",
    "lambda_rank",
    "delta_recursive",
    "phi",
    "psi",
    "delta_closed",
    "rho_closed",
    "orbit_count",
    "verify_appendix_identity",
    "verify_symmetry",
    "IdentityResult",
    "IDENTITIES",
]


def _pk(k: int) -> RationalFunction:
    return RationalFunction.monomial(k)


@lru_cache(maxsize=None)
def _pk_minus(a: int, b: int) -> RationalFunction:
    """p**a - p**b"""
    return _pk(a) - _pk(b)


def _prod(factors) -> RationalFunction:
    out = ONE
    for f in factors:
        out = out * f
    return out


@lru_cache(maxsize=None)
def _gl_order(n: int) -> RationalFunction:
    return _prod(_pk_minus(n, i) for i in range(n))


@lru_cache(maxsize=None)
def _subspaces(r: int, n: int) -> RationalFunction:
    return _prod(_pk_minus(n, i) / _pk_minus(r, i) for i in range(r))


@lru_cache(maxsize=None)
def _odd_even_ratio(d: int) -> RationalFunction:
    """prod_{r=1}^{d} (p^(2r-1) - 1)/(p^(2r) - 1)"""
    return _prod(_pk_minus(2 * r - 1, 0) / _pk_minus(2 * r, 0) for r in range(1, d + 1))


# --------------------------------------------------------------------------
# class probabilities over F_p
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def pi0(l: int, m: int, n: int) -> RationalFunction:
    """Probability that a random n-ary form over F_p is in class [l, m, n]."""
    r = n - 2 * l - m
    if l < 0 or m < 0 or m > 2 or r < 0:
        return ZERO
    total = _pk(-(n * (n + 1) // 2))
    if l == 0 and m == 0:
        return total
    # orbit size over the number of forms; m = 1 counts both orbits (p odd),
    # which matches the single orbit with halved stabiliser at p = 2
    if m == 0:
        regular = _gl_order(2 * l) / (
            2 * _pk(l * (l - 1)) * _pk_minus(l, 0) * _prod(_pk_minus(2 * i, 0) for i in range(1, l))
        )
    elif m == 1:
        regular = _gl_order(2 * l + 1) / (_pk(l * l) * _prod(_pk_minus(2 * i, 0) for i in range(1, l + 1)))
    else:
        regular = _gl_order(2 * l + 2) / (
            2 * _pk(l * (l + 1)) * (_pk(l + 1) + 1) * _prod(_pk_minus(2 * i, 0) for i in range(1, l + 1))
        )
    return total * _subspaces(r, n) * regular


@lru_cache(maxsize=None)
def _pi(i: int, l: int, m: int, n: int) -> RationalFunction:
    if i == 0:
        return pi0(l, m, n)
    if l < 0 or m < 0 or m > 2 or n < i or 2 * l + m > n:
        return ZERO
    half = RationalFunction.constant(1) / 2
    if i == 1:
        if m == 0:
            return pi0(l - 1, 1, n - 1) * half
        if m == 1:
            return pi0(l, 0, n - 1) + pi0(l - 1, 2, n - 1)
        return pi0(l, 1, n - 1) * half
    if i == 2:
        if m == 0:
            return pi0(l - 2, 2, n - 2)
        if m == 1:
            return pi0(l - 1, 1, n - 2)
        return pi0(l, 0, n - 2)
    raise ValueError(f"pi kind must be 0, 1 or 2, got {i}")


def pi(i: int, l: int, m: int, n: int) -> RationalFunction:
    """Class probability pi_i(l, m, n); impossible classes give the zero function."""
    if i not in (0, 1, 2):
        raise ValueError(f"pi kind must be 0, 1 or 2, got {i}")
    return _pi(i, l, m, n)


def orbit_count(l: int, m: int, n: int) -> RationalFunction:
    """Number of forms in class [l, m, n] as a polynomial in p."""
    return pi0(l, m, n) * _pk(n * (n + 1) // 2)


@lru_cache(maxsize=None)
def lambda_rank(r: int, n: int) -> RationalFunction:
    """Probability that a random n x n symmetric matrix over F_p (p odd) has rank r."""
    if r < 0 or r > n:
        return ZERO
    half, odd = divmod(r, 2)
    if odd:
        return pi0(half, 1, n)
    return pi0(half, 0, n) + pi0(half - 1, 2, n)


# --------------------------------------------------------------------------
# recursion solver
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DeltaKey:
    i: int
    k: int
    l: int
    m: int
    n: int

    def __post_init__(self):
        if self.i not in (0, 1, 2) or self.m not in (0, 1, 2):
            raise ValueError(f"invalid key {self}: i and m must lie in {{0,1,2}}")
        if self.k < 0 or self.l < 0:
            raise ValueError(f"invalid key {self}: need k, l >= 0")
        # the i conditioned variables sit inside the radical of the reduction
        if self.n - 2 * self.l - self.m < self.i:
            raise ValueError(f"invalid key {self}: need n - 2l - m >= i")


class DensityTable:
    """Append-only memo of solved delta values.

    Filling is guarded by a lock; values are deterministic so a shared
    table gives the same answers regardless of which worker filled it.
    """

    def __init__(self):
        self.memo: dict[DeltaKey, RationalFunction] = {}
        self._lock = threading.RLock()

    def __len__(self):
        return len(self.memo)

    def __contains__(self, key):
        return key in self.memo

    def get(self, key: DeltaKey) -> RationalFunction:
        with self._lock:
            return self._delta(key.i, key.k, key.l, key.m, key.n)

    # internals -------------------------------------------------------------

    def _delta(self, i: int, k: int, l: int, m: int, n: int) -> RationalFunction:
        if k == 0:
            return ONE
        if l > 0:
            if k <= l:
                return ONE
            return self._delta(i, k - l, 0, m, n - 2 * l)
        key = DeltaKey(i, k, 0, m, n)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self._solve_pair(i, m, k, n)
        return self.memo[key]

    def _rest(self, i: int, j: int, k: int, n: int) -> RationalFunction:
        """Right-hand side of the relation for delta_i(k;0,j,n) minus its partner term."""
        acc = ZERO
        for l in range(0, (n - j) // 2 + 1):
            for m in range(3):
                if l == 0 and m == i:
                    continue
                coeff = _pi(i, l, m, n - j)
                if coeff.is_zero():
                    continue
                acc = acc + coeff * self._delta(j, k, l, m, n)
        return acc

    def _solve_pair(self, i: int, j: int, k: int, n: int) -> None:
        if n < i + j:
            raise ValueError(f"delta_{i}(k;0,{j},{n}) undefined: n < i + j")
        if n == i + j:
            self.memo[DeltaKey(i, k, 0, j, n)] = ZERO if k >= 1 else ONE
            self.memo[DeltaKey(j, k, 0, i, n)] = ZERO if k >= 1 else ONE
            return
        e = (n + 1 - i - j) * (n - i - j) // 2
        assert e > 0, "cross coefficient must differ from +-1"
        c = _pk(-e)
        r_ij = self._rest(i, j, k, n)
        if i == j:
            val = r_ij / (1 - c)
            self.memo[DeltaKey(i, k, 0, j, n)] = val
            return
        r_ji = self._rest(j, i, k, n)
        det = 1 - c * c
        x_ij = (r_ij + c * r_ji) / det
        x_ji = (r_ji + c * r_ij) / det
        self.memo[DeltaKey(i, k, 0, j, n)] = x_ij
        self.memo[DeltaKey(j, k, 0, i, n)] = x_ji


_DEFAULT_TABLE = DensityTable()


def delta_recursive(key: DeltaKey, table: DensityTable | None = None) -> RationalFunction:
    """Solve delta_i(k; l, m, n) from the recursion system (memoized in ``table``)."""
    return (table if table is not None else _DEFAULT_TABLE).get(key)


# --------------------------------------------------------------------------
# closed forms
# --------------------------------------------------------------------------


def _check_ijn(i: int, j: int, n: int) -> None:
    if i not in (0, 1, 2) or j not in (0, 1, 2):
        raise ValueError("i and j must lie in {0,1,2}")
    if n < i + j:
        raise ValueError(f"need n >= i + j, got n={n}, i={i}, j={j}")


@lru_cache(maxsize=None)
def phi(i: int, j: int, n: int) -> RationalFunction:
    _check_ijn(i, j, n)
    d = (n + 1 - i - j) // 2
    return ((j - 1) * _pk(d) + (i - 1)) * _odd_even_ratio(d)


@lru_cache(maxsize=None)
def psi(i: int, j: int, n: int) -> RationalFunction:
    _check_ijn(i, j, n)
    d = (n + 1 - i - j) // 2
    a = (j - 1) * _pk(d) + (i - 1)
    b = (j - 1) * _pk(d + 2) - (i - 1)
    num = a * b
    if i == 1:
        num = num - P
    if j == 1:
        num = num + _pk(2 * d + 1)
    return num / ((P + 1) * _pk_minus(2 * d + 1, 0))


@lru_cache(maxsize=None)
def delta_closed(i: int, j: int, k: int, n: int) -> RationalFunction:
    """Closed form of delta_i(k; 0, j, n)."""
    _check_ijn(i, j, n)
    if k == 0:
        return ONE
    if n <= 2 * k - 1:
        return ZERO
    if n >= 2 * k + 3:
        return ONE
    quarter = RationalFunction.constant(1) / 4
    if n == 2 * k:
        return (psi(i, j, n) - phi(i, j, n)) * quarter
    if n == 2 * k + 1:
        return (1 - phi(i, j, n)) / 2
    return 1 - (phi(i, j, n) + psi(i, j, n)) * quarter


@lru_cache(maxsize=None)
def rho_closed(k: int, n: int) -> RationalFunction:
    """Probability that a random Z_p-integral n-ary form is k-isotropic over Q_p."""
    if k < 1 or n < 1:
        raise ValueError("need k >= 1 and n >= 1")
    if n <= 2 * k - 1:
        return ZERO
    if n >= 2 * k + 3:
        return ONE
    quarter = RationalFunction.constant(1) / 4
    if n == 2 * k:
        a = (_pk(k + 2) - 1) / ((P + 1) * _pk_minus(2 * k + 1, 0))
        return quarter * (_pk(k) + 1) * (a + _odd_even_ratio(k))
    if n == 2 * k + 1:
        half = RationalFunction.constant(1) / 2
        return half + half * (_pk(k + 1) + 1) * _odd_even_ratio(k + 1)
    a = (_pk(k + 3) - 1) / ((P + 1) * _pk_minus(2 * k + 3, 0))
    return 1 - quarter * (_pk(k + 1) + 1) * (a - _odd_even_ratio(k + 1))


# --------------------------------------------------------------------------
# identity verification
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityResult:
    name: str
    n: int
    ok: bool
    detail: str = ""

    def line(self) -> str:
        tag = f"IDENTITY {self.name} n={self.n} {'OK' if self.ok else 'FAIL'}"
        return f"{tag} {self.detail}".rstrip()


@lru_cache(maxsize=None)
def _A(n: int) -> RationalFunction:
    return _prod(_pk_minus(2 * i, 1) / _pk_minus(2 * i, 0) for i in range(1, (n + 1) // 2 + 1))


@lru_cache(maxsize=None)
def _B(n: int) -> RationalFunction:
    return _odd_even_ratio((n + 1) // 2)


@lru_cache(maxsize=None)
def _pi_n(n: int) -> RationalFunction:
    return _prod(1 - _pk(-i) for i in range(1, n + 1))


def _id1_sides(n: int, x: RationalFunction) -> tuple[RationalFunction, RationalFunction]:
    lhs = ZERO
    for r in range(n + 1):
        lam = lambda_rank(r, n)
        if (n - r) % 2 == 0:
            lhs = lhs + lam * (x - _pk(r)) / _pk_minus(n + 1, r)
        else:
            lhs = lhs + lam
    if n % 2 == 0:
        rhs = (x - 1) / _pk_minus(n + 1, 0)
    else:
        rhs = x / _pk(n + 1)
    return lhs, rhs


def _check_id1(n: int) -> list[str]:
    bad = []
    for label, x in (("x=0", ZERO), ("x=1", ONE), ("x=p^(n+1)", _pk(n + 1))):
        lhs, rhs = _id1_sides(n, x)
        if lhs != rhs:
            bad.append(label)
    return bad


def _check_os(n: int) -> list[str]:
    """Rank distribution of m x n matrices sums to one, for every m <= n."""
    bad = []
    for m in range(n + 1):
        total = ZERO
        for r in range(min(m, n) + 1):
            total = total + _pi_n(m) * _pi_n(n) / (
                _pk((m - r) * (n - r)) * _pi_n(r) * _pi_n(m - r) * _pi_n(n - r)
            )
        if total != ONE:
            bad.append(f"m={m}")
    return bad


_ID2_POINTS = ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, -1, 0), (1, 0, -1))


def _id2_sides(n, x, y, z):
    lhs = ZERO
    for r in range(n + 1):
        w = lambda_rank(r, n) * _B(n - r)
        if (n - r) % 2 == 0:
            lhs = lhs + w * (x + y * _pk(n - r))
        else:
            lhs = lhs + w * (x + z * _pk(n + 1 - r))
    if n % 2 == 0:
        rhs = (x + y + (1 - _pk(-n)) * z) * _A(n)
    else:
        rhs = (x + (1 - _pk(-(n + 1))) * y + z) * _A(n)
    return lhs, rhs


def _check_id2(n: int) -> list[str]:
    bad = []
    for x, y, z in _ID2_POINTS:
        lhs, rhs = _id2_sides(n, x, y, z)
        if lhs != rhs:
            bad.append(f"(x,y,z)=({x},{y},{z})")
    return bad


def _check_twoid(n: int) -> list[str]:
    bad = []
    even = ZERO
    odd = ZERO
    for ell in range(n + 1):
        w = lambda_rank(n - ell, n) * _B(ell)
        if ell % 2 == 0:
            even = even + w * _pk(ell)
        else:
            odd = odd + w * _pk(ell + 1)
    if n % 2 == 0:
        want_even, want_odd = _A(n), (1 - _pk(-n)) * _A(n)
    else:
        want_even, want_odd = (1 - _pk(-(n + 1))) * _A(n), _A(n)
    if even != want_even:
        bad.append("even-sum")
    if odd != want_odd:
        bad.append("odd-sum")
    return bad


def _recombine(f, i: int, j: int, n: int) -> RationalFunction:
    total = ZERO
    for ell in range(0, (n - j) // 2 + 1):
        for m in range(3):
            coeff = _pi(i, ell, m, n - j)
            if coeff.is_zero():
                continue
            total = total + coeff * f(j, m, n - 2 * ell)
    return total


def _check_phipsi(n: int) -> list[str]:
    bad = []
    for i in range(3):
        for j in range(3):
            if n < i + j:
                continue
            if _recombine(phi, i, j, n) != phi(i, j, n):
                bad.append(f"phi(i={i},j={j})")
            if n % 2 == 0 and _recombine(psi, i, j, n) != psi(i, j, n):
                bad.append(f"psi(i={i},j={j})")
    return bad


IDENTITIES = {
    "id1": _check_id1,
    "os": _check_os,
    "id2": _check_id2,
    "twoid": _check_twoid,
    "phipsi": _check_phipsi,
}


def verify_appendix_identity(name: str, n_values) -> list[IdentityResult]:
    """Check one named identity exactly for each n; one result per n."""
    try:
        check = IDENTITIES[name]
    except KeyError:
        raise ValueError(f"unknown identity {name!r}; choose from {sorted(IDENTITIES)}") from None
    out = []
    for n in n_values:
        bad = check(n)
        out.append(IdentityResult(name, n, not bad, ", ".join(bad)))
    return out


def verify_symmetry(k: int, n_values) -> list[tuple[int, int, int, bool]]:
    """(i, j, n, ok) for the p -> 1/p exchange of delta_i(k;0,j,n) and delta_j(k;0,i,n)."""
    out = []
    for n in n_values:
        for i in range(3):
            for j in range(3):
                if n < i + j:
                    continue
                ok = delta_closed(i, j, k, n).subs_reciprocal() == delta_closed(j, i, k, n)
                out.append((i, j, n, ok))
    return out
