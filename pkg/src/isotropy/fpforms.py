"""Quadratic forms over prime fields F_p, including characteristic 2.

A form is stored as its upper-triangular coefficient list
``a11, a12, ..., a1n, a22, ..., ann``.  Classification splits off hyperbolic
planes one at a time after quotienting by the radical; isotropic vectors are
found by exhaustive search, so this module is an oracle for small ``p**n``.
"""

from __future__ import annotations

import itertools
import math
import re
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

__all__ = [
    "FpForm",
    "WittClass",
    "is_prime",
    "bilinear_value",
    "radical",
    "witt_class",
    "count_zeros",
    "count_zeros_naive",
    "orthogonal_order",
    "subspace_count",
    "gl_order",
    "enumerate_class_census",
    "conditioned_census",
    "census_csv",
    "parse_form_literal",
    "format_form_literal",
    "CENSUS_BUDGET",
]

CENSUS_BUDGET = 10**7


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _tri_index(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i, n)]


@dataclass(frozen=True)
class WittClass:
    """Class [l, m, n]: l hyperbolic planes, anisotropic part of dimension m."""

    l: int
    m: int
    n: int

    def __post_init__(self):
        if self.l < 0 or self.m not in (0, 1, 2) or 2 * self.l + self.m > self.n:
            raise ValueError(f"invalid class [{self.l},{self.m},{self.n}]")

    @property
    def radical_dim(self) -> int:
        return self.n - 2 * self.l - self.m

    def __iter__(self):
        return iter((self.l, self.m, self.n))


@dataclass(frozen=True)
class FpForm:
    p: int
    n: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.n * (self.n + 1) // 2:
            raise ValueError(f"need {self.n * (self.n + 1) // 2} coefficients for n={self.n}, got {len(self.coeffs)}")
        object.__setattr__(self, "coeffs", tuple(c % self.p for c in self.coeffs))

    @classmethod
    def from_matrix(cls, p: int, upper: Sequence[Sequence[int]]) -> "FpForm":
        n = len(upper)
        return cls(p, n, tuple(upper[i][j] for i, j in _tri_index(n)))

    def upper(self) -> list[list[int]]:
        u = [[0] * self.n for _ in range(self.n)]
        for (i, j), c in zip(_tri_index(self.n), self.coeffs):
            u[i][j] = c
        return u

    def __call__(self, x: Sequence[int]) -> int:
        if len(x) != self.n:
            raise ValueError(f"vector of length {len(x)} for a form in {self.n} variables")
        s = 0
        for (i, j), c in zip(_tri_index(self.n), self.coeffs):
            if c:
                s += c * x[i] * x[j]
        return s % self.p

    def substitute(self, T: Sequence[Sequence[int]]) -> "FpForm":
        """The form x -> Q(T x); columns of T are images of basis vectors."""
        cols = [[T[r][c] for r in range(self.n)] for c in range(len(T[0]))]
        return restrict(self, cols)

    def __str__(self):
        return format_form_literal(self)


def bilinear_value(Q: FpForm, x: Sequence[int], y: Sequence[int]) -> int:
    """phi(x, y) = Q(x + y) - Q(x) - Q(y)."""
    if len(x) != Q.n or len(y) != Q.n:
        raise ValueError("dimension mismatch")
    s = 0
    for (i, j), c in zip(_tri_index(Q.n), Q.coeffs):
        if c:
            if i == j:
                s += 2 * c * x[i] * y[i]
            else:
                s += c * (x[i] * y[j] + x[j] * y[i])
    return s % Q.p


def restrict(Q: FpForm, basis: Sequence[Sequence[int]]) -> FpForm:
    """Q restricted to the span of ``basis`` (vectors in ambient coordinates)."""
    k = len(basis)
    coeffs = []
    for a in range(k):
        for b in range(a, k):
            if a == b:
                coeffs.append(Q(basis[a]))
            else:
                coeffs.append(bilinear_value(Q, basis[a], basis[b]))
    return FpForm(Q.p, k, tuple(coeffs))


# --------------------------------------------------------------------------
# linear algebra mod p
# --------------------------------------------------------------------------


def _rref(rows: list[list[int]], p: int) -> tuple[list[list[int]], list[int]]:
    rows = [list(r) for r in rows]
    pivots = []
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][c] % p), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][c], -1, p)
        rows[rank] = [v * inv % p for v in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][c] % p:
                f = rows[r][c]
                rows[r] = [(a - f * b) % p for a, b in zip(rows[r], rows[rank])]
        pivots.append(c)
        rank += 1
    return rows[:rank], pivots


def _kernel(mat: list[list[int]], ncols: int, p: int) -> list[list[int]]:
    """Basis of {x : mat x = 0}."""
    if not mat:
        return [[int(i == j) for i in range(ncols)] for j in range(ncols)]
    rows, pivots = _rref(mat, p)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for r, pc in enumerate(pivots):
            v[pc] = -rows[r][f] % p
        basis.append(v)
    return basis


def _complement(sub: list[list[int]], n: int, p: int) -> list[list[int]]:
    """Standard basis vectors completing ``sub`` to a basis of F_p^n."""
    current = [list(v) for v in sub]
    rank = len(_rref(current, p)[0]) if current else 0
    out = []
    for i in range(n):
        e = [int(i == j) for j in range(n)]
        trial = current + [e]
        r = len(_rref(trial, p)[0])
        if r > rank:
            current, rank = trial, r
            out.append(e)
    return out


def _gram(Q: FpForm) -> list[list[int]]:
    u = Q.upper()
    n, p = Q.n, Q.p
    return [[(u[i][j] + u[j][i]) % p if i != j else 2 * u[i][i] % p for j in range(n)] for i in range(n)]


def radical(Q: FpForm) -> list[list[int]]:
    """Basis of the radical; in characteristic 2 also requires Q(x) = 0."""
    p, n = Q.p, Q.n
    if n == 0:
        return []
    kern = _kernel(_gram(Q), n, p)
    if p != 2 or not kern:
        return kern
    # on the bilinear kernel Q is additive, and F_2-linear
    values = [Q(v) for v in kern]
    if not any(values):
        return kern
    pivot = next(i for i, v in enumerate(values) if v)
    out = []
    for i, (v, q) in enumerate(zip(kern, values)):
        if i == pivot:
            continue
        if q:
            v = [(a + b) % 2 for a, b in zip(v, kern[pivot])]
        out.append(v)
    return out


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------


def _vectors(p: int, n: int) -> Iterator[tuple[int, ...]]:
    it = itertools.product(range(p), repeat=n)
    next(it)  # zero vector
    return it


def _split_regular(Q: FpForm) -> tuple[int, int]:
    """(l, m) for a regular form."""
    p = Q.p
    l = 0
    while True:
        n = Q.n
        if n == 0:
            return l, 0
        x = next((v for v in _vectors(p, n) if Q(v) == 0), None)
        if x is None:
            if n > 2:
                raise AssertionError(f"anisotropic regular form of dimension {n} over F_{p}")
            return l, n
        y = None
        for i in range(n):
            e = [int(i == j) for j in range(n)]
            b = bilinear_value(Q, x, e)
            if b:
                inv = pow(b, -1, p)
                y = [c * inv % p for c in e]
                break
        if y is None:
            raise AssertionError("isotropic vector in the radical of a regular form")
        qy = Q(y)
        y = [(a - qy * b) % p for a, b in zip(y, x)]  # now Q(y) = 0, phi(x, y) = 1
        # orthogonal complement of span{x, y}: w - phi(w,y) x - phi(w,x) y
        proj = []
        for i in range(n):
            w = [int(i == j) for j in range(n)]
            a = bilinear_value(Q, w, y)
            b = bilinear_value(Q, w, x)
            proj.append([(wi - a * xi - b * yi) % p for wi, xi, yi in zip(w, x, y)])
        basis, _ = _rref(proj, p)
        if len(basis) != n - 2:
            raise AssertionError("hyperbolic complement has wrong dimension")
        Q = restrict(Q, basis)
        l += 1


def witt_class(Q: FpForm) -> WittClass:
    rad = radical(Q)
    comp = _complement(rad, Q.n, Q.p) if rad else [[int(i == j) for j in range(Q.n)] for i in range(Q.n)]
    l, m = _split_regular(restrict(Q, comp))
    return WittClass(l, m, Q.n)


def _zeros_from_class(l: int, m: int, n: int, p: int) -> int:
    if l == 0:
        return p ** (n - m)
    inner = _zeros_from_class(l - 1, m, n - 2, p)
    return (2 * p - 1) * inner + (p - 1) * (p ** (n - 2) - inner)


def count_zeros(Q: FpForm) -> int:
    """#{x in F_p^n : Q(x) = 0} via the hyperbolic-plane recursion."""
    c = witt_class(Q)
    return _zeros_from_class(c.l, c.m, c.n, Q.p)


def count_zeros_naive(Q: FpForm) -> int:
    return sum(1 for x in itertools.product(range(Q.p), repeat=Q.n) if Q(x) == 0)


# --------------------------------------------------------------------------
# group orders
# --------------------------------------------------------------------------


def gl_order(n: int, p: int) -> int:
    return math.prod(p**n - p**i for i in range(n))


def orthogonal_order(m: int, n: int, p: int) -> int:
    """Order of the stabiliser in GL_n(F_p) of a regular form with anisotropic part of dim m."""
    if m not in (0, 1, 2) or n < m or (n - m) % 2:
        raise ValueError(f"inconsistent (m, n) = ({m}, {n})")
    if n == 0:
        return 1
    if m == 1:
        k = (n - 1) // 2
        base = p ** (k * k) * math.prod(p ** (2 * i) - 1 for i in range(1, k + 1))
        return base if p == 2 else 2 * base
    k = n // 2
    tail = math.prod(p ** (2 * i) - 1 for i in range(1, k))
    sign = -1 if m == 0 else 1
    return 2 * p ** (k * (k - 1)) * (p**k + sign) * tail


def subspace_count(r: int, n: int, p: int) -> int:
    """Number of r-dimensional subspaces of F_p^n."""
    if r < 0 or r > n:
        raise ValueError(f"need 0 <= r <= n, got r={r}, n={n}")
    num = math.prod(p**n - p**i for i in range(r))
    den = math.prod(p**r - p**i for i in range(r))
    return num // den


# --------------------------------------------------------------------------
# census
# --------------------------------------------------------------------------


def _census_shard(args) -> tuple[Counter, Counter, Counter]:
    p, n, start, stop = args
    d = n * (n + 1) // 2
    full, cond1, cond2 = Counter(), Counter(), Counter()
    for idx in range(start, stop):
        coeffs = []
        v = idx
        for _ in range(d):
            v, c = divmod(v, p)
            coeffs.append(c)
        Q = FpForm(p, n, tuple(coeffs))
        c = witt_class(Q)
        key = (c.l, c.m, c.n)
        full[key] += 1
        if n >= 1 and coeffs[0]:
            cond1[key] += 1
        if n >= 2:
            # leading binary block a11 x1^2 + a12 x1 x2 + a22 x2^2
            a11, a12, a22 = coeffs[0], coeffs[1], coeffs[n]
            if _binary_anisotropic(a11, a12, a22, p):
                cond2[key] += 1
    return full, cond1, cond2


def _binary_anisotropic(a: int, b: int, c: int, p: int) -> bool:
    # regular and anisotropic: no nonzero zero, which forces regularity
    if a == 0:
        return False
    # a x^2 + b x y + c y^2 with y = 1 has no root in x
    return all((a * x * x + b * x + c) % p for x in range(p))


def _run_census(p: int, n: int, workers: int | None, budget: int):
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    total = p ** (n * (n + 1) // 2)
    if total > budget:
        raise ValueError(f"census of p={p}, n={n} needs {total} forms, budget is {budget}")
    workers = max(1, workers or 1)
    shards = max(workers * 4, 1) if total > 4096 else 1
    step = -(-total // shards)
    jobs = [(p, n, s, min(s + step, total)) for s in range(0, total, step)]
    if workers == 1:
        parts = map(_census_shard, jobs)
    else:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_census_shard, jobs))
    full, cond1, cond2 = Counter(), Counter(), Counter()
    for a, b, c in parts:
        full.update(a)
        cond1.update(b)
        cond2.update(c)
    return full, cond1, cond2


def enumerate_class_census(p: int, n: int, workers: int | None = None,
                           budget: int = CENSUS_BUDGET) -> dict[WittClass, int]:
    """Exhaustive count of all p**(n(n+1)/2) forms by class."""
    full, _, _ = _run_census(p, n, workers, budget)
    return {WittClass(*k): v for k, v in sorted(full.items())}


def conditioned_census(p: int, n: int, workers: int | None = None,
                       budget: int = CENSUS_BUDGET) -> tuple[dict, dict, dict]:
    """Census plus the sub-censuses conditioned on a11 != 0 and on an
    anisotropic leading binary block, keyed by (l, m, n)."""
    full, cond1, cond2 = _run_census(p, n, workers, budget)
    return dict(sorted(full.items())), dict(sorted(cond1.items())), dict(sorted(cond2.items()))


def census_csv(census: dict) -> str:
    lines = ["l,m,n,count"]
    for key, count in sorted(census.items(), key=lambda kv: tuple(kv[0])):
        l, m, n = tuple(key)
        lines.append(f"{l},{m},{n},{count}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# literal format
# --------------------------------------------------------------------------

_LITERAL = re.compile(
    r"^\s*(?:p\s*=\s*(?P<p>\d+)\s*;\s*)?n\s*=\s*(?P<n>\d+)\s*;\s*\[(?P<body>[^\]]*)\]\s*$"
)


def parse_form_literal(text: str) -> tuple[int | None, int, tuple[int, ...]]:
    """Parse ``p=<prime>; n=<dim>; [a11,...,ann]`` (the ``p=`` part is optional)."""
    m = _LITERAL.match(text)
    if not m:
        raise ValueError(f"malformed form literal {text!r}")
    p = int(m["p"]) if m["p"] else None
    n = int(m["n"])
    body = m["body"].strip()
    try:
        coeffs = tuple(int(t) for t in body.split(",")) if body else ()
    except ValueError:
        raise ValueError(f"malformed coefficient list in {text!r}") from None
    if len(coeffs) != n * (n + 1) // 2:
        raise ValueError(f"form literal for n={n} needs {n * (n + 1) // 2} coefficients, got {len(coeffs)}")
    return p, n, coeffs


def format_form_literal(Q) -> str:
    body = ",".join(str(c) for c in Q.coeffs)
    if isinstance(Q, FpForm):
        return f"p={Q.p}; n={Q.n}; [{body}]"
    return f"n={Q.n}; [{body}]"
