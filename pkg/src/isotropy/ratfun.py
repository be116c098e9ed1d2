"""Exact univariate rational functions in the formal variable ``p``.

Every density in the package is a ratio of integer polynomials in ``p``.
Values are kept in a canonical form so that equality is structural::

    f = p**v * N(p) / D(p)

with ``N``, ``D`` integer polynomials, ``N(0) != 0`` and ``D(0) != 0``,
``gcd(N, D) = 1``, the joint integer content of ``N`` and ``D`` equal to 1,
and the leading coefficient of ``D`` positive.  Splitting off the power of
``p`` keeps the frequent ``1/p**(n(n+1)/2)`` factors free.

Polynomials are stored as tuples of coefficients, lowest degree first.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence, Union

__all__ = [
    "Polynomial",
    "RationalFunction",
    "PoleError",
    "P",
    "ONE",
    "ZERO",
    "rf_arith",
    "rf_eval",
    "rf_recip_subst",
    "rf_laurent_at_infinity",
    "parse",
    "count_real_roots",
]

Scalar = Union[int, Fraction]
ZPoly = tuple  # tuple[int, ...], lowest degree first


class PoleError(ZeroDivisionError):
    """Evaluation at a zero of the denominator."""


# --------------------------------------------------------------------------
# integer polynomial kernel
# --------------------------------------------------------------------------

_KRONECKER_MIN = 24


def _strip(c: list) -> ZPoly:
    n = len(c)
    while n and not c[n - 1]:
        n -= 1
    return tuple(c[:n])


def _zadd(a: ZPoly, b: ZPoly) -> ZPoly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return _strip(out)


def _zneg(a: ZPoly) -> ZPoly:
    return tuple(-c for c in a)


def _zscale(a: ZPoly, s: int) -> ZPoly:
    if not s:
        return ()
    return tuple(c * s for c in a)


def _zshift(a: ZPoly, k: int) -> ZPoly:
    return (0,) * k + a if a else ()


def _maxnorm(a: ZPoly) -> int:
    return max(abs(c) for c in a)


def _pack(a: ZPoly, bits: int) -> int:
    v = 0
    for c in reversed(a):
        v = (v << bits) + c
    return v


def _unpack(v: int, bits: int, length: int) -> ZPoly:
    base = 1 << bits
    half = base >> 1
    mask = base - 1
    out = []
    for _ in range(length):
        c = v & mask
        if c >= half:
            c -= base
        out.append(c)
        v = (v - c) >> bits
    return _strip(out)


def _zmul(a: ZPoly, b: ZPoly) -> ZPoly:
    if not a or not b:
        return ()
    if len(a) == 1:
        return _zscale(b, a[0])
    if len(b) == 1:
        return _zscale(a, b[0])
    if min(len(a), len(b)) >= _KRONECKER_MIN:
        # Kronecker substitution: evaluate at 2**bits, multiply, read digits back
        bound = _maxnorm(a) * _maxnorm(b) * min(len(a), len(b))
        bits = bound.bit_length() + 2
        return _unpack(_pack(a, bits) * _pack(b, bits), bits, len(a) + len(b) - 1)
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _strip(out)


def _zexact_div(a: ZPoly, b: ZPoly) -> ZPoly | None:
    """Return a/b if b divides a in Z[p], else None."""
    if not a:
        return ()
    da, db = len(a) - 1, len(b) - 1
    if da < db:
        return None
    rem = list(a)
    lc = b[-1]
    q = [0] * (da - db + 1)
    for k in range(da - db, -1, -1):
        c = rem[k + db]
        if c:
            qc, r = divmod(c, lc)
            if r:
                return None
            q[k] = qc
            for j in range(db + 1):
                rem[k + j] -= qc * b[j]
    if any(rem[:db]):
        return None
    return _strip(q)


def _content(a: ZPoly) -> int:
    return reduce(math.gcd, a, 0)


def _primitive(a: ZPoly) -> tuple[int, ZPoly]:
    c = _content(a)
    if a[-1] < 0:
        c = -c
    return c, tuple(x // c for x in a)


def _zeval(a: ZPoly, x: int) -> int:
    v = 0
    for c in reversed(a):
        v = v * x + c
    return v


def _prem(a: ZPoly, b: ZPoly) -> ZPoly:
    """Pseudo-remainder of a by b."""
    r = list(a)
    db = len(b) - 1
    lc = b[-1]
    while len(r) - 1 >= db and r:
        c = r[-1]
        shift = len(r) - 1 - db
        r = [x * lc for x in r]
        for j in range(db + 1):
            r[shift + j] -= c * b[j]
        r = list(_strip(r))
    return tuple(r)


def _gcd_prs(a: ZPoly, b: ZPoly) -> ZPoly:
    """Primitive Euclidean remainder sequence; inputs primitive, output primitive."""
    if len(a) < len(b):
        a, b = b, a
    while b:
        r = _prem(a, b)
        a, b = b, (_primitive(r)[1] if r else ())
    return _primitive(a)[1]


def _heu_gcd(a: ZPoly, b: ZPoly) -> ZPoly | None:
    """Heuristic gcd by evaluation at a large integer; verified by exact division."""
    na, nb = _maxnorm(a), _maxnorm(b)
    bound = 2 * min(na, nb) + 29
    x = max(min(bound, 99 * math.isqrt(bound)), 2 * min(na // abs(a[-1]), nb // abs(b[-1])) + 2)
    for _ in range(6):
        fa, fb = _zeval(a, x), _zeval(b, x)
        if fa and fb:
            h = math.gcd(fa, fb)
            coeffs = []
            half = x // 2
            while h:
                c = h % x
                if c > half:
                    c -= x
                coeffs.append(c)
                h = (h - c) // x
            cand = _strip(coeffs)
            if cand:
                cand = _primitive(cand)[1]
                if _zexact_div(a, cand) is not None and _zexact_div(b, cand) is not None:
                    return cand
        x = 73794 * x * math.isqrt(math.isqrt(x)) // 27011
    return None


def _zgcd_primitive(a: ZPoly, b: ZPoly) -> ZPoly:
    if len(a) == 1 or len(b) == 1:
        return (1,)
    g = _heu_gcd(a, b)
    return g if g is not None else _gcd_prs(a, b)


def _low_order(a: ZPoly) -> int:
    k = 0
    while not a[k]:
        k += 1
    return k


# --------------------------------------------------------------------------
# Polynomial with rational coefficients (public value type)
# --------------------------------------------------------------------------


class Polynomial:
    """Immutable polynomial in ``p`` with rational coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Scalar] = ()):
        c = [Fraction(x) for x in coeffs]
        while c and not c[-1]:
            c.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Polynomial({[str(c) for c in self.coeffs]})"

    def __call__(self, x: Scalar) -> Fraction:
        v = Fraction(0)
        for c in reversed(self.coeffs):
            v = v * x + c
        return v

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial(out)

    def __neg__(self) -> "Polynomial":
        return Polynomial(-c for c in self.coeffs)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if not self.coeffs or not other.coeffs:
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            for j, y in enumerate(other.coeffs):
                out[i + j] += x * y
        return Polynomial(out)

    def __divmod__(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        db = other.degree
        lc = other.coeffs[-1]
        if len(rem) - 1 < db:
            return Polynomial(), self
        q = [Fraction(0)] * (len(rem) - db)
        for k in range(len(rem) - 1 - db, -1, -1):
            c = rem[k + db] / lc
            q[k] = c
            if c:
                for j in range(db + 1):
                    rem[k + j] -= c * other.coeffs[j]
        return Polynomial(q), Polynomial(rem[:db])

    def derivative(self) -> "Polynomial":
        return Polynomial(i * c for i, c in enumerate(self.coeffs) if i)

    def to_integer(self) -> tuple[Fraction, ZPoly]:
        """Return (scale, integer tuple) with self == scale * tuple, tuple primitive."""
        if not self.coeffs:
            return Fraction(0), ()
        den = reduce(math.lcm, (c.denominator for c in self.coeffs), 1)
        ints = tuple(int(c * den) for c in self.coeffs)
        g = _content(ints)
        return Fraction(g, den), tuple(x // g for x in ints)


# --------------------------------------------------------------------------
# RationalFunction
# --------------------------------------------------------------------------


def _coerce(x) -> "RationalFunction":
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, (int, Fraction)):
        return RationalFunction.constant(x)
    if isinstance(x, Polynomial):
        return RationalFunction.from_polynomials(x, Polynomial([1]))
    return NotImplemented


class RationalFunction:
    """Canonical ``p**v * num / den`` over the integers.  Immutable."""

    __slots__ = ("_v", "_num", "_den", "_hash")

    def __init__(self, num: ZPoly, den: ZPoly = (1,), v: int = 0, *, _canonical: bool = False):
        if _canonical:
            self._v, self._num, self._den = v, num, den
        else:
            self._v, self._num, self._den = _canonicalize(tuple(num), tuple(den), v)
        self._hash = None

    # constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, c: Scalar) -> "RationalFunction":
        c = Fraction(c)
        if not c:
            return cls((), (1,), 0, _canonical=True)
        return cls((c.numerator,), (c.denominator,), 0, _canonical=True)

    @classmethod
    def monomial(cls, k: int, c: Scalar = 1) -> "RationalFunction":
        """``c * p**k`` for any integer ``k``."""
        r = cls.constant(c)
        if not r._num:
            return r
        return cls(r._num, r._den, k, _canonical=True)

    @classmethod
    def from_polynomials(cls, num: Polynomial, den: Polynomial) -> "RationalFunction":
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        sn, zn = num.to_integer()
        sd, zd = den.to_integer()
        if not zn:
            return ZERO
        s = sn / sd
        return cls(_zscale(zn, s.numerator), _zscale(zd, s.denominator))

    @classmethod
    def from_ints(cls, num: Sequence[int], den: Sequence[int] = (1,)) -> "RationalFunction":
        return cls(tuple(num), tuple(den))

    # accessors -------------------------------------------------------------

    @property
    def num(self) -> Polynomial:
        if self._v > 0:
            return Polynomial(_zshift(self._num, self._v))
        return Polynomial(self._num)

    @property
    def den(self) -> Polynomial:
        if self._v < 0:
            return Polynomial(_zshift(self._den, -self._v))
        return Polynomial(self._den)

    @property
    def valuation(self) -> int:
        """Order of vanishing at ``p = 0`` (negative for a pole)."""
        return self._v

    def is_zero(self) -> bool:
        return not self._num

    def is_constant(self) -> bool:
        return len(self._num) <= 1 and len(self._den) == 1 and (self._v == 0 or not self._num)

    def degree_at_infinity(self) -> int:
        """deg(num) - deg(den); the growth order as p -> infinity."""
        if not self._num:
            raise ValueError("zero function has no degree")
        return self._v + len(self._num) - len(self._den)

    # arithmetic ------------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not self._num:
            return other
        if not other._num:
            return self
        v = min(self._v, other._v)
        a = _zshift(self._num, self._v - v)
        b = _zshift(other._num, other._v - v)
        if self._den == other._den:
            return RationalFunction(_zadd(a, b), self._den, v)
        g = _zgcd_primitive(_primitive(self._den)[1], _primitive(other._den)[1])
        if g == (1,):
            num = _zadd(_zmul(a, other._den), _zmul(b, self._den))
            return RationalFunction(num, _zmul(self._den, other._den), v)
        d1 = _zexact_div(self._den, g)
        d2 = _zexact_div(other._den, g)
        num = _zadd(_zmul(a, d2), _zmul(b, d1))
        return RationalFunction(num, _zmul(_zmul(d1, d2), g), v)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(_zneg(self._num), self._den, self._v, _canonical=True)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not self._num or not other._num:
            return ZERO
        # cross-cancel before multiplying keeps operands small
        n1, d1, n2, d2 = self._num, self._den, other._num, other._den
        g1 = _cancel_pair(n1, d2)
        g2 = _cancel_pair(n2, d1)
        if g1 is not None:
            n1, d2 = g1
        if g2 is not None:
            n2, d1 = g2
        num = _zmul(n1, n2)
        den = _zmul(d1, d2)
        # content and sign normalization only; polynomial part already coprime
        c = math.gcd(_content(num), _content(den))
        if den[-1] < 0:
            c = -c
        if c != 1:
            num = tuple(x // c for x in num)
            den = tuple(x // c for x in den)
        return RationalFunction(num, den, self._v + other._v, _canonical=True)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if not self._num:
            raise ZeroDivisionError("division by the zero function")
        num, den = self._den, self._num
        if den[-1] < 0:
            num, den = _zneg(num), _zneg(den)
        return RationalFunction(num, den, -self._v, _canonical=True)

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # comparison ------------------------------------------------------------

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return (self._v, self._num, self._den) == (other._v, other._num, other._den)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._v, self._num, self._den))
        return self._hash

    # evaluation ------------------------------------------------------------

    def __call__(self, x: Scalar) -> Fraction:
        return rf_eval(self, x)

    def subs_reciprocal(self) -> "RationalFunction":
        if not self._num:
            return self
        num = tuple(reversed(self._num))
        den = tuple(reversed(self._den))
        v = -self._v + (len(self._den) - len(self._num))
        if den[-1] < 0:
            num, den = _zneg(num), _zneg(den)
        return RationalFunction(num, den, v, _canonical=True)

    # rendering -------------------------------------------------------------

    def __str__(self):
        return render(self)

    def __repr__(self):
        return f"RationalFunction({render(self)!r})"


def _cancel_pair(n: ZPoly, d: ZPoly):
    if len(n) == 1 or len(d) == 1:
        c = math.gcd(_content(n), _content(d))
        if c == 1:
            return None
        return tuple(x // c for x in n), tuple(x // c for x in d)
    g = _zgcd_primitive(_primitive(n)[1], _primitive(d)[1])
    if g == (1,):
        return None
    return _zexact_div(n, g), _zexact_div(d, g)


def _canonicalize(num: ZPoly, den: ZPoly, v: int) -> tuple[int, ZPoly, ZPoly]:
    num = _strip(list(num))
    den = _strip(list(den))
    if not den:
        raise ZeroDivisionError("zero denominator")
    if not num:
        return 0, (), (1,)
    kn = _low_order(num)
    kd = _low_order(den)
    num, den = num[kn:], den[kd:]
    v += kn - kd
    if len(num) > 1 and len(den) > 1:
        g = _zgcd_primitive(_primitive(num)[1], _primitive(den)[1])
        if g != (1,):
            num = _zexact_div(num, g)
            den = _zexact_div(den, g)
    c = math.gcd(_content(num), _content(den))
    if den[-1] < 0:
        c = -c
    if c != 1:
        num = tuple(x // c for x in num)
        den = tuple(x // c for x in den)
    return v, num, den


ZERO = RationalFunction((), (1,), 0, _canonical=True)
ONE = RationalFunction((1,), (1,), 0, _canonical=True)
P = RationalFunction((1,), (1,), 1, _canonical=True)


# --------------------------------------------------------------------------
# operation-level API
# --------------------------------------------------------------------------


def rf_arith(a: RationalFunction, b: RationalFunction, op: str) -> RationalFunction:
    """Exact ``a op b`` for op in {add, sub, mul, div}."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b.is_zero():
            raise ZeroDivisionError("division by the zero function")
        return a / b
    raise ValueError(f"unknown op {op!r}")


def rf_eval(f: RationalFunction, x: Scalar) -> Fraction:
    x = Fraction(x)
    if not f._num:
        return Fraction(0)
    if x.denominator == 1:
        xi = x.numerator
        n = _zeval(f._num, xi)
        d = _zeval(f._den, xi)
        if d == 0 or (f._v < 0 and xi == 0):
            raise PoleError(f"pole of {f} at p={x}")
        if f._v >= 0:
            return Fraction(n * xi**f._v, d)
        return Fraction(n, d * xi ** (-f._v))
    n = Polynomial(f._num)(x)
    d = Polynomial(f._den)(x)
    if d == 0:
        raise PoleError(f"pole of {f} at p={x}")
    return n / d * x**f._v


def rf_recip_subst(f: RationalFunction) -> RationalFunction:
    """Canonical form of f(1/p)."""
    return f.subs_reciprocal()


def rf_laurent_at_infinity(f: RationalFunction, order: int) -> list[Fraction]:
    """Coefficients c_0..c_order of f = sum c_i p^-i as p -> infinity."""
    if order < 1:
        raise ValueError("order must be >= 1")
    if f.is_zero():
        return [Fraction(0)] * (order + 1)
    shift = -f.degree_at_infinity()
    if shift < 0:
        raise ValueError(f"{f} is unbounded at infinity")
    # in q = 1/p: f = q**shift * rev(num)/rev(den), both reversals have nonzero constant term
    a = [Fraction(c) for c in reversed(f._num)]
    b = [Fraction(c) for c in reversed(f._den)]
    m = order + 1 - shift
    series = []
    for i in range(max(m, 0)):
        s = a[i] if i < len(a) else Fraction(0)
        for j in range(1, min(i, len(b) - 1) + 1):
            s -= b[j] * series[i - j]
        series.append(s / b[0])
    return ([Fraction(0)] * shift + series)[: order + 1]


# --------------------------------------------------------------------------
# text format
# --------------------------------------------------------------------------


def _render_poly(coeffs: ZPoly, shift: int) -> str:
    terms = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if not c:
            continue
        e = k + shift
        mag = abs(c)
        if e == 0:
            body = str(mag)
        else:
            mono = "p" if e == 1 else f"p^{e}"
            body = mono if mag == 1 else f"{mag}*{mono}"
        if not terms:
            terms.append(body if c > 0 else f"-{body}")
        else:
            terms.append(f"+ {body}" if c > 0 else f"- {body}")
    return " ".join(terms) if terms else "0"


def render(f: RationalFunction) -> str:
    """E.g. ``(p^2 - 1)/(2*p^2)``; a polynomial renders without parentheses."""
    num = _render_poly(f._num, max(f._v, 0))
    if f._den == (1,) and f._v >= 0:
        return num
    den = _render_poly(f._den, max(-f._v, 0))
    return f"({num})/({den})"


_TOKEN = re.compile(r"\s*(?:(\d+)|(p)|(\^)|([-+*/()]))")


def parse(text: str) -> RationalFunction:
    """Parse the rendering grammar (and any +,-,*,/,^ expression in p and integers)."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse {text!r} at {pos}")
        pos = m.end()
        num, var, caret, op = m.groups()
        if num is not None:
            tokens.append(("int", int(num)))
        elif var:
            tokens.append(("p", None))
        elif caret:
            tokens.append(("^", None))
        else:
            tokens.append((op, None))
    tokens.append(("end", None))
    i = 0

    def peek():
        return tokens[i][0]

    def take(kind=None):
        nonlocal i
        t = tokens[i]
        if kind is not None and t[0] != kind:
            raise ValueError(f"expected {kind!r} in {text!r}, got {t[0]!r}")
        i += 1
        return t

    def expr():
        sign = 1
        if peek() in "+-":
            sign = -1 if take()[0] == "-" else 1
        val = term() if sign > 0 else -term()
        while peek() in ("+", "-"):
            op = take()[0]
            t = term()
            val = val + t if op == "+" else val - t
        return val

    def term():
        val = factor()
        while peek() in ("*", "/"):
            op = take()[0]
            f = factor()
            val = val * f if op == "*" else val / f
        return val

    def factor():
        kind, value = take()
        if kind == "int":
            base = RationalFunction.constant(value)
        elif kind == "p":
            base = P
        elif kind == "(":
            base = expr()
            take(")")
        elif kind == "-":
            return -factor()
        else:
            raise ValueError(f"unexpected {kind!r} in {text!r}")
        if peek() == "^":
            take()
            neg = False
            if peek() == "-":
                take()
                neg = True
            e = take("int")[1]
            base = base ** (-e if neg else e)
        return base

    result = expr()
    if peek() != "end":
        raise ValueError(f"trailing input in {text!r}")
    return result


# --------------------------------------------------------------------------
# real root counting (Sturm)
# --------------------------------------------------------------------------


def _sign_at(poly: Polynomial, x) -> int:
    if x == math.inf:
        return (poly.coeffs[-1] > 0) - (poly.coeffs[-1] < 0) if poly.coeffs else 0
    if x == -math.inf:
        if not poly.coeffs:
            return 0
        s = (poly.coeffs[-1] > 0) - (poly.coeffs[-1] < 0)
        return s if poly.degree % 2 == 0 else -s
    v = poly(x)
    return (v > 0) - (v < 0)


def count_real_roots(poly: Polynomial, lo, hi) -> int:
    """Number of distinct real roots of ``poly`` in the half-open interval (lo, hi].

    ``lo``/``hi`` may be rationals or +-math.inf.
    """
    if poly.is_zero():
        raise ValueError("zero polynomial has infinitely many roots")
    chain = [poly, poly.derivative()]
    while not chain[-1].is_zero():
        _, r = divmod(chain[-2], chain[-1])
        chain.append(-r)
    chain.pop()

    def changes(x):
        signs = [s for s in (_sign_at(q, x) for q in chain) if s]
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    return changes(lo) - changes(hi)
