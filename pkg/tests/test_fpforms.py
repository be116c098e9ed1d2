import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from isotropy.densities import pi0
from isotropy.fpforms import (
    FpForm,
    WittClass,
    bilinear_value,
    census_csv,
    count_zeros,
    count_zeros_naive,
    enumerate_class_census,
    format_form_literal,
    gl_order,
    is_prime,
    orthogonal_order,
    parse_form_literal,
    radical,
    subspace_count,
    witt_class,
)
from isotropy.ratfun import rf_eval


def form(p, n, coeffs):
    return FpForm(p, n, tuple(coeffs))


def random_invertible(rng, p, n):
    while True:
        T = [[rng.randrange(p) for _ in range(n)] for _ in range(n)]
        if _rank(T, p) == n:
            return T


def _rank(rows, p):
    rows = [r[:] for r in rows]
    rank, cols = 0, len(rows[0]) if rows else 0
    for c in range(cols):
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
        rank += 1
    return rank


# -- bilinear form and radical ---------------------------------------------


def test_bilinear_examples():
    q = form(3, 2, [0, 1, 0])  # x1 x2
    assert bilinear_value(q, (1, 0), (0, 1)) == 1
    assert bilinear_value(q, (0, 0), (2, 1)) == 0
    assert bilinear_value(form(2, 1, [1]), (1,), (1,)) == 0


def test_bilinear_dimension_mismatch():
    with pytest.raises(ValueError):
        bilinear_value(form(3, 2, [0, 1, 0]), (1,), (0, 1))


def test_radical_examples():
    assert len(radical(form(5, 3, [0] * 6))) == 3
    rad = radical(form(3, 3, [0, 1, 0, 0, 0, 0]))
    assert len(rad) == 1 and rad[0][:2] == [0, 0] and rad[0][2] % 3
    assert radical(form(2, 1, [1])) == []


# -- classification -----------------------------------------------------------


def test_witt_class_examples():
    assert witt_class(form(3, 3, [0, 1, 0, 0, 0, 1])) == WittClass(1, 1, 3)
    assert witt_class(form(3, 2, [1, 0, 1])) == WittClass(0, 2, 2)
    assert witt_class(form(2, 4, [0] * 10)) == WittClass(0, 0, 4)


def test_witt_class_rejects_bad_triples():
    with pytest.raises(ValueError):
        WittClass(1, 3, 5)
    with pytest.raises(ValueError):
        WittClass(2, 1, 4)


@pytest.mark.parametrize("p,n", [(2, 3), (2, 4), (3, 3), (3, 4), (5, 3)])
def test_witt_class_gl_invariant(p, n):
    rng = random.Random(1000 * p + n)
    for _ in range(3):
        q = form(p, n, [rng.randrange(p) for _ in range(n * (n + 1) // 2)])
        c = witt_class(q)
        for _ in range(200):
            assert witt_class(q.substitute(random_invertible(rng, p, n))) == c


def test_char2_radical_dimension_matches_rank():
    # over F_2 the radical dimension is n minus the rank of Q
    for coeffs in itertools.product(range(2), repeat=6):
        q = form(2, 3, coeffs)
        c = witt_class(q)
        assert len(radical(q)) == c.radical_dim


# -- zero counts --------------------------------------------------------------


def test_count_zeros_examples():
    assert count_zeros(form(3, 2, [0, 1, 0])) == 5
    assert count_zeros(form(5, 2, [0, 0, 0])) == 25
    assert count_zeros(form(2, 2, [1, 1, 1])) == 1


@pytest.mark.parametrize("p,n", [(2, 3), (2, 4), (3, 3), (5, 2), (7, 2)])
def test_count_zeros_matches_enumeration(p, n):
    d = n * (n + 1) // 2
    if p**d <= 729:
        corpus = itertools.product(range(p), repeat=d)
    else:
        rng = random.Random(p * n)
        corpus = (tuple(rng.randrange(p) for _ in range(d)) for _ in range(300))
    for coeffs in corpus:
        q = form(p, n, coeffs)
        assert count_zeros(q) == count_zeros_naive(q)


@given(st.sampled_from([2, 3, 5]), st.integers(1, 5), st.data())
def test_count_zeros_property(p, n, data):
    if p**n > 10**4:
        return
    coeffs = data.draw(st.lists(st.integers(0, p - 1), min_size=n * (n + 1) // 2, max_size=n * (n + 1) // 2))
    q = form(p, n, coeffs)
    assert count_zeros(q) == count_zeros_naive(q)


# -- group orders ---------------------------------------------------------------


def _stabiliser(q: FpForm) -> int:
    n, p = q.n, q.p
    count = 0
    for entries in itertools.product(range(p), repeat=n * n):
        T = [list(entries[r * n:(r + 1) * n]) for r in range(n)]
        if _rank(T, p) == n and q.substitute(T) == q:
            count += 1
    return count


@pytest.mark.parametrize("q,m,want", [
    (form(3, 2, [0, 1, 0]), 0, 4),
    (form(3, 2, [1, 0, 1]), 2, 8),
    (form(2, 3, [1, 0, 0, 0, 1, 1]), 1, 6),  # x1^2 + x2 x3
])
def test_orthogonal_order_brute_force(q, m, want):
    assert _stabiliser(q) == want
    assert orthogonal_order(m, q.n, q.p) == want


def test_orthogonal_order_more_brute_force():
    # two more cases, incl. the anisotropic binary over F_2 and x1^2 over F_5
    assert orthogonal_order(2, 2, 2) == _stabiliser(form(2, 2, [1, 1, 1]))
    assert orthogonal_order(1, 1, 5) == _stabiliser(form(5, 1, [1]))
    assert orthogonal_order(0, 2, 2) == _stabiliser(form(2, 2, [0, 1, 0]))


def test_orthogonal_order_parity_error():
    with pytest.raises(ValueError):
        orthogonal_order(1, 2, 3)
    assert orthogonal_order(0, 0, 7) == 1


def _subspaces_by_enumeration(r, n, p):
    spans = set()
    for vecs in itertools.combinations(list(itertools.product(range(p), repeat=n)), r):
        if _rank([list(v) for v in vecs], p) == r:
            span = frozenset(
                tuple(sum(c * v[i] for c, v in zip(cs, vecs)) % p for i in range(n))
                for cs in itertools.product(range(p), repeat=r)
            )
            spans.add(span)
    return len(spans)


def test_subspace_count_examples():
    assert subspace_count(1, 2, 3) == 4
    assert subspace_count(0, 5, 7) == 1
    assert subspace_count(2, 4, 2) == 35 == _subspaces_by_enumeration(2, 4, 2)
    with pytest.raises(ValueError):
        subspace_count(3, 2, 2)


def test_gl_order_small():
    assert gl_order(2, 3) == sum(
        1 for e in itertools.product(range(3), repeat=4) if (e[0] * e[3] - e[1] * e[2]) % 3
    )


# -- census ---------------------------------------------------------------------


def test_census_examples():
    assert enumerate_class_census(2, 2) == {
        WittClass(0, 0, 2): 1, WittClass(0, 1, 2): 3, WittClass(1, 0, 2): 3, WittClass(0, 2, 2): 1,
    }
    assert enumerate_class_census(3, 1) == {WittClass(0, 0, 1): 1, WittClass(0, 1, 1): 2}
    c = enumerate_class_census(3, 3)
    assert sum(c.values()) == 3**6
    assert Fraction(c[WittClass(1, 1, 3)], 3**6) == rf_eval(pi0(1, 1, 3), 3)


def test_census_shard_independence():
    assert enumerate_class_census(3, 3, workers=1) == enumerate_class_census(3, 3, workers=3)


def test_census_budget():
    with pytest.raises(ValueError):
        enumerate_class_census(3, 4, budget=1000)


@pytest.mark.parametrize("p,n", [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (5, 2), (5, 3), (7, 2)])
def test_orbit_size_consistency(p, n):
    census = enumerate_class_census(p, n)
    for cls, count in census.items():
        l, m, _ = cls
        reg = 2 * l + m
        if reg == 0:
            assert count == 1
            continue
        want = subspace_count(n - reg, n, p) * gl_order(reg, p) // orthogonal_order(m, reg, p)
        if m == 1 and p != 2:
            want *= 2
        assert count == want


def test_census_csv():
    text = census_csv(enumerate_class_census(2, 2))
    assert text.splitlines()[0] == "l,m,n,count"
    assert "1,0,2,3" in text.splitlines()


# -- literal format and misc --------------------------------------------------


def test_literal_round_trip():
    q = form(5, 3, [1, 2, 3, 4, 0, 1])
    assert parse_form_literal(format_form_literal(q)) == (5, 3, q.coeffs)
    assert parse_form_literal("n=2; [1,0,-1]") == (None, 2, (1, 0, -1))
    for bad in ("n=2; [1,0]", "p=3 n=1 [1]", "n=1; [x]"):
        with pytest.raises(ValueError):
            parse_form_literal(bad)


def test_is_prime():
    small = [n for n in range(200) if is_prime(n)]
    assert small == [n for n in range(2, 200) if all(n % d for d in range(2, n))]
    assert is_prime(2**61 - 1) and not is_prime(2**61 + 1)
