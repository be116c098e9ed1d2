import math
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy

from isotropy.densities import rho_closed
from isotropy.global_density import (
    REFERENCE_VALUES,
    TAIL_CONSTANT,
    _grid_matrices,
    certify_tail_constant,
    euler_product,
    inertia,
    primes_up_to,
    real_k_isotropic,
    reference_table,
    rho_global,
    rho_infinity_mc,
    table_csv,
    table_markdown,
)
from isotropy.qp import ZForm
from isotropy.ratfun import rf_eval


def test_primes():
    assert primes_up_to(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert primes_up_to(1) == []
    assert len(primes_up_to(10**4)) == 1229


# -- Euler product --------------------------------------------------------------


def test_euler_examples():
    assert euler_product(1, 4, 10**4).decimal(8) == "0.98743625"
    assert euler_product(5, 12, 10**4).decimal(8) == "0.97859528"
    r = euler_product(1, 5, 10)
    assert r.partial_product == 1 and r.tail_lower_bound == 1
    d = euler_product(2, 5, 100)
    assert d.degenerate and d.partial_product == 0


def test_euler_invariants():
    for k in range(1, 4):
        r = euler_product(k, 2 * k + 2, 500)
        assert 0 <= r.tail_lower_bound <= 1
        assert r.partial_product <= 1
        assert r.lower <= r.partial_product


@pytest.mark.parametrize("k", range(1, 6))
def test_tail_constant_certified(k):
    assert certify_tail_constant(k)
    # and the check is not vacuous: a too-small constant is rejected
    assert not certify_tail_constant(k, Fraction(1, 5))


@pytest.mark.parametrize("k", range(1, 6))
def test_tail_bound_sound_at_random_large_primes(k):
    rng = random.Random(k)
    f = rho_closed(k, 2 * k + 2)
    for _ in range(20):
        q = sympy.nextprime(rng.randrange(10**4, 10**9))
        assert 0 <= 1 - rf_eval(f, q) <= TAIL_CONSTANT / Fraction(q) ** 3


@pytest.mark.parametrize("k", (1, 2, 3))
def test_partial_products_monotone_and_bracketed(k):
    bounds = [50, 200, 1000, 3000]
    results = [euler_product(k, 2 * k + 2, b) for b in bounds]
    for a, b in zip(results, results[1:]):
        assert b.partial_product <= a.partial_product
        assert a.lower <= b.partial_product <= a.upper
        assert a.lower <= b.lower


# -- real place -----------------------------------------------------------------


def _sympy_signature(Q: ZForm):
    m = sympy.Matrix(Q.matrix())
    poly = sympy.Poly(m.charpoly(sympy.Symbol("x")).as_expr(), sympy.Symbol("x"))
    zero = 0
    while poly.eval(0) == 0 and poly.degree() > 0:
        poly = sympy.Poly(sympy.quo(poly.as_expr(), sympy.Symbol("x")), sympy.Symbol("x"))
        zero += 1
    # real_roots lists roots with multiplicity
    roots = sympy.real_roots(poly) if poly.degree() > 0 else []
    pos = sum(1 for r in roots if r > 0)
    neg = sum(1 for r in roots if r < 0)
    return pos, neg, zero


def test_inertia_matches_characteristic_polynomial():
    rng = random.Random(7)
    for i in range(50):
        n = rng.randint(1, 5)
        coeffs = [rng.randint(-4, 4) for _ in range(n * (n + 1) // 2)]
        if i % 5 == 0:
            coeffs = [c * (j % 2) for j, c in enumerate(coeffs)]  # push towards singular forms
        Q = ZForm(n, tuple(coeffs))
        assert inertia(Q) == _sympy_signature(Q), str(Q)


def test_definite_binary_not_isotropic():
    assert inertia(ZForm.diagonal([1, 1])) == (2, 0, 0)
    assert not real_k_isotropic(inertia(ZForm.diagonal([1, 1])), 1)
    assert real_k_isotropic(inertia(ZForm(2, (0, 1, 0))), 1)


def test_real_isotropy_by_construction():
    # build the isotropic subspace explicitly from an eigenbasis
    rng = np.random.default_rng(8)
    for _ in range(100):
        n = int(rng.integers(2, 7))
        a = rng.uniform(-1, 1, size=(n, n))
        m = (a + a.T) / 2
        if rng.random() < 0.3:
            v = rng.normal(size=(n, 1))
            m = m - (m @ v) @ (v.T @ m) / (v.T @ m @ v).item()  # rank defect
        lam, vec = np.linalg.eigh(m)
        tol = 1e-9
        pos = [i for i in range(n) if lam[i] > tol]
        neg = [i for i in range(n) if lam[i] < -tol]
        zer = [i for i in range(n) if abs(lam[i]) <= tol]
        basis = [vec[:, i] / math.sqrt(lam[i]) + vec[:, j] / math.sqrt(-lam[j]) for i, j in zip(pos, neg)]
        basis += [vec[:, i] for i in zer]
        if basis:
            B = np.array(basis)
            assert np.allclose(B @ m @ B.T, 0, atol=1e-7)
            assert np.linalg.matrix_rank(B) == len(basis)
        assert len(basis) == min(len(pos), len(neg)) + len(zer)


def test_grid_matrices_are_exact():
    u = np.array([[0, 2**52, 2**53]], dtype=np.int64)
    m = _grid_matrices(u, 2)
    assert m[0].tolist() == [[-1.0, 0.0], [0.0, 1.0]]
    u = np.array([[3 * 2**50, 1, 2**53 - 7]], dtype=np.int64)
    m = _grid_matrices(u, 2)
    want = [Fraction(int(x) - 2**52, 2**52) for x in u[0]]
    assert Fraction(m[0, 0, 0]) == want[0]
    assert Fraction(m[0, 0, 1]) == want[1] / 2
    assert Fraction(m[0, 1, 1]) == want[2]


def test_float_path_agrees_with_exact_path():
    # margin 1 routes every sample through exact elimination
    for k, n in [(1, 3), (1, 4), (2, 5)]:
        fast = rho_infinity_mc(k, n, samples=600, seed=3, margin=1e-9)
        exact = rho_infinity_mc(k, n, samples=600, seed=3, margin=1.0)
        assert exact.exact_fallbacks == 600
        assert fast.hits == exact.hits


def test_rho_infinity_examples():
    r = rho_infinity_mc(1, 4, samples=2 * 10**5, seed=1)
    assert abs(r.estimate - 0.9823) < 0.002
    r = rho_infinity_mc(3, 8, samples=2 * 10**5, seed=2)
    assert abs(r.estimate - 0.9623) < 0.002
    assert rho_infinity_mc(2, 3, samples=1000).hits == 0


def test_rho_infinity_worker_invariance():
    a = rho_infinity_mc(1, 4, samples=2 * 4096 + 5, seed=9, workers=1)
    b = rho_infinity_mc(1, 4, samples=2 * 4096 + 5, seed=9, workers=2)
    assert a.hits == b.hits


# -- global density ---------------------------------------------------------------


def test_rho_global_examples():
    g = rho_global(1, 4, 10**4, samples=2 * 10**5, seed=4)
    assert abs(g.value - 0.9699) < 0.002
    assert g.tail_error < 1e-8
    assert rho_global(2, 5).value == 0
    g5 = rho_global(1, 5, 10**3, samples=20000, seed=5)
    assert g5.value == g5.infinity.estimate


def test_reference_table_small():
    rows = reference_table(samples=5000, seed=1, ks=[1, 2])
    assert [r["k"] for r in rows] == [1, 2]
    assert rows[0]["prod_p"] == REFERENCE_VALUES[1][0]
    csv = table_csv(rows)
    assert csv.splitlines()[0].startswith("k,prod_p,prod_p_lower,prod_p_upper,rho_inf,rho_inf_stderr")
    assert table_markdown(rows).count("\n") == 3
