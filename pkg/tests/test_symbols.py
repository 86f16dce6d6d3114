"""Symbol calculus against an independent ladder-matrix quantization oracle."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geodesicnf import (
    WeylPolynomial,
    commutator,
    diagonal_eigenvalue_polynomial,
    linear_symplectic_substitute,
    moyal_product,
    solve_twisted_ode,
    transvectant,
)
from geodesicnf.fourier import PeriodicCoefficient

from oracles import BLOCK, MODES, monomial_matrix, random_symbol, weyl_matrix

L = 2.0 * np.pi


def _const(value, dim=1):
    return WeylPolynomial.constant(value, dim, L)


def _coord(which, i=0, dim=1):
    return WeylPolynomial.coordinate(which, i, dim, L)


def _entries(p: WeylPolynomial, s: float = 0.0):
    return {key: complex(np.asarray(p.coefficient(*key)(s)).reshape(()))
            for key in p.sorted_keys()}


def test_commutator_of_coordinates_is_exactly_two():
    c = commutator(_coord("z"), _coord("zbar"))
    assert c.sorted_keys() == [((0,), (0,))]
    assert _entries(c)[((0,), (0,))] == 2.0 + 0.0j


def test_first_order_products_of_coordinates():
    z, zb = _coord("z"), _coord("zbar")
    assert _entries(moyal_product(z, zb)) == {((0,), (0,)): 1.0,
                                              ((1,), (1,)): 1.0}
    assert _entries(moyal_product(zb, z)) == {((0,), (0,)): -1.0,
                                              ((1,), (1,)): 1.0}


def test_product_matches_matrix_oracle(rng):
    worst = 0.0
    for _ in range(8):
        a = random_symbol(rng)
        b = random_symbol(rng)
        ab = moyal_product(a, b)
        for s in (0.0, 1.7):
            Ma, Mb = weyl_matrix(a, s), weyl_matrix(b, s)
            Mab = weyl_matrix(ab, s)
            lhs = (Ma @ Mb)[:BLOCK, :BLOCK]
            err = np.max(np.abs(lhs - Mab[:BLOCK, :BLOCK]))
            worst = max(worst, err / max(np.max(np.abs(lhs)), 1e-30))
    assert worst < 1e-10


def test_adjoint_matches_matrix_adjoint(rng):
    p = random_symbol(rng, hermitian=False)
    M = weyl_matrix(p, 0.4)[:BLOCK, :BLOCK]
    Madj = weyl_matrix(p.adjoint(), 0.4)[:BLOCK, :BLOCK]
    scale = max(np.max(np.abs(M)), 1.0)
    assert np.max(np.abs(Madj - M.conj().T)) < 1e-12 * scale


def test_hermitian_symbol_quantizes_hermitian(rng):
    p = random_symbol(rng, hermitian=True)
    assert p.hermitian_defect() < 1e-12
    M = weyl_matrix(p, 2.2)[:BLOCK, :BLOCK]
    assert np.max(np.abs(M - M.conj().T)) < 1e-11 * max(np.max(np.abs(M)), 1.0)


@settings(deadline=None, max_examples=25)
@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
def test_moyal_product_is_associative(sa, sb, sc):
    polys = [random_symbol(np.random.default_rng(seed), max_degree=2,
                           bandwidth=1, hermitian=False)
             for seed in (sa, sb, sc)]
    a, b, c = polys
    lhs = moyal_product(moyal_product(a, b), c)
    rhs = moyal_product(a, moyal_product(b, c))
    scale = max(lhs.max_abs(), 1.0)
    assert (lhs - rhs).max_abs() < 1e-10 * scale


def test_transvectant_grading(rng):
    a = random_symbol(rng, max_degree=3, hermitian=False)
    b = random_symbol(rng, max_degree=3, hermitian=False)
    t0 = transvectant(0, a, b)
    assert (t0 - a.pointwise_product(b)).max_abs() < 1e-12
    for k in (1, 2):
        tk = transvectant(k, a, b)
        tk_swap = transvectant(k, b, a)
        assert (tk - tk_swap.scale((-1.0) ** k)).max_abs() < 1e-11


def test_weyl_eigenvalue_table_matches_matrix_diagonal():
    q = np.arange(BLOCK)
    x = q + 0.5
    for m in range(1, 4):
        p = WeylPolynomial.monomial((m,), (m,), PeriodicCoefficient.constant(1.0, L), 1)
        poly = diagonal_eigenvalue_polynomial(p, table="weyl")
        values = sum(c * x ** e[0] for e, c in poly.items())
        diag = np.diag(monomial_matrix(m, m, MODES))[:BLOCK]
        assert np.max(np.abs(values - diag)) < 1e-9


def test_contracted_eigenvalue_table_anchors():
    one = PeriodicCoefficient.constant(1.0, L)
    z2 = WeylPolynomial.monomial((1,), (1,), one, 1)
    z4 = WeylPolynomial.monomial((2,), (2,), one, 1)
    assert diagonal_eigenvalue_polynomial(z2, table="contracted") == {(1,): 1.0}
    quartic = diagonal_eigenvalue_polynomial(z4, table="contracted")
    assert quartic == {(2,): 1.0, (1,): 1.0, (0,): -0.5}


def test_linear_symplectic_substitution_preserves_products(rng):
    # rotation mixing z and zbar is symplectic for any phase pair
    phi, psi = 0.6, -1.1
    ch, sh = np.cosh(0.4), np.sinh(0.4)
    M = [[ch * np.exp(1j * phi), sh * np.exp(1j * psi)],
         [sh * np.exp(-1j * psi), ch * np.exp(-1j * phi)]]
    a = random_symbol(rng, max_degree=2, hermitian=False)
    b = random_symbol(rng, max_degree=2, hermitian=False)
    lhs = linear_symplectic_substitute(moyal_product(a, b), M)
    rhs = moyal_product(linear_symplectic_substitute(a, M),
                        linear_symplectic_substitute(b, M))
    assert (lhs - rhs).max_abs() < 1e-9 * max(lhs.max_abs(), 1.0)


def test_solve_twisted_ode_round_trip(rng):
    alpha = (0.9,)
    d = random_symbol(rng, max_degree=3, bandwidth=2, hermitian=False)
    for mode in ("full", "offdiagonal"):
        q, f = solve_twisted_ode(d, alpha, mode=mode, resonance_tol=1e-8)
        # d/ds q + twist terms reproduces d - f: checked via the residual hook
        from geodesicnf.symbols import monodromy_defect
        assert monodromy_defect(q, d, f, alpha) < 1e-9
