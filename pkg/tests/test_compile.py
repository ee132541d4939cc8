"""Compiled Hamiltonians: energies, gradients, vector fields and the gauge oracle."""
from fractions import Fraction

import numpy as np
import pytest

from helpers import random_hampoly, random_state
from nrlimit.grid import Field, make_grid
from nrlimit.hamalg import PHI, PHIBAR, PSI, PSIBAR, Factor, HamPoly, gauge_average, h0, normal_form
from nrlimit.hamalg.compile import (
    CompiledHamiltonian,
    compile_vector_field,
    evaluate,
    numeric_gauge_average_oracle,
    quadratic_symbol,
)


def fd_gradient_pairing(comp, state, direction, which, h=1e-5):
    """``int dH/d(bar) * conj(direction)`` from central differences along ``direction``."""
    def shift(s):
        if which == 0:
            return state + direction * s if isinstance(state, Field) else (state[0] + direction * s, state[1])
        return (state[0], state[1] + direction * s)

    d1 = (comp.energy(shift(h)) - comp.energy(shift(-h))) / (2 * h)
    d2 = (comp.energy(shift(1j * h)) - comp.energy(shift(-1j * h))) / (2 * h)
    return 0.5 * (d1 + 1j * d2)


def test_h0_energy_and_vector_field(grid1, rng):
    psi = random_state(grid1, rng)
    comp = CompiledHamiltonian(h0(), grid1, dealias=False)
    assert np.isclose(comp.energy(psi), np.sum(np.abs(psi.values) ** 2) * grid1.weight)
    np.testing.assert_allclose(comp.vector_field(psi).values, 1j * psi.values, atol=1e-13)


def test_quartic_vector_field(grid1, rng):
    psi = random_state(grid1, rng)
    H = HamPoly.monomial(Fraction(3, 8), [PSI, PSI, PSIBAR, PSIBAR], 1)
    X = compile_vector_field(H, grid1, lam=2.0, dealias=False)(psi)
    f = psi.values
    np.testing.assert_allclose(X.values, 1j * 0.75 * 2.0 * np.abs(f) ** 2 * f, atol=1e-12)


def test_laplacian_energy_in_two_dimensions(rng):
    g = make_grid(2, 16)
    psi = random_state(g, rng, kmax=3)
    H = HamPoly.monomial(-1, [Factor(1, False, 1), Factor(1, True)])
    expected = g.weight * np.sum(g.k2 * np.abs(psi.spectral) ** 2)
    assert np.isclose(evaluate(H, psi), expected, rtol=1e-12)


def test_two_component_vector_field_signs(grid1, rng):
    psi, phi = random_state(grid1, rng, two_component=True)
    X = CompiledHamiltonian(h0(True), grid1, dealias=False).vector_field((psi, phi))
    np.testing.assert_allclose(X[0].values, 1j * psi.values, atol=1e-13)
    np.testing.assert_allclose(X[1].values, -1j * phi.values, atol=1e-13)


def test_single_field_rejected_for_two_component_hamiltonian(grid1, rng):
    comp = CompiledHamiltonian(h0(True), grid1)
    with pytest.raises(ValueError):
        comp.energy(random_state(grid1, rng))


@pytest.mark.parametrize("seed", range(10))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    two = bool(seed % 2)
    H = random_hampoly(rng, terms=3, max_degree=6, two_component=two)
    g = make_grid(1, 64)
    state = random_state(g, rng, two_component=two, kmax=3, amplitude=0.4)
    comp = CompiledHamiltonian(H, g, lam=0.8, dealias=False)
    for which, wrt in ((0, PSIBAR), (1, PHIBAR)) if two else ((0, PSIBAR),):
        d = random_state(g, rng, kmax=3)
        exact = g.weight * np.sum(comp.gradient(state, wrt).values * np.conj(d.values))
        fd = fd_gradient_pairing(comp, state, d, which)
        assert abs(exact - fd) <= 1e-6 * max(abs(exact), 1e-8)


def test_dealiased_vector_field_is_band_limited(grid1, rng):
    psi = random_state(grid1, rng, kmax=20)
    comp = CompiledHamiltonian(normal_form(2, 1).Z[1], grid1, dealias=True)
    out = comp.vector_field_arrays(psi.spectral)[0]
    assert np.all(out[~grid1.dealias_mask] == 0)


@pytest.mark.parametrize("seed", range(5))
def test_gauge_oracle_matches_symbolic_average(seed):
    rng = np.random.default_rng(seed)
    two = bool(seed % 2)
    H = random_hampoly(rng, terms=4, max_degree=6, two_component=two)
    g = make_grid(1, 32)
    state = random_state(g, rng, two_component=two)
    a = numeric_gauge_average_oracle(H, state)
    b = evaluate(gauge_average(H), state)
    assert abs(a - b) <= 1e-10 * max(1.0, abs(b))


def test_gauge_oracle_rejects_too_few_nodes(grid1, rng):
    H = HamPoly.monomial(1, [PSI] * 4)
    with pytest.raises(ValueError):
        numeric_gauge_average_oracle(H, random_state(grid1, rng), Q=5)


def test_quadratic_symbol_of_dispersion(grid1):
    H = normal_form(2, 2).hamiltonian()
    sym = quadratic_symbol(H[1], grid1) + quadratic_symbol(H[2], grid1) / 16.0
    np.testing.assert_allclose(sym, 0.5 * grid1.k2 - grid1.k2**2 / 128.0)


def test_quadratic_symbol_rejects_non_resonant_terms(grid1):
    with pytest.raises(ValueError):
        quadratic_symbol(HamPoly.monomial(1, [PSI, PSI]), grid1)


def test_weighted_sum_of_hamiltonians(grid1, rng):
    psi, phi = random_state(grid1, rng, two_component=True)
    A = HamPoly.monomial(1, [PSI, PHI, PSIBAR, PHIBAR], 1)
    B = h0(True)
    comp = CompiledHamiltonian([(A, 0.25), (B, 2.0)], grid1, lam=3.0, dealias=False)
    expected = 0.25 * 3.0 * evaluate(A, (psi, phi)) + 2.0 * evaluate(B, (psi, phi))
    assert np.isclose(comp.energy((psi, phi)), expected, rtol=1e-12)
