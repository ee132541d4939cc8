"""Time integration: linear flows, Lawson stepping, normal-form systems and Lie transforms."""
import numpy as np
import pytest

from helpers import random_state
from nrlimit.grid import Field, make_grid, norm_hk, norm_lp
from nrlimit.hamalg import normal_form
from nrlimit.multipliers import PhysicalParams, complex_hamiltonian
from nrlimit.propagators import (
    EvolutionSpec,
    LieTransform,
    StepRejected,
    evolve,
    initial_dt,
    kg_linear_flow,
    kg_symbol,
    select_dt,
    symbol_difference,
    ur_linear_flow,
    ur_symbol,
)


@pytest.fixture
def psi0():
    g = make_grid(1, 64)
    return Field.from_function(g, lambda x: 0.1 * (np.exp(1j * x) + 0.5 * np.exp(-2j * x)))


# -- symbols -------------------------------------------------------------------


def test_kg_symbol_is_c_japc():
    k2 = np.array([0.0, 1.0, 4.0, 100.0])
    np.testing.assert_allclose(kg_symbol(3.0, k2), 3.0 * np.sqrt(9.0 + k2))


@pytest.mark.parametrize("r", [1, 2, 3])
def test_ur_symbol_truncates_taylor_series(r):
    c = 10.0
    k2 = np.linspace(0, 25, 11)
    x = k2 / c**2
    exact = c**2 * np.sqrt(1 + x)
    # truncation error is O(x^{r+1}) times c^2
    assert np.all(np.abs(exact - ur_symbol(c, r, k2)) <= 2 * c**2 * x ** (r + 1) + 1e-12)


@pytest.mark.parametrize("r", [1, 2, 3])
@pytest.mark.parametrize("c", [4.0, 64.0, 1e4])
def test_symbol_difference_is_accurate(r, c):
    import mpmath

    mpmath.mp.dps = 50
    k2 = np.array([0.0, 1.0, 9.0, 49.0])
    got = symbol_difference(c, r, k2)
    for kk, val in zip(k2, got):
        x = mpmath.mpf(kk) / c**2
        exact = c**2 * mpmath.sqrt(1 + x) - c**2 * sum(mpmath.binomial(0.5, j) * x**j for j in range(r + 1))
        assert abs(val - float(exact)) <= 1e-12 * max(abs(float(exact)), 1e-300) + 1e-300


# -- linear flows ----------------------------------------------------------------


def test_linear_flows_are_unitary_per_step(psi0):
    for system in ("kg_linear", "u_r_linear"):
        spec = EvolutionSpec(system, PhysicalParams(16.0), 0.01, 0.5, r=2, sample_every=0.01)
        tr = evolve(spec, psi0)
        assert np.max(np.abs(np.diff(tr.mass))) / tr.mass[0] <= 1e-12


def test_linear_flow_group_and_reversibility(psi0):
    a = kg_linear_flow(kg_linear_flow(psi0, 5.0, 0.2), 5.0, 0.3)
    np.testing.assert_allclose(a.values, kg_linear_flow(psi0, 5.0, 0.5).values, atol=1e-13)
    b = ur_linear_flow(ur_linear_flow(psi0, 5.0, 3, 0.4), 5.0, 3, -0.4)
    np.testing.assert_allclose(b.values, psi0.values, atol=1e-13)


def test_stepped_linear_flow_matches_exact(psi0):
    spec = EvolutionSpec("kg_linear", PhysicalParams(4.0), 0.01, 0.3)
    np.testing.assert_allclose(evolve(spec, psi0).final.values, kg_linear_flow(psi0, 4.0, 0.3).values, atol=1e-12)


# -- spec validation -----------------------------------------------------------


def test_spec_validation():
    p = PhysicalParams(4.0)
    with pytest.raises(ValueError):
        EvolutionSpec("nope", p, 0.1, 1.0)
    with pytest.raises(ValueError):
        EvolutionSpec("nlkg", p, 0.3, 1.0)
    with pytest.raises(ValueError):
        EvolutionSpec("nlkg", p, 0.1, 1.0, sample_every=0.25)
    assert EvolutionSpec("nlkg_complex", p, 0.1, 1.0).ncomp == 2


def test_wrong_state_shape_rejected(psi0):
    with pytest.raises(ValueError):
        evolve(EvolutionSpec("nlkg_complex", PhysicalParams(4.0), 0.1, 0.1), psi0)
    with pytest.raises(ValueError):
        evolve(EvolutionSpec("nlkg", PhysicalParams(4.0), 0.1, 0.1), (psi0, psi0))


# -- nonlinear systems -----------------------------------------------------------


def test_zero_coupling_reduces_to_linear_flow(psi0):
    spec = EvolutionSpec("nlkg", PhysicalParams(4.0, lam=0.0), 0.01, 0.2)
    np.testing.assert_allclose(evolve(spec, psi0).final.values, kg_linear_flow(psi0, 4.0, 0.2).values, atol=1e-12)


def test_lawson_is_fourth_order(psi0):
    p = PhysicalParams(2.0)
    ref = evolve(EvolutionSpec("nlkg", p, 0.5 / 512, 0.5), psi0).final
    errs = [norm_lp(evolve(EvolutionSpec("nlkg", p, 0.5 / m, 0.5), psi0).final - ref) for m in (16, 32, 64)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(12.0 < q < 20.0 for q in ratios), ratios


def test_nlkg_monitor_matches_physical_hamiltonian(psi0):
    p = PhysicalParams(4.0, lam=1.0)
    tr = evolve(EvolutionSpec("nlkg", p, 0.01, 0.01), psi0)
    assert np.isclose(tr.hamiltonian[0], complex_hamiltonian(psi0, p), rtol=1e-13)


def test_nlkg_conserves_hamiltonian_at_selected_step(psi0):
    spec = EvolutionSpec("nlkg", PhysicalParams(8.0), 0.005, 1.0, sample_every=0.005)
    sel = select_dt(spec, psi0, tol=1e-11, kappa=0.5)
    assert sel.valid
    assert sel.trajectory.max_drift() < 1e-8


def test_normal_form_flows_conserve_mass_and_energy(psi0):
    for system in ("nf_order1", "nf_order2"):
        tr = evolve(EvolutionSpec(system, PhysicalParams(4.0), 0.002, 0.5, sample_every=0.05), psi0)
        assert np.max(np.abs(tr.mass - tr.mass[0])) / tr.mass[0] < 1e-10
        assert tr.max_drift() < 1e-9


def test_complex_systems_reduce_when_phi_vanishes(psi0):
    p = PhysicalParams(4.0)
    zero = Field.zeros(psi0.grid)
    for cplx, real in (("nlkg_complex", "nlkg"), ("nf_complex_order1", "nf_order1")):
        a = evolve(EvolutionSpec(cplx, p, 0.002, 0.2), (psi0, zero))
        b = evolve(EvolutionSpec(real, p, 0.002, 0.2), psi0)
        np.testing.assert_allclose(a.final.values, b.final.values, atol=1e-12)
        assert np.abs(a.states[-1][1]).max() < 1e-14


def test_complex_nlkg_conserves_charge_and_energy(rng):
    g = make_grid(1, 32)
    psi, phi = random_state(g, rng, two_component=True, kmax=2, amplitude=0.1)
    tr = evolve(EvolutionSpec("nlkg_complex", PhysicalParams(2.0), 0.002, 0.2, sample_every=0.02), (psi, phi))
    assert tr.max_drift() < 1e-9
    # the U(1) rotation of the complex field acts as psi -> cos psi - sin phi_bar, generated by 2 Im int psi phi
    charge = [(g.weight * np.sum(tr.field(k, 0).values * tr.field(k, 1).values)).imag for k in range(len(tr.states))]
    assert abs(charge[0]) > 1e-5
    assert np.ptp(charge) < 1e-14


def test_gauge_peeling_only_changes_output(psi0):
    p = PhysicalParams(4.0)
    a = evolve(EvolutionSpec("nlkg", p, 0.01, 0.2), psi0)
    b = evolve(EvolutionSpec("nlkg", p, 0.01, 0.2, gauge_peeled=True), psi0)
    np.testing.assert_allclose(b.final.values, np.exp(-1j * 16.0 * 0.2) * a.final.values, atol=1e-13)


def test_guard_rejects_unstable_runs(psi0):
    spec = EvolutionSpec("nlkg", PhysicalParams(16.0), 0.05, 1.0, guard=1e-12)
    with pytest.raises(StepRejected):
        evolve(spec, psi0 * 10.0)


def test_initial_dt_divides_the_stride(psi0):
    spec = EvolutionSpec("nlkg", PhysicalParams(8.0), 0.005, 1.0, sample_every=0.005)
    dt = initial_dt(spec, psi0, kappa=0.5)
    assert dt <= 0.5 / (4 * 64.0) + 1e-15
    assert abs(0.005 / dt - round(0.005 / dt)) < 1e-9


def test_select_dt_estimate_tracks_true_error(psi0):
    spec = EvolutionSpec("nlkg", PhysicalParams(2.0), 0.05, 0.5, sample_every=0.05)
    sel = select_dt(spec, psi0, tol=1e-9, kappa=2.0)
    ref = evolve(spec.with_dt(sel.dt / 8), psi0)
    true = max(norm_hk(a - b, 2) for a, b in zip(sel.trajectory.fields(), ref.fields()))
    assert sel.valid and true < 10 * max(sel.estimate, 1e-13)


# -- Lie transform ---------------------------------------------------------------


@pytest.mark.parametrize("r", [1, 2])
def test_lie_transform_roundtrip(psi0, r):
    T = LieTransform(psi0.grid, PhysicalParams(4.0), r=r)
    back = T.inverse(T.forward(psi0))
    assert norm_lp(back - psi0) < 1e-12


def test_lie_transform_is_near_identity():
    g = make_grid(1, 64)
    base = Field.from_function(g, lambda x: 0.1 * (np.exp(1j * x) + 0.5 * np.exp(-2j * x)))
    cs = np.array([8.0, 16.0, 32.0])
    dev = [norm_lp(LieTransform(g, PhysicalParams(c), r=1).forward(base) - base) for c in cs]
    slope = np.polyfit(np.log(cs), np.log(dev), 1)[0]
    assert abs(slope + 2.0) < 0.05


def test_lie_transform_changes_mass_only_at_order_eps(psi0):
    # chi_1 is not gauge invariant, so mass changes, but only at order eps
    T = LieTransform(psi0.grid, PhysicalParams(16.0), r=1)
    out = T.forward(psi0)
    assert abs(norm_lp(out) - norm_lp(psi0)) < 1e-3 * norm_lp(psi0)


def test_lie_transform_rejects_bad_direction(psi0):
    T = LieTransform(psi0.grid, PhysicalParams(4.0), chis=normal_form(2, 1).chi)
    with pytest.raises(ValueError):
        T.apply(psi0, "sideways")
