import numpy as np
import pytest
from hypothesis import given, settings
from numpy.testing import assert_allclose

from cavity_branching.dynamics import (
    StepOptions,
    branching_ratio_time_domain,
    evolve,
    generator_matrix,
    population_time_domain,
    populations_time_domain,
    suggest_t_max,
)
from cavity_branching.errors import ParameterError, SlowConvergenceError
from cavity_branching.model import SystemParams, denominator_polynomial, find_poles
from cavity_branching.spectral import population

from conftest import physical_params


def test_generator_diagonal_without_couplings():
    p = SystemParams(0, 0, 1, -1, 0, 2, 1)
    m = generator_matrix(p)
    assert_allclose(m, np.diag([0, -2j, -1 + 1j, -1 - 1j]), atol=0)


def test_generator_lossless_drive_block_oscillates():
    p = SystemParams(0, 0, 0, 0, 1.5, 0.7, 1)
    eigvals = np.linalg.eigvals(generator_matrix(p))
    drive_block = sorted(eigvals, key=lambda z: abs(z.real))[:2]
    assert max(abs(z.real) for z in drive_block) < 1e-12


@given(physical_params)
@settings(max_examples=200)
def test_generator_characteristic_polynomial_matches_quartic(p):
    m = generator_matrix(p)
    charpoly = np.poly(m)[::-1]  # ascending order
    quartic = np.array(denominator_polynomial(p).coefficients)
    scale = max(1.0, np.abs(quartic).max())
    assert np.abs(charpoly - quartic).max() <= 1e-12 * scale


@given(physical_params)
@settings(max_examples=100)
def test_generator_eigenvalues_match_poles(p):
    from hypothesis import assume

    poles = find_poles(p)
    # a defective double root is only locatable to ~sqrt(eps); the flag
    # marks exactly those configurations
    assume(not poles.degenerate)
    eigvals = np.linalg.eigvals(generator_matrix(p))
    roots = list(poles.roots)
    for lam in eigvals:
        k = int(np.argmin([abs(lam - z) for z in roots]))
        assert abs(lam - roots.pop(k)) < 1e-9


def test_evolve_initial_condition():
    traj = evolve(SystemParams(1, 1, 2, -2, 1, 2, 1), t_max=5.0)
    assert traj.times[0] == 0.0
    assert traj.excited_population[0] == pytest.approx(1.0, abs=0)
    assert traj.rho_b[0] == 0.0 and traj.rho_c[0] == 0.0


def test_evolve_rabi_oscillation_closed_form():
    g = 1.0
    p = SystemParams(0, 0, 0, 0, g, 0, 1)
    traj = evolve(p, t_max=6.0, n_samples=161)
    assert_allclose(traj.excited_population, np.cos(g * traj.times) ** 2,
                    atol=1e-8)
    assert_allclose(traj.norm, 1.0, atol=1e-9)


def test_evolve_two_pole_closed_form():
    p = SystemParams(1, 0, 0, 0, 0, 0, 1)
    traj = evolve(p, t_max=12.0, n_samples=161)
    t = traj.times
    s3 = np.sqrt(3.0)
    exact = np.exp(-t / 2) * (np.cos(s3 * t / 2) + np.sin(s3 * t / 2) / s3)
    assert_allclose(traj.alpha, exact, atol=1e-6)


def test_evolve_probability_balance_and_monotone_norm():
    p = SystemParams(1.2, 0.4, 2, -1, 1.5, 0.5, 1)
    traj = evolve(p, t_max=15.0)
    assert_allclose(traj.total_probability, 1.0, atol=1e-7)
    norm = traj.norm
    assert np.all(np.diff(norm) <= 1e-12)


def test_evolve_norm_derivative_matches_pseudo_mode_flux():
    p = SystemParams(1, 0.5, 1, -2, 1, 0, 1)
    traj = evolve(p, t_max=4.0, n_samples=4001)
    t = traj.times
    norm = traj.norm
    flux = 2 * p.kappa * (np.abs(traj.states[:, 2]) ** 2
                          + np.abs(traj.states[:, 3]) ** 2)
    dnorm = np.gradient(norm, t)
    assert np.max(np.abs(dnorm + flux)) < 1e-3


def test_evolve_rejects_bad_inputs():
    p = SystemParams(1, 1, 0, 0, 0, 0, 1)
    with pytest.raises(ParameterError):
        evolve(p, t_max=0.0)
    with pytest.raises(ParameterError):
        evolve(p, t_max=5.0, n_samples=1)
    with pytest.raises(ParameterError):
        StepOptions(rel_tol=0).validated()


def test_population_sole_channel():
    p = SystemParams(1, 0, 1.5, 0, 1.3, 0.7, 1)
    assert population_time_domain("b", p) == pytest.approx(1.0, abs=1e-6)


def test_population_symmetric_case():
    p = SystemParams(1, 1, 2, -2, 1.7, 0, 1)
    p_b, p_c, defect = populations_time_domain(p)
    assert p_b == pytest.approx(0.5, abs=1e-6)
    assert p_c == pytest.approx(0.5, abs=1e-6)
    assert defect < 1e-7


@pytest.mark.parametrize("params", [
    SystemParams(1.3, 0.6, 2.5, -1.0, 0.8, 1.5, 1),
    SystemParams(0.3, 2.1, -4.0, 0.5, 2.0, -3.0, 1),
    # deep-sub-width slow pole: exercises the analytic tail after the cap
    SystemParams(1.0, 1.0, 1.0, -1.0, 0.1, 10.0, 1),
])
def test_population_matches_spectral_route(params):
    poles = find_poles(params)
    for channel in ("b", "c"):
        spectral_value, _ = population(channel, params, poles=poles)
        time_value = population_time_domain(channel, params)
        assert abs(spectral_value - time_value) < 1e-5


def test_markov_rate_equation_limit():
    p = SystemParams(gamma_b=0.6, gamma_c=0.3, delta_b=0, delta_c=0,
                     drive_g=0, drive_detuning=0, kappa=100)
    traj = evolve(p, t_max=5.0, n_samples=501)
    after_transient = traj.times > 10.0 / p.kappa
    ratio = traj.rho_b[after_transient] / traj.rho_c[after_transient]
    assert np.max(np.abs(ratio / 2.0 - 1.0)) < 0.01


def test_slow_convergence_error_carries_partials():
    p = SystemParams(1, 1, 1, -1, 1e-6, 10.0, 1)
    with pytest.raises(SlowConvergenceError) as info:
        populations_time_domain(p)
    assert info.value.bound <= 1.0
    assert len(info.value.partial) == 2


def test_branching_ratio_time_domain_route():
    p = SystemParams(2, 1, 1.3, 1.3, 0.7, -2.1, 1)
    result = branching_ratio_time_domain(p)
    assert result.route == "time_domain"
    assert result.ratio == pytest.approx(2.0, abs=1e-5)


def test_suggest_t_max_reaches_low_norm():
    p = SystemParams(0.7, 0.4, 2, -2, 1, 2, 1)
    t_max = suggest_t_max(p)
    traj = evolve(p, t_max)
    assert traj.norm[-1] < 1e-6


def test_suggest_t_max_rejects_lossless_system():
    p = SystemParams(0, 0, 0, 0, 1, 0, 1)
    with pytest.raises(ParameterError, match="t_max"):
        suggest_t_max(p)
