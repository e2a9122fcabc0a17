"""Property suites exercising every quantitative guarantee of the package.

Each suite checks one independently derivable fact (exact symmetry, limit
law, closed form, or cross-route agreement) at a pinned tolerance.  The
CLI ``selftest`` command runs them at full size; ``fast=True`` shrinks the
random-draw counts for quick smoke runs.  All draws use fixed seeds so
results are reproducible.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import dynamics, model, spectral, sweep
from .errors import DegeneratePolesError, NumericalError

_SEED = 20260810


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float
    n_checks: int


def draw_params(rng: np.random.Generator, kappa: float = 1.0,
                min_gamma: float = 0.1) -> model.SystemParams:
    """Random physical parameters, log-uniform magnitudes in [0.1, 10]*kappa."""
    def mag() -> float:
        return kappa * 10.0 ** rng.uniform(-1.0, 1.0)

    def signed() -> float:
        return mag() * (1.0 if rng.uniform() < 0.5 else -1.0)

    return model.SystemParams(
        gamma_b=max(mag(), min_gamma * kappa),
        gamma_c=max(mag(), min_gamma * kappa),
        delta_b=signed(), delta_c=signed(),
        drive_g=mag(), drive_detuning=signed(), kappa=kappa)


def _populations_quadrature(params, opts=None):
    poles = model.find_poles(params)
    p_b, e_b = spectral.population("b", params, opts, poles=poles)
    p_c, e_c = spectral.population("c", params, opts, poles=poles)
    return p_b, p_c, e_b, e_c


def _suite_symmetric_case(fast: bool):
    worst = 0.0
    n = 0
    step_opts = dynamics.StepOptions()
    for delta in (0.5, 2.0, 5.0):
        for g in (0.0, 0.5, 1.0, 2.0, 5.0):
            params = model.SystemParams(gamma_b=1.0, gamma_c=1.0, delta_b=delta,
                                        delta_c=-delta, drive_g=g,
                                        drive_detuning=0.0, kappa=1.0)
            p_b, p_c, _, _ = _populations_quadrature(params)
            worst = max(worst, abs(p_b - p_c))
            t_b, t_c, _ = dynamics.populations_time_domain(params, step_opts)
            worst = max(worst, abs(t_b - t_c))
            n += 2
    return worst < 1e-6, f"max |P_b - P_c| = {worst:.3e} (tol 1e-6)", n


def _suite_markov_limit(fast: bool):
    base = model.SystemParams(gamma_b=0.6, gamma_c=0.3, delta_b=2.0,
                              delta_c=-2.0, drive_g=1.0, drive_detuning=2.0,
                              kappa=100.0)
    expected = base.gamma_b / base.gamma_c
    result = spectral.branching_ratio(base)
    rel = abs(result.ratio - expected) / expected
    ratios = []
    for g in (0.0, 1.0, 2.0):
        ratios.append(spectral.branching_ratio(base.replace(drive_g=g)).ratio)
    spread = max(ratios) / min(ratios) - 1.0
    ok = rel < 0.01 and spread < 0.01
    return ok, (f"|ratio - {expected:g}|/{expected:g} = {rel:.3e}, spread over "
                f"G in (0,1,2) = {spread:.3e} (tol 1e-2)"), 4


def _suite_unitarity(fast: bool):
    n_draws = 60 if fast else 1000
    rng = np.random.default_rng(_SEED)
    step_opts = dynamics.StepOptions(rel_tol=1e-8, abs_tol=1e-10,
                                     norm_cutoff=1e-8)
    worst_q = worst_t = 0.0
    for _ in range(n_draws):
        params = draw_params(rng)
        p_b, p_c, _, _ = _populations_quadrature(params)
        worst_q = max(worst_q, abs(p_b + p_c - 1.0))
        t_b, t_c, _ = dynamics.populations_time_domain(params, step_opts)
        worst_t = max(worst_t, abs(t_b + t_c - 1.0))
    ok = worst_q < 1e-6 and worst_t < 1e-5
    return ok, (f"max |P_b + P_c - 1|: quadrature {worst_q:.3e} (tol 1e-6), "
                f"time domain {worst_t:.3e} (tol 1e-5), {n_draws} draws"), 2 * n_draws


def _suite_route_equivalence(fast: bool):
    n_draws = 30 if fast else 200
    rng = np.random.default_rng(_SEED + 1)
    step_opts = dynamics.StepOptions()
    worst = 0.0
    for _ in range(n_draws):
        params = draw_params(rng)
        p_b, p_c, _, _ = _populations_quadrature(params)
        t_b, t_c, _ = dynamics.populations_time_domain(params, step_opts)
        worst = max(worst, abs(p_b - t_b), abs(p_c - t_c))
    return worst < 1e-5, (f"max |P_i^spectral - P_i^time| = {worst:.3e} "
                          f"(tol 1e-5, {n_draws} draws)"), 2 * n_draws


def _suite_residue_oracle(fast: bool):
    n_draws = 40 if fast else 200
    rng = np.random.default_rng(_SEED + 2)
    worst = 0.0
    used = 0
    for _ in range(n_draws):
        params = draw_params(rng)
        try:
            r_b = spectral.population_residue_oracle("b", params)
            r_c = spectral.population_residue_oracle("c", params)
        except DegeneratePolesError:
            continue
        p_b, p_c, _, _ = _populations_quadrature(params)
        worst = max(worst, abs(p_b - r_b), abs(p_c - r_c))
        used += 1
    return worst < 1e-8, (f"max |P_i^quadrature - P_i^residue| = {worst:.3e} "
                          f"(tol 1e-8, {used}/{n_draws} non-degenerate draws)"), 2 * used


def _suite_degenerate_detuning(fast: bool):
    n_draws = 20 if fast else 100
    rng = np.random.default_rng(_SEED + 3)
    worst = 0.0
    for _ in range(n_draws):
        p = draw_params(rng)
        params = p.replace(delta_c=p.delta_b)
        result = spectral.branching_ratio(params)
        expected = params.gamma_b / params.gamma_c
        worst = max(worst, abs(result.ratio / expected - 1.0))
    return worst < 1e-9, (f"max relative |ratio - gamma_b/gamma_c| = {worst:.3e} "
                          f"(tol 1e-9, {n_draws} draws)"), n_draws


def _match_multisets(a: np.ndarray, b: np.ndarray) -> float:
    """Greedy nearest-neighbour matching; returns the worst pair distance."""
    b = list(b)
    worst = 0.0
    for x in a:
        dists = [abs(x - y) for y in b]
        k = int(np.argmin(dists))
        worst = max(worst, dists[k])
        b.pop(k)
    return worst


def _suite_pole_consistency(fast: bool):
    n_draws = 150 if fast else 1000
    rng = np.random.default_rng(_SEED + 4)
    worst_re = -np.inf
    worst_match = 0.0
    for _ in range(n_draws):
        params = draw_params(rng)
        poles = model.find_poles(params)
        worst_re = max(worst_re, float(poles.roots.real.max()))
        eigvals = np.linalg.eigvals(dynamics.generator_matrix(params))
        worst_match = max(worst_match, _match_multisets(poles.roots, eigvals))
    ok = worst_re <= 1e-10 and worst_match < 1e-9
    return ok, (f"max Re(root) = {worst_re:.3e} (tol 1e-10), max root/eigenvalue "
                f"distance = {worst_match:.3e} (tol 1e-9, {n_draws} draws)"), 2 * n_draws


def _suite_drive_effect(fast: bool):
    base = model.SystemParams(gamma_b=1.0, gamma_c=1.0, delta_b=2.0,
                              delta_c=-2.0, drive_g=0.0, drive_detuning=2.0,
                              kappa=1.0)
    r0 = spectral.branching_ratio(base).ratio
    r2 = spectral.branching_ratio(base.replace(drive_g=2.0)).ratio
    ok = abs(r0 - 1.0) < 1e-6 and abs(r2 - 1.0) > 0.01
    return ok, (f"ratio(G=0) - 1 = {r0 - 1.0:.3e} (tol 1e-6), "
                f"|ratio(G=2) - 1| = {abs(r2 - 1.0):.3e} (> 0.01 required)"), 2


def _suite_figure4_symmetry(fast: bool):
    # establish the mirror law against the time-domain oracle first
    step_opts = dynamics.StepOptions()
    worst_oracle = 0.0
    for g, det in ((0.5, 1.0), (1.0, 2.0), (2.0, 5.0)):
        params = model.SystemParams(gamma_b=1.0, gamma_c=1.0, delta_b=2.0,
                                    delta_c=-2.0, drive_g=g,
                                    drive_detuning=det, kappa=1.0)
        p_b, p_c, _, _ = _populations_quadrature(params)
        t_b, t_c, _ = dynamics.populations_time_domain(params, step_opts)
        worst_oracle = max(worst_oracle, abs(p_b - t_b), abs(p_c - t_c))
        mirrored = params.replace(drive_detuning=-det)
        m_b, m_c, _, _ = _populations_quadrature(mirrored)
        worst_oracle = max(worst_oracle, abs((p_b / p_c) * (m_b / m_c) - 1.0))
    if worst_oracle >= 1e-5:
        return False, (f"mirror establishment vs time domain failed: "
                       f"{worst_oracle:.3e}"), 6

    n_points = 21 if fast else 201
    table = sweep.run_sweep(sweep.preset_fig4(n_points=n_points), "quadrature")
    det_col = table.column("drive_detuning")
    g_col = table.column("drive_g")
    ratio_col = table.column("ratio")
    ratios = {(det, g): r for det, g, r in zip(det_col, g_col, ratio_col)}
    worst_zero = 0.0
    worst_mirror = 0.0
    n = 0
    for (det, g), r in ratios.items():
        if det == 0.0:
            worst_zero = max(worst_zero, abs(r - 1.0))
            n += 1
        elif det > 0.0:
            worst_mirror = max(worst_mirror, abs(r * ratios[(-det, g)] - 1.0))
            n += 1
    ok = worst_zero < 1e-6 and worst_mirror < 1e-6
    return ok, (f"max |ratio(0) - 1| = {worst_zero:.3e}, max "
                f"|ratio(D)*ratio(-D) - 1| = {worst_mirror:.3e} (tol 1e-6, "
                f"{n_points} detunings x 3 drives)"), n + 6


def _suite_dynamics_closed_forms(fast: bool):
    # lossless Rabi oscillation
    g = 1.0
    params = model.SystemParams(gamma_b=0.0, gamma_c=0.0, delta_b=0.0,
                                delta_c=0.0, drive_g=g, drive_detuning=0.0,
                                kappa=1.0)
    traj = dynamics.evolve(params, 6.0, n_samples=161)
    worst_rabi = float(np.max(np.abs(traj.excited_population
                                     - np.cos(g * traj.times) ** 2)))
    # single-channel resonant decay: two-pole inverse Laplace transform
    params2 = model.SystemParams(gamma_b=1.0, gamma_c=0.0, delta_b=0.0,
                                 delta_c=0.0, drive_g=0.0, drive_detuning=0.0,
                                 kappa=1.0)
    traj2 = dynamics.evolve(params2, 12.0, n_samples=161)
    t = traj2.times
    s3 = np.sqrt(3.0)
    alpha_exact = np.exp(-t / 2.0) * (np.cos(s3 * t / 2.0)
                                      + np.sin(s3 * t / 2.0) / s3)
    worst_two_pole = float(np.max(np.abs(traj2.alpha - alpha_exact)))
    ok = worst_rabi < 1e-8 and worst_two_pole < 1e-6
    return ok, (f"Rabi |alpha|^2 vs cos^2: {worst_rabi:.3e} (tol 1e-8); "
                f"two-pole alpha(t): {worst_two_pole:.3e} (tol 1e-6)"), 2


def _suite_determinism(fast: bool):
    spec = sweep.preset_fig3a(n_points=7)
    first = sweep.run_sweep(spec, "quadrature").to_csv()
    second = sweep.run_sweep(spec, "quadrature").to_csv()
    parallel = sweep.run_sweep(spec, "quadrature", n_workers=2).to_csv()
    ok = first == second == parallel
    return ok, ("serial/serial and serial/parallel CSV byte-identical"
                if ok else "CSV outputs differ across runs or worker counts"), 3


SUITES = {
    "symmetric_case": _suite_symmetric_case,
    "markov_limit": _suite_markov_limit,
    "unitarity": _suite_unitarity,
    "route_equivalence": _suite_route_equivalence,
    "residue_oracle": _suite_residue_oracle,
    "degenerate_detuning": _suite_degenerate_detuning,
    "pole_consistency": _suite_pole_consistency,
    "drive_effect": _suite_drive_effect,
    "figure4_symmetry": _suite_figure4_symmetry,
    "dynamics_closed_forms": _suite_dynamics_closed_forms,
    "determinism": _suite_determinism,
}


def run_suite(name: str, fast: bool = False) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; valid: {', '.join(SUITES)}")
    start = time.perf_counter()
    try:
        passed, detail, n_checks = SUITES[name](fast)
    except NumericalError as exc:
        passed, detail, n_checks = False, f"{type(exc).__name__}: {exc}", 0
    return SuiteResult(name=name, passed=passed, detail=detail,
                       seconds=time.perf_counter() - start, n_checks=n_checks)


def run_suites(names=None, fast: bool = False) -> list[SuiteResult]:
    if names is None:
        names = list(SUITES)
    for name in names:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}; valid: {', '.join(SUITES)}")
    return [run_suite(name, fast=fast) for name in names]
