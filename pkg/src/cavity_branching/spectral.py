"""Asymptotic channel populations by frequency-domain integration.

The probability that the emitter ends in final state ``i`` after emitting
its photon is

    P_i = kappa*gamma_i * Integral dw  (kappa/pi) / (kappa^2 + w^2)
                                        * |alpha_hat(-i*(w - delta_i))|^2

over the full real line (``w`` measured from the cavity center).  Two
evaluations are provided: adaptive quadrature on a tan-compactified domain
with breakpoints seeded at the resolvent peaks, and an exact residue sum
usable as an oracle whenever the four poles are simple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import model
from .errors import (
    CancellationLossError,
    DegeneratePolesError,
    NumericalError,
    ParameterError,
    RatioUndefinedError,
    SelfEnergyPoleError,
    ToleranceNotReachedError,
)

_HALF_PI = math.pi / 2.0


@dataclass(frozen=True)
class QuadratureOptions:
    """Tolerances and limits for the population integral."""

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000
    pole_breakpoints: bool = True

    def validated(self) -> "QuadratureOptions":
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ParameterError("quadrature tolerances must be > 0")
        if self.max_subdivisions < 16:
            raise ParameterError("max_subdivisions must be >= 16")
        return self


@dataclass(frozen=True)
class BranchingResult:
    """Populations of the two final states and their ratio."""

    p_b: float
    p_c: float
    ratio: float
    err_b: float
    err_c: float
    route: str

    def ratio_error(self) -> float:
        """First-order propagated error of the ratio."""
        if self.p_b == 0.0 or self.p_c == 0.0:
            return float("nan")
        return abs(self.ratio) * math.hypot(self.err_b / self.p_b,
                                            self.err_c / self.p_c)


def _channel_fields(channel: str, params: model.SystemParams) -> tuple[float, float]:
    if channel == "b":
        return params.gamma_b, params.delta_b
    if channel == "c":
        return params.gamma_c, params.delta_c
    raise ParameterError(f"channel must be 'b' or 'c', got {channel!r}")


def _breakpoints(params: model.SystemParams, delta_i: float, scale: float,
                 poles: model.PoleSet | None, max_points: int) -> list[float]:
    """Map integrand peak positions to the compactified variable.

    The integrand has Lorentzian peaks of width |Re z_k| at
    w = delta_i - Im(z_k) for each resolvent pole z_k, plus the vacuum
    weight peak at w = 0.  Each peak is bracketed at a few multiples of
    its width: a deep-sub-scale peak whose center is itself a panel
    endpoint would otherwise fall between the Gauss-Kronrod nodes of the
    neighbouring panels and evade the error estimator entirely.
    """
    peaks = [(0.0, params.kappa)]
    if poles is not None:
        for z in poles.roots:
            width = max(abs(z.real), 1e-12 * scale)
            peaks.append((delta_i - z.imag, width))
    centers = set()
    brackets = set()
    for center, width in peaks:
        centers.add(center)
        if width > 0.02 * scale:
            continue  # wide peaks are resolved by ordinary bisection
        for factor in (2.0, -2.0, 20.0, -20.0, 200.0, -200.0):
            brackets.add(center + factor * width)
    lo, hi = -_HALF_PI + 1e-12, _HALF_PI - 1e-12

    def to_thetas(positions):
        return {t for t in (math.atan2(w, scale) for w in positions)
                if lo < t < hi}

    theta_centers = to_thetas(centers)
    theta_all = theta_centers | to_thetas(brackets)
    # QUADPACK needs fewer break points than subdivisions; keep the peak
    # centers when the budget is tight.
    if len(theta_all) > max_points:
        theta_all = set(sorted(theta_centers)[:max_points])
    return sorted(theta_all)


def population(channel: str, params: model.SystemParams,
               opts: QuadratureOptions | None = None,
               poles: model.PoleSet | None = None) -> tuple[float, float]:
    """Asymptotic population of final state ``channel`` and its error estimate.

    The improper frequency integral is compactified with w = s*tan(theta),
    s the largest system frequency, and evaluated by adaptive Gauss-Kronrod
    quadrature with subdivision breakpoints at the peak positions.  The
    channel prefactor kappa*gamma_i is applied outside the integral so that
    channels sharing a detuning produce bitwise-identical integrals.
    """
    model.validate(params)
    opts = (opts or QuadratureOptions()).validated()
    gamma_i, delta_i = _channel_fields(channel, params)
    if gamma_i == 0.0:
        return 0.0, 0.0

    if poles is None and opts.pole_breakpoints:
        poles = model.find_poles(params)
    scale = params.frequency_scale()
    kappa = params.kappa
    weight_norm = kappa / math.pi

    def integrand(theta: float) -> float:
        t = math.tan(theta)
        w = scale * t
        try:
            amp = model.resolvent(-1j * (w - delta_i), params)
        except SelfEnergyPoleError:
            # the resolvent vanishes at active self-energy poles
            return 0.0
        mag2 = amp.real * amp.real + amp.imag * amp.imag
        return weight_norm / (kappa * kappa + w * w) * mag2 * scale * (1.0 + t * t)

    points = None
    if opts.pole_breakpoints:
        points = _breakpoints(params, delta_i, scale, poles,
                              max_points=opts.max_subdivisions - 2)
    result = quad(integrand, -_HALF_PI, _HALF_PI,
                  epsabs=opts.abs_tol, epsrel=opts.rel_tol,
                  limit=opts.max_subdivisions, points=points or None,
                  full_output=1)
    value, abserr = result[0], result[1]
    if not (math.isfinite(value) and math.isfinite(abserr)):
        raise NumericalError(
            "divergent integrand in population quadrature (this should be "
            "unreachable for physical parameters)")
    if len(result) > 3:
        target = max(opts.abs_tol, opts.rel_tol * abs(value))
        if abserr > 10.0 * target:
            raise ToleranceNotReachedError(
                f"tolerance not reached for channel {channel}: estimate "
                f"{value:.12g} with error {abserr:.3e}",
                value=kappa * gamma_i * value, error=kappa * gamma_i * abserr)
    if value < -1e-9 or value * kappa * gamma_i > 1.0 + 1e-6:
        raise NumericalError(
            f"population estimate {kappa * gamma_i * value:.6g} outside [0, 1]")
    return kappa * gamma_i * value, kappa * gamma_i * abserr


def branching_ratio(params: model.SystemParams,
                    opts: QuadratureOptions | None = None) -> BranchingResult:
    """Both channel populations and the ratio P_b / P_c (quadrature route)."""
    model.require_decay_channel(params)
    opts = (opts or QuadratureOptions()).validated()
    poles = model.find_poles(params) if opts.pole_breakpoints else None
    p_b, e_b = population("b", params, opts, poles=poles)
    p_c, e_c = population("c", params, opts, poles=poles)
    if p_c <= 0.0 or p_c < 10.0 * e_c:
        raise RatioUndefinedError(
            f"ratio undefined: P_c = {p_c:.3e} +- {e_c:.3e} is consistent with zero")
    return BranchingResult(p_b=p_b, p_c=p_c, ratio=p_b / p_c,
                           err_b=e_b, err_c=e_c, route="quadrature")


def population_residue_oracle(channel: str, params: model.SystemParams) -> float:
    """Exact population via residue calculus; oracle for :func:`population`.

    The integrand is a rational function of the frequency.  Closing the
    contour in the upper half plane picks up the reflected resolvent poles
    (the vacuum-weight pole contributes nothing because the resolvent
    vanishes on active self-energy poles), giving

        P_i = 2*kappa^2*gamma_i * sum_k conj(r_k) * alpha_hat(-conj(z_k))
                                    / (kappa^2 + (delta_i - i*conj(z_k))^2)

    over the four poles z_k with residues r_k.  Requires simple poles;
    raises ``DegeneratePolesError`` otherwise so callers can fall back to
    quadrature.
    """
    model.validate(params)
    gamma_i, delta_i = _channel_fields(channel, params)
    if gamma_i == 0.0:
        return 0.0
    poles = model.find_poles(params)
    if poles.degenerate:
        raise DegeneratePolesError(
            "degenerate poles: residue expansion needs simple poles")
    kappa = params.kappa
    res_scale = float(np.abs(poles.residues).max())
    total = 0.0 + 0.0j
    abs_sum = 0.0
    for z_k, r_k in poles:
        if abs(r_k) <= 1e-14 * res_scale:
            # spurious root from a vanished coupling; contributes nothing
            continue
        zc = -z_k.conjugate()
        amp = model.resolvent(zc, params)
        w_k = delta_i - 1j * z_k.conjugate()
        term = r_k.conjugate() * amp / (kappa * kappa + w_k * w_k)
        total += term
        abs_sum += abs(term)
    value = 2.0 * kappa * kappa * gamma_i * total.real
    mag = 2.0 * kappa * kappa * gamma_i * abs_sum
    if mag > 1e6 * max(abs(value), 1e-300):
        raise CancellationLossError(
            f"cancellation loss in residue sum: |terms| = {mag:.3e} "
            f"vs result {value:.3e}")
    imag = 2.0 * kappa * kappa * gamma_i * abs(total.imag)
    if imag > 1e-7 * max(mag, 1e-300):
        raise CancellationLossError(
            f"residue sum has spurious imaginary part {imag:.3e}")
    return value
