"""Resolvent description of a driven four-level emitter in a structured vacuum.

One excited state decays to two final states through a single damped cavity
mode whose vacuum has a Lorentzian spectral density of half-width ``kappa``;
an auxiliary level is coupled to the excited state by a coherent drive of
Rabi frequency ``2 * drive_g`` detuned by ``drive_detuning``.  In the
single-excitation sector everything follows from the Laplace-domain
excited-state amplitude

    alpha_hat(z) = 1 / ( z + G^2 / (z + i*Delta)
                           + kappa*gamma_b / (z + kappa - i*delta_b)
                           + kappa*gamma_c / (z + kappa - i*delta_c) )

with G = drive_g and Delta = drive_detuning.  Clearing the three
self-energy fractions turns the denominator into a monic complex quartic
whose roots are the dressed decaying modes of the system; this module owns
that polynomial, its roots and their residues.
"""

from __future__ import annotations

import cmath
import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ParameterError,
    ResolventPoleError,
    RootRefinementError,
    SelfEnergyPoleError,
)

# Relative residual at which a polished root is accepted.
TOL_ROOT = 1e-10

# |z - pole| below this (scaled) distance counts as sitting on a self-energy pole.
_EXCLUSION_TOL = 1e-13

_DENOM_FLOOR = 1e-280


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of one simulation instance.

    All quantities are angular frequencies in the same unit system; the
    survey presets use units of ``kappa`` (i.e. ``kappa = 1``).

    Attributes
    ----------
    gamma_b, gamma_c : float
        Cavity-enhanced decay rates into the two final states.  The
        underlying mode couplings are ``g_i = sqrt(kappa * gamma_i)``
        (resonant-cavity decay rate ``2 gamma_i = 2 |g_i|^2 / kappa``).
    delta_b, delta_c : float
        Detunings of the two emission lines from the cavity center
        frequency.
    drive_g : float
        Coherent-drive coupling G (half the Rabi frequency), real and >= 0.
    drive_detuning : float
        Detuning Delta of the drive laser from the driven transition.
    kappa : float
        Half-width of the Lorentzian vacuum, > 0.
    """

    gamma_b: float
    gamma_c: float
    delta_b: float
    delta_c: float
    drive_g: float
    drive_detuning: float
    kappa: float = 1.0

    @property
    def coupling_b(self) -> float:
        """Mode coupling g_b = sqrt(kappa * gamma_b)."""
        return math.sqrt(self.kappa * self.gamma_b)

    @property
    def coupling_c(self) -> float:
        """Mode coupling g_c = sqrt(kappa * gamma_c)."""
        return math.sqrt(self.kappa * self.gamma_c)

    def frequency_scale(self) -> float:
        """Largest frequency in the problem; used to scale tolerances."""
        return max(
            self.kappa,
            abs(self.delta_b),
            abs(self.delta_c),
            self.drive_g,
            abs(self.drive_detuning),
        )

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)


def validate(params: SystemParams) -> SystemParams:
    """Check the invariants of ``params`` and return it unchanged.

    Raises ``ParameterError`` naming the first violated invariant.
    """
    for name in ("gamma_b", "gamma_c", "delta_b", "delta_c",
                 "drive_g", "drive_detuning", "kappa"):
        value = getattr(params, name)
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ParameterError(f"{name} must be a real number")
        if not math.isfinite(value):
            raise ParameterError(f"{name} must be finite")
    if params.kappa <= 0:
        raise ParameterError("kappa must be > 0")
    if params.gamma_b < 0:
        raise ParameterError("gamma_b must be >= 0")
    if params.gamma_c < 0:
        raise ParameterError("gamma_c must be >= 0")
    if params.drive_g < 0:
        raise ParameterError("drive_g must be >= 0")
    return params


def require_decay_channel(params: SystemParams) -> SystemParams:
    """Additionally require at least one open decay channel."""
    validate(params)
    if params.gamma_b + params.gamma_c <= 0:
        raise ParameterError("gamma_b + gamma_c must be > 0")
    return params


def _exclusion_tol(z: complex, params: SystemParams) -> float:
    return _EXCLUSION_TOL * max(1.0, abs(z), params.frequency_scale())


def denominator_value(z: complex, params: SystemParams) -> complex:
    """Resolvent denominator evaluated term by term at ``z``.

    Self-energy terms with vanishing coupling are dropped exactly, so the
    corresponding pole points are regular.  Raises ``SelfEnergyPoleError``
    when ``z`` sits on the pole of an active term.
    """
    z = complex(z)
    tol = _exclusion_tol(z, params)
    total = z
    if params.drive_g > 0:
        d = z + 1j * params.drive_detuning
        if abs(d) < tol:
            raise SelfEnergyPoleError(
                f"z = {z} lies on the drive self-energy pole -i*drive_detuning")
        total += params.drive_g * params.drive_g / d
    if params.gamma_b > 0:
        d = z + params.kappa - 1j * params.delta_b
        if abs(d) < tol:
            raise SelfEnergyPoleError(
                f"z = {z} lies on the b-channel self-energy pole -kappa + i*delta_b")
        total += params.kappa * params.gamma_b / d
    if params.gamma_c > 0:
        d = z + params.kappa - 1j * params.delta_c
        if abs(d) < tol:
            raise SelfEnergyPoleError(
                f"z = {z} lies on the c-channel self-energy pole -kappa + i*delta_c")
        total += params.kappa * params.gamma_c / d
    return total


def resolvent(z: complex, params: SystemParams) -> complex:
    """Excited-state amplitude alpha_hat(z) in the Laplace domain."""
    d = denominator_value(z, params)
    if abs(d) < _DENOM_FLOOR:
        raise ResolventPoleError(f"resolvent pole: denominator underflowed at z = {z}")
    return 1.0 / d


def numerator_polynomial_value(z: complex, params: SystemParams) -> complex:
    """Product of the three self-energy denominators.

    Multiplying alpha_hat by this clears all fractions, so
    ``alpha_hat(z) = numerator / quartic`` with the quartic from
    :func:`denominator_polynomial`.
    """
    z = complex(z)
    return ((z + 1j * params.drive_detuning)
            * (z + params.kappa - 1j * params.delta_b)
            * (z + params.kappa - 1j * params.delta_c))


@dataclass(frozen=True)
class QuarticPolynomial:
    """Monic degree-4 complex polynomial, coefficients in ascending order."""

    coefficients: tuple[complex, complex, complex, complex, complex]

    def __post_init__(self):
        if len(self.coefficients) != 5:
            raise ValueError("quartic needs exactly five coefficients")
        if self.coefficients[4] != 1.0:
            raise ValueError("quartic must be monic (c4 == 1)")
        if not all(cmath.isfinite(c) for c in self.coefficients):
            raise ValueError("quartic coefficients must be finite")

    def value(self, z: complex) -> complex:
        c0, c1, c2, c3, _ = self.coefficients
        return (((z + c3) * z + c2) * z + c1) * z + c0

    def derivative_value(self, z: complex) -> complex:
        c0, c1, c2, c3, _ = self.coefficients
        return ((4.0 * z + 3.0 * c3) * z + 2.0 * c2) * z + c1

    def coefficient_scale(self) -> float:
        return max(1.0, max(abs(c) for c in self.coefficients))


def denominator_polynomial(params: SystemParams) -> QuarticPolynomial:
    """Resolvent denominator with all fractions cleared, as a monic quartic.

    Expanding z*(z+a)*(z+b)*(z+c) + G^2*(z+b)*(z+c) + kappa*gamma_b*(z+a)*(z+c)
    + kappa*gamma_c*(z+a)*(z+b) with a = i*Delta, b = kappa - i*delta_b,
    c = kappa - i*delta_c.  Roots are exactly the poles of the resolvent;
    when a coupling vanishes the corresponding cleared factor survives as a
    spurious root with zero residue.
    """
    validate(params)
    a = 1j * params.drive_detuning
    b = params.kappa - 1j * params.delta_b
    c = params.kappa - 1j * params.delta_c
    g2 = params.drive_g * params.drive_g
    kb = params.kappa * params.gamma_b
    kc = params.kappa * params.gamma_c
    c3 = a + b + c
    c2 = a * b + a * c + b * c + g2 + kb + kc
    c1 = a * b * c + g2 * (b + c) + kb * (a + c) + kc * (a + b)
    c0 = g2 * b * c + kb * a * c + kc * a * b
    return QuarticPolynomial((c0, c1, c2, c3, 1.0 + 0.0j))


@dataclass(frozen=True)
class PoleSet:
    """The four resolvent poles with their residue weights.

    ``residues[k]`` is the residue of alpha_hat at ``roots[k]``, computed as
    numerator(z_k) / P'(z_k); for a spurious root left over from clearing a
    vanished coupling this evaluates to zero.  ``degenerate`` is set when any
    two roots are closer than ``separation_threshold``; residues are then
    unreliable and consumers should fall back to quadrature.
    """

    roots: np.ndarray
    residues: np.ndarray
    degenerate: bool
    separation_threshold: float

    def __iter__(self):
        return iter(zip(self.roots, self.residues))


def _polish_root(poly: QuarticPolynomial, z0: complex, tol_abs: float,
                 max_iter: int) -> complex:
    """Newton refinement keeping the best iterate seen."""
    z = complex(z0)
    best = z
    best_res = abs(poly.value(z))
    for _ in range(max_iter):
        if best_res <= 0.01 * tol_abs:
            break
        dp = poly.derivative_value(z)
        if abs(dp) < _DENOM_FLOOR:
            break
        step = poly.value(z) / dp
        z = z - step
        res = abs(poly.value(z))
        if res < best_res:
            best, best_res = z, res
        if abs(step) <= 1e-17 * max(1.0, abs(z)):
            break
    return best


def find_poles(params: SystemParams, tol_root: float = TOL_ROOT,
               max_iter: int = 60) -> PoleSet:
    """Locate the four poles of the resolvent.

    Companion-matrix eigenvalues of the cleared-fraction quartic seed a
    Newton polish; each refined root must satisfy
    ``|P(z)| <= tol_root * max(1, max|coeff|)``.  Roots are returned sorted
    by (real, imaginary) part so the ordering is reproducible.
    """
    validate(params)
    poly = denominator_polynomial(params)
    desc = np.array(poly.coefficients[::-1], dtype=complex)
    seeds = np.roots(desc)
    tol_abs = tol_root * poly.coefficient_scale()
    roots = np.array([_polish_root(poly, z, tol_abs, max_iter) for z in seeds])
    for z in roots:
        res = abs(poly.value(z))
        if res > tol_abs:
            raise RootRefinementError(
                f"root refinement failed: residual {res:.3e} above "
                f"{tol_abs:.3e} at z = {z}")
    order = np.lexsort((roots.imag, roots.real))
    roots = roots[order]

    threshold = 1e-7 * max(
        params.kappa, abs(params.drive_detuning), abs(params.delta_b),
        abs(params.delta_c), params.drive_g, 1.0)
    degenerate = False
    for i in range(4):
        for j in range(i + 1, 4):
            if abs(roots[i] - roots[j]) < threshold:
                degenerate = True

    residues = np.empty(4, dtype=complex)
    for k, z in enumerate(roots):
        dp = poly.derivative_value(z)
        if abs(dp) < _DENOM_FLOOR:
            residues[k] = complex("nan")
        else:
            residues[k] = numerator_polynomial_value(z, params) / dp
    return PoleSet(roots=roots, residues=residues, degenerate=degenerate,
                   separation_threshold=threshold)
