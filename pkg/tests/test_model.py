import numpy as np
import pytest
from hypothesis import assume, given, settings
from numpy.testing import assert_allclose

from cavity_branching.errors import (
    ParameterError,
    ResolventPoleError,
    SelfEnergyPoleError,
)
from cavity_branching.model import (
    SystemParams,
    denominator_polynomial,
    denominator_value,
    find_poles,
    numerator_polynomial_value,
    resolvent,
    validate,
)

from conftest import complex_points, physical_params


def test_validate_accepts_physical_params():
    p = SystemParams(gamma_b=1, gamma_c=1, delta_b=2, delta_c=-2,
                     drive_g=1, drive_detuning=2, kappa=1)
    assert validate(p) is p


def test_validate_rejects_zero_kappa():
    p = SystemParams(1, 1, 0, 0, 0, 0, kappa=0.0)
    with pytest.raises(ParameterError, match="kappa must be > 0"):
        validate(p)


def test_validate_rejects_negative_gamma():
    p = SystemParams(gamma_b=-0.1, gamma_c=1, delta_b=0, delta_c=0,
                     drive_g=0, drive_detuning=0)
    with pytest.raises(ParameterError, match="gamma_b must be >= 0"):
        validate(p)


def test_validate_rejects_nonfinite():
    p = SystemParams(1, 1, float("inf"), 0, 0, 0, 1)
    with pytest.raises(ParameterError, match="delta_b must be finite"):
        validate(p)


def test_resolvent_resonant_undriven_point():
    p = SystemParams(1, 1, 0, 0, 0, 0, 1)
    assert resolvent(0.0, p) == pytest.approx(0.5)


def test_resolvent_free_atom_is_inverse_z():
    p = SystemParams(0, 0, 1, -1, 0, 2, 1)
    assert resolvent(1.0, p) == pytest.approx(1.0)
    assert resolvent(2j, p) == pytest.approx(-0.5j)


def test_resolvent_driven_single_channel_value():
    # hand evaluation: denominator = -i + i + (1+i)/2 at z = -i
    p = SystemParams(1, 0, 0, 0, 1, 0, 1)
    assert resolvent(-1j, p) == pytest.approx(1.0 - 1.0j, abs=1e-14)


def test_resolvent_rejects_self_energy_pole():
    p = SystemParams(1, 1, 0, 0, 1, 2, 1)
    with pytest.raises(SelfEnergyPoleError):
        resolvent(-2j, p)
    # same point is regular once the drive is off
    assert resolvent(-2j, p.replace(drive_g=0.0)) == pytest.approx(
        1.0 / denominator_value(-2j, p.replace(drive_g=0.0)))


def test_resolvent_pole_underflow():
    p = SystemParams(0, 0, 0, 0, 0, 0, 1)
    with pytest.raises(ResolventPoleError):
        resolvent(1e-300, p)


@given(physical_params, complex_points)
def test_resolvent_inverts_denominator(p, z):
    try:
        value = resolvent(z, p)
    except (SelfEnergyPoleError, ResolventPoleError):
        assume(False)
    assert value * denominator_value(z, p) == pytest.approx(1.0, rel=1e-12)


@given(physical_params, complex_points)
def test_quartic_equals_cleared_fractions(p, z):
    try:
        d = denominator_value(z, p)
    except SelfEnergyPoleError:
        assume(False)
    poly = denominator_polynomial(p)
    expected = d * numerator_polynomial_value(z, p)
    scale = sum(abs(c) * abs(z) ** k for k, c in enumerate(poly.coefficients))
    assert abs(poly.value(z) - expected) <= 1e-10 * max(scale, 1.0)


def test_quartic_factored_roots_without_couplings():
    p = SystemParams(0, 0, 0, 0, 0, 1, 1)
    poly = denominator_polynomial(p)
    for root in (0.0, -1j, -1.0, -1.0):
        assert abs(poly.value(root)) < 1e-14


@given(physical_params)
def test_quartic_conjugation_symmetry(p):
    mirrored = p.replace(delta_b=-p.delta_b, delta_c=-p.delta_c,
                         drive_detuning=-p.drive_detuning)
    direct = np.array(denominator_polynomial(p).coefficients)
    flipped = np.array(denominator_polynomial(mirrored).coefficients)
    assert_allclose(flipped, direct.conj(), rtol=0, atol=0)


def test_find_poles_factored_case():
    p = SystemParams(0, 0, 1, -1, 0, 2, 1)
    poles = find_poles(p)
    remaining = list(poles.roots)
    for expected in (0.0 + 0j, -2j, -1 + 1j, -1 - 1j):
        k = int(np.argmin(np.abs(np.array(remaining) - expected)))
        assert abs(remaining.pop(k) - expected) < 1e-12
    assert not poles.degenerate


@given(physical_params)
@settings(max_examples=200)
def test_poles_have_nonpositive_real_parts(p):
    poles = find_poles(p)
    assert poles.roots.real.max() <= 1e-10


@given(physical_params)
def test_pole_residuals_meet_tolerance(p):
    poly = denominator_polynomial(p)
    tol = 1e-10 * poly.coefficient_scale()
    for z in find_poles(p).roots:
        assert abs(poly.value(z)) <= tol


@given(physical_params)
def test_residues_sum_to_one(p):
    poles = find_poles(p)
    assume(not poles.degenerate)
    assert poles.residues.sum() == pytest.approx(1.0, abs=1e-8)


def test_spurious_drive_root_has_zero_residue():
    p = SystemParams(1, 1, 1, -1, 0, 2, 1)
    poles = find_poles(p)
    k = int(np.argmin(np.abs(poles.roots - (-2j))))
    assert abs(poles.roots[k] - (-2j)) < 1e-12
    assert abs(poles.residues[k]) < 1e-12


def test_degenerate_double_root_is_flagged():
    # with no couplings and equal detunings the cleared factor doubles up
    p = SystemParams(0, 0, 0.5, 0.5, 0, 2, 1)
    poles = find_poles(p)
    assert poles.degenerate
    close = np.abs(poles.roots - (-1 + 0.5j)) < 1e-7
    assert close.sum() == 2


@given(physical_params)
@settings(max_examples=50)
def test_resolvent_blows_up_at_poles(p):
    poles = find_poles(p)
    assume(not poles.degenerate)
    for z, r in poles:
        if abs(r) < 1e-6:
            continue
        offset = 1e-7 * (1 + 1j)
        try:
            value = resolvent(z + offset, p)
        except SelfEnergyPoleError:
            assume(False)
        # near a simple pole |resolvent| ~ |r| / distance
        assert abs(value) > 0.05 * abs(r) / abs(offset)
