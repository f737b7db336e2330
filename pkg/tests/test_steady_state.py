"""Stationary density and occupation probability against independent oracles."""

import math

import numpy as np
import pytest

from stickslip.core import NoiseRegime, make_potential
from stickslip.errors import NotNormalizable
from stickslip.presets import reduced_from_poly
from stickslip.steady_state import (
    occupation_probability_asymptotic,
    occupation_probability_exact,
    stationary_density,
)


def _sliding_system(a_minus, a_plus, kappa_tilde, bump=(0.0, 0.0, 0.0)):
    """Layer drift = linear interpolant + (1 - s^2) * quadratic bump, which
    keeps the endpoint values pinned to the outer drifts."""
    mid = 0.5 * (a_plus + a_minus)
    half = 0.5 * (a_plus - a_minus)
    b0, b1, b2 = bump
    # (1 - s^2)(b0 + b1 s + b2 s^2) = b0 + b1 s + (b2 - b0) s^2 - b1 s^3 - b2 s^4
    coeffs = np.array([mid + b0, half + b1, b2 - b0, -b1, -b2])
    eps = 0.01
    return reduced_from_poly(coeffs, eps=eps, kappa=kappa_tilde * math.sqrt(eps), r=0.1)


def _brute_force_occupation(pot, width_factor=40.0, n=200_001):
    """Dense-grid trapezoid evaluation of the occupation ratio, with the
    largest exponent subtracted and the layer edges as exact grid points.
    Entirely independent of the package's quadrature engine."""
    red = pot.reduced
    kt2 = red.kappa_tilde**2
    w = 1.0 + width_factor * kt2 * max(1.0 / red.a_minus, 1.0 / (-red.a_plus))
    pieces = [np.linspace(-w, -1.0, n), np.linspace(-1.0, 1.0, n), np.linspace(1.0, w, n)]
    exponents = [-2.0 * np.asarray(pot(ys)) / kt2 for ys in pieces]
    shift = max(e.max() for e in exponents)
    masses = [np.trapezoid(np.exp(e - shift), ys) for e, ys in zip(exponents, pieces)]
    return masses[1] / sum(masses)


# ---------------------------------------------------------------------------
# stationary density


def test_symmetric_potential_gives_even_density_peaked_at_origin():
    red = _sliding_system(1.0, -1.0, kappa_tilde=1.0)
    density = stationary_density(make_potential(red))
    peak = density.grid[np.argmax(density.values)]
    assert abs(peak) < 2.0 * (density.grid[1] - density.grid[0])
    ys = np.linspace(0.0, 2.0, 50)
    assert np.allclose(density(ys), density(-ys), rtol=1e-12)
    assert np.all(density.values >= 0.0)


def test_crossing_configuration_is_not_normalizable():
    red = reduced_from_poly([1.0], eps=0.01, kappa=0.1, r=0.1)  # a- = a+ = 1
    with pytest.raises(NotNormalizable):
        stationary_density(make_potential(red))
    with pytest.raises(NotNormalizable):
        occupation_probability_exact(make_potential(red))


def test_density_total_mass_against_trapezoid_oracle():
    red = _sliding_system(2.0, -1.0, kappa_tilde=0.5)
    pot = make_potential(red)
    density = stationary_density(pot)
    kt2 = red.kappa_tilde**2
    w = 1.0 + 40.0 * kt2 * max(1.0 / red.a_minus, 1.0 / (-red.a_plus))
    ys = np.linspace(-w, w, 400_001)
    mass = np.trapezoid(density(ys), ys)
    assert abs(mass - 1.0) <= 1e-8


# ---------------------------------------------------------------------------
# occupation probability: examples


def test_occupation_large_noise_near_inverse_square():
    red = _sliding_system(1.0, -1.0, kappa_tilde=10.0)
    p = occupation_probability_exact(make_potential(red))
    assert abs(p - 0.02) <= 0.1 * 0.02


def test_occupation_small_noise_near_one():
    red = _sliding_system(1.0, -1.0, kappa_tilde=0.1)
    assert occupation_probability_exact(make_potential(red)) >= 0.99


def test_occupation_exact_matches_brute_force_grid():
    red = _sliding_system(2.0, -3.0, kappa_tilde=1.0)
    pot = make_potential(red)
    p = occupation_probability_exact(pot)
    assert 0.0 < p < 1.0
    assert p == pytest.approx(_brute_force_occupation(pot), abs=1e-7)


def test_occupation_brute_force_with_asymmetric_bump():
    red = _sliding_system(1.5, -0.7, kappa_tilde=0.8, bump=(0.3, -0.5, 0.2))
    pot = make_potential(red)
    assert occupation_probability_exact(pot) == pytest.approx(
        _brute_force_occupation(pot), abs=1e-7
    )


# ---------------------------------------------------------------------------
# occupation probability: asymptotics


def test_asymptotic_large_kappa_formula():
    red = _sliding_system(1.0, -1.0, kappa_tilde=10.0)
    result = occupation_probability_asymptotic(make_potential(red))
    assert result.regime is NoiseRegime.LARGE_KAPPA
    assert result.p_asym == pytest.approx(4.0 / (2.0 * 100.0))


def test_asymptotic_small_kappa_is_one():
    red = _sliding_system(1.0, -1.0, kappa_tilde=0.05)
    result = occupation_probability_asymptotic(make_potential(red))
    assert result.regime is NoiseRegime.SMALL_KAPPA
    assert result.p_asym == 1.0


def test_asymptotic_intermediate_falls_back_to_exact():
    red = _sliding_system(1.0, -1.0, kappa_tilde=1.0)
    result = occupation_probability_asymptotic(make_potential(red))
    assert result.regime is NoiseRegime.INTERMEDIATE
    assert result.p_asym == result.p_exact


# ---------------------------------------------------------------------------
# invariants


def test_occupation_decreases_with_noise():
    rng = np.random.default_rng(4)
    kts = np.geomspace(0.2, 5.0, 9)
    for _ in range(20):
        a_minus = rng.uniform(0.3, 3.0)
        a_plus = -rng.uniform(0.3, 3.0)
        bump = tuple(rng.uniform(-0.4, 0.4, size=3) * min(a_minus, -a_plus))
        values = []
        for kt in kts:
            red = _sliding_system(a_minus, a_plus, kappa_tilde=float(kt), bump=bump)
            values.append(occupation_probability_exact(make_potential(red)))
        assert all(a > b for a, b in zip(values, values[1:]))


def test_large_noise_residual_decays_like_fourth_power():
    kts = np.array([5.0, 10.0, 20.0, 40.0])
    residuals = []
    for kt in kts:
        red = _sliding_system(1.0, -2.0, kappa_tilde=float(kt), bump=(0.2, 0.1, 0.0))
        p = occupation_probability_exact(make_potential(red))
        harmonic = 1.0 / red.a_minus + 1.0 / (-red.a_plus)
        residuals.append(abs(p - 4.0 / (harmonic * kt**2)))
    slope = np.polyfit(np.log(kts), np.log(residuals), 1)[0]
    assert abs(slope + 4.0) <= 0.5


def test_small_noise_deficit_is_order_kappa_squared():
    kt = 0.05
    red = _sliding_system(1.0, -1.0, kappa_tilde=kt)
    p = occupation_probability_exact(make_potential(red))
    assert p >= 1.0 - 10.0 * kt**2
