"""Escape analysis: turning points, the constant C, exact and asymptotic times."""

import math

import numpy as np
import pytest
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import bisect

from stickslip.core import make_potential
from stickslip.errors import DegenerateWell, NotCrossing
from stickslip.escape import (
    drift_roots,
    escape_C,
    escape_pipeline,
    escape_time_asymptotic,
    escape_time_exact,
    turning_points,
)
from stickslip.friction import FrictionParams, breakaway, reduced_from_friction
from stickslip.presets import reduced_from_poly
from stickslip.quadrature import QuadratureOptions


def _friction(z0, kappa, mu=3.0, alpha=1.0, eps=0.01, r=0.1):
    return reduced_from_friction(
        FrictionParams(alpha=alpha, mu=mu, eps=eps, kappa=kappa, r=r, z0=z0)
    )


def _bracketing_root_oracle(red, panels=20_000):
    """Brute sign-change scan over a fine grid, independent of the closed
    forms used by the library."""
    xs = np.linspace(-1.0, 1.0, panels + 1)
    vals = np.asarray(red.layer_drift(xs))
    f = lambda x: float(red.layer_drift(np.array(x)))
    roots = []
    for i in range(panels):
        if vals[i] == 0.0:
            roots.append(xs[i])
        elif vals[i] * vals[i + 1] < 0.0:
            roots.append(bisect(f, xs[i], xs[i + 1], xtol=1e-13))
    return [r for r in roots if -1.0 < r < 1.0]


def _trapezoid_escape_oracle(red, pot, n=2_000_001):
    """Direct evaluation of the escape double integral by cumulative
    trapezoids on a dense grid, in plain arithmetic (valid while the raw
    exponents stay inside float range, i.e. for moderate noise)."""
    kt2 = red.kappa_tilde**2
    rt = red.r_tilde
    us = np.linspace(-rt, rt, n)
    w = 2.0 * np.asarray(pot(us)) / kt2
    grow = np.exp(w)
    decay = np.exp(-w)
    inner = cumulative_trapezoid(decay, us, initial=0.0)
    c = np.trapezoid(np.where(us >= 0.0, grow, 0.0), us) / np.trapezoid(grow, us)
    integrand = (np.where(us >= 0.0, 1.0, 0.0) - c) * grow * inner
    return (2.0 / kt2) * np.trapezoid(integrand, us), c


# ---------------------------------------------------------------------------
# turning points


def test_turning_points_friction_at_sticking_extension():
    # at z0 = 1 the layer drift -4u + 3u^3 has roots 0 and +-2/sqrt(3);
    # only u = 0 lies inside the layer, so no well pair exists
    red = _friction(z0=1.0, kappa=0.05)
    well = turning_points(red)
    locations = [r for r, _ in well.roots]
    assert locations == pytest.approx([0.0], abs=1e-12)
    assert well.stokes == 0
    # the +-2/3 force turning points live in the breakaway data instead
    info = breakaway(FrictionParams(alpha=1.0, mu=3.0, eps=0.01, kappa=0.05, r=0.1, z0=1.0))
    assert info.u_pm == pytest.approx((2.0 / 3.0, -2.0 / 3.0))


def test_turning_points_spurious_sliding_region():
    red = _friction(z0=-0.5, kappa=0.05)
    well = turning_points(red)
    locations = [r for r, _ in well.roots]
    oracle = _bracketing_root_oracle(red)
    assert len(locations) == 2
    assert all(0.0 < r < 1.0 for r in locations)
    assert locations == pytest.approx(oracle, abs=1e-9)
    assert well.stokes == 1
    assert well.y1 < well.y2
    assert well.depth > 0.0


def test_turning_points_shallow_cubic_has_no_roots():
    for z0 in (-0.5, -1.0, -2.0):
        red = _friction(z0=z0, kappa=0.05, mu=0.4)
        well = turning_points(red)
        assert well.roots == ()
        assert well.stokes == 0


def test_turning_points_bracketing_path_matches_closed_form():
    from stickslip.core import ReducedSystem

    poly = _friction(z0=-0.5, kappa=0.05)
    generic = ReducedSystem(
        a_minus=poly.a_minus, a_plus=poly.a_plus, layer_drift=poly.layer_drift,
        kappa_tilde=poly.kappa_tilde, r_tilde=poly.r_tilde,
        eps=poly.eps, kappa_eff=poly.kappa_eff, r=poly.r, drift_poly=None,
    )
    assert drift_roots(generic) == pytest.approx(drift_roots(poly), abs=1e-10)


def test_turning_points_multi_root_picks_deepest_well():
    # double-well quartic drift with an odd tilt (endpoints unchanged): four
    # roots inside the layer, and the two candidate wells differ in depth
    coeffs = np.array([0.35, 0.15, -3.6, -0.15, 4.0])
    red = reduced_from_poly(coeffs, eps=0.01, kappa=0.05, r=0.1)
    well = turning_points(red)
    assert len(well.roots) == 4
    pot = make_potential(red)
    depths = []
    locs = [r for r, _ in well.roots]
    slopes = [d for _, d in well.roots]
    for i in range(3):
        if slopes[i] < 0.0 < slopes[i + 1]:
            depths.append(float(pot(locs[i + 1])) - float(pot(locs[i])))
    assert well.depth == pytest.approx(max(depths))


# ---------------------------------------------------------------------------
# the constant C


def test_escape_constant_below_half_for_rightward_drift():
    for kt in (0.3, 1.0, 3.0):
        red = reduced_from_poly([1.0], eps=0.01, kappa=kt * 0.1, r=0.1)
        c, bound = escape_C(red)
        assert 0.0 <= c < 0.5
        assert c <= bound


def test_escape_constant_friction_is_negligible():
    red = _friction(z0=-1.0, kappa=0.05)
    c, bound = escape_C(red)
    assert c <= bound
    assert c < 1e-6
    # panel-refinement oracle: same value at 4x initial resolution
    c_fine, _ = escape_C(red, options=QuadratureOptions(initial_subdivisions=4))
    assert c_fine == pytest.approx(c, rel=1e-8, abs=1e-300)


def test_escape_constant_flat_exponent_limit():
    red = reduced_from_poly([1.0], eps=0.01, kappa=1.0, r=0.1)  # kt = 10, rt = 10
    c, _ = escape_C(red)
    assert abs(c - 0.5) < 0.05


def test_escape_constant_against_trapezoid_oracle():
    red = _friction(z0=-0.5, kappa=0.1)
    pot = make_potential(red)
    c, _ = escape_C(red, pot)
    _, c_oracle = _trapezoid_escape_oracle(red, pot)
    assert c == pytest.approx(c_oracle, rel=1e-4)


# ---------------------------------------------------------------------------
# exact escape time


def test_exact_escape_constant_drift_is_transit_time():
    red = reduced_from_poly([1.0], eps=0.01, kappa=0.1, r=0.1)  # kt = 1, rt = 10
    assert escape_time_exact(red) == pytest.approx(10.0, abs=1.0)


def test_exact_escape_matches_trapezoid_oracle():
    for kappa in (0.1, 0.05):
        red = _friction(z0=-0.5, kappa=kappa)
        pot = make_potential(red)
        value = escape_time_exact(red, pot)
        oracle, _ = _trapezoid_escape_oracle(red, pot)
        assert value == pytest.approx(oracle, rel=1e-6)


def test_exact_escape_agrees_with_asymptotic_at_moderate_noise():
    red = _friction(z0=-0.5, kappa=0.1)
    log_exact = math.log(escape_time_exact(red))
    log_asym = math.log(escape_time_asymptotic(red)[0])
    assert abs(log_asym - log_exact) < 0.3 * abs(log_exact)


def test_exact_escape_blows_up_as_noise_shrinks():
    # the log10 jump from kappa=0.1 to kappa=0.01 equals roughly
    # 2*depth*(1/kt_small^2 - 1/kt_large^2)/ln 10; about 6 decades at
    # z0=-0.5 (depth 0.080) and 17 decades at z0=-0.25 (deeper well)
    gap_shallow = (
        escape_pipeline(_friction(z0=-0.5, kappa=0.01)).log10_T_exact
        - escape_pipeline(_friction(z0=-0.5, kappa=0.1)).log10_T_exact
    )
    assert gap_shallow >= 5.0
    gap_deep = (
        escape_pipeline(_friction(z0=-0.25, kappa=0.01)).log10_T_exact
        - escape_pipeline(_friction(z0=-0.25, kappa=0.1)).log10_T_exact
    )
    assert gap_deep >= 10.0


def test_exact_escape_monotone_in_noise():
    values = []
    for kt in np.linspace(0.05, 1.0, 8):
        red = _friction(z0=-0.5, kappa=float(kt) * 0.1)
        values.append(math.log(escape_time_exact(red)))
    assert all(a > b for a, b in zip(values, values[1:]))


def test_escape_constant_term_is_negligible_in_time():
    red = _friction(z0=-0.5, kappa=0.05)
    pot = make_potential(red)
    with_c = escape_time_exact(red, pot, include_constant=True)
    without_c = escape_time_exact(red, pot, include_constant=False)
    assert abs(with_c - without_c) <= 1e-6 * with_c


def test_exact_escape_panel_doubling_stability():
    red = _friction(z0=-0.4, kappa=0.02)
    base = escape_time_exact(red)
    fine = escape_time_exact(red, options=QuadratureOptions(initial_subdivisions=2))
    assert abs(fine - base) <= 1e-6 * base


def test_exact_escape_requires_crossing():
    red = reduced_from_poly([0.0, -1.0], eps=0.01, kappa=0.05, r=0.1)
    with pytest.raises(NotCrossing):
        escape_time_exact(red)


# ---------------------------------------------------------------------------
# asymptotic escape time


def test_asymptotic_without_well_is_pure_transit():
    red = _friction(z0=-1.0, kappa=0.05)  # a+ = 1, rt = 10, S = 0
    value, _ = escape_time_asymptotic(red)
    assert value == pytest.approx(10.0)


def test_asymptotic_large_noise_branch():
    red = reduced_from_poly([0.5], eps=0.01, kappa=0.2, r=0.1)  # kt = 2, a+ = 0.5
    value, regime = escape_time_asymptotic(red)
    assert value == pytest.approx(20.0)
    assert regime.value == "large-kappa"


def test_asymptotic_well_term_composition():
    red = _friction(z0=-0.5, kappa=0.01)
    well = turning_points(red)
    slopes = dict(well.roots)
    prefactor = 2.0 * math.pi / math.sqrt(-slopes[well.y1] * slopes[well.y2])
    expected = prefactor * math.exp(2.0 * well.depth / red.kappa_tilde**2) + 10.0 / red.a_plus
    value, _ = escape_time_asymptotic(red, well)
    assert value == pytest.approx(expected, rel=1e-12)


def test_asymptotic_degenerate_well_guard():
    info = breakaway(FrictionParams(alpha=1.0, mu=3.0, eps=0.01, kappa=0.01, r=0.1, z0=-0.5))
    red = _friction(z0=info.z0_plus + 1e-15, kappa=0.01)
    well = turning_points(red)
    if well.stokes == 1:  # roots may or may not survive rounding this close
        with pytest.raises(DegenerateWell):
            escape_time_asymptotic(red, well)


# ---------------------------------------------------------------------------
# pipeline


def test_pipeline_no_well_side():
    res = escape_pipeline(_friction(z0=-1.0, kappa=0.05))
    assert res.well.stokes == 0
    assert abs(math.log(res.T_tilde_asym) - math.log(res.T_tilde_exact)) < 0.2
    assert res.T_unscaled == pytest.approx(0.01 * res.T_tilde_exact)


def test_pipeline_well_side_is_exponentially_slow():
    res = escape_pipeline(_friction(z0=-0.5, kappa=0.01))
    assert res.well.stokes == 1
    assert res.T_tilde_exact > 1e6
    assert res.regime.value == "small-kappa"


def test_pipeline_reflection_invariance():
    red = _friction(z0=-0.5, kappa=0.05)
    mirrored = red.reflected()
    assert mirrored.a_minus < 0.0 and mirrored.a_plus < 0.0
    res = escape_pipeline(red)
    res_mirror = escape_pipeline(mirrored)
    assert res_mirror.T_tilde_exact == pytest.approx(res.T_tilde_exact, rel=1e-9)
    assert res_mirror.T_tilde_asym == pytest.approx(res.T_tilde_asym, rel=1e-12)
    assert res_mirror.well.stokes == res.well.stokes


def test_stokes_multiplier_exact_on_both_sides():
    info = breakaway(FrictionParams(alpha=1.0, mu=3.0, eps=0.01, kappa=0.01, r=0.1, z0=-0.5))
    z_plus = info.z0_plus
    for dz in (1e-8, 1e-4, 1e-2, 0.1, 0.5):
        below = turning_points(_friction(z0=z_plus - dz, kappa=0.01))
        assert below.stokes == 0, f"S must be 0 at z0 = z0_plus - {dz}"
    for dz in (1e-8, 1e-4, 1e-2, 0.1, 0.5):
        z0 = z_plus + dz
        if z0 >= -1e-3:
            continue
        above = turning_points(_friction(z0=z0, kappa=0.01))
        assert above.stokes == 1, f"S must be 1 at z0 = z0_plus + {dz}"
