"""Mean escape time from the neighbourhood |y~| < r~ of the surface.

The exact value is the double integral

    T~ = (2/kt^2) * int_{-r~}^{r~} int_{-r~}^{v} (H(v) - C)
         * exp(2 (V(v) - V(u)) / kt^2) du dv,

with H the Heaviside step and C the ratio of exp(2V/kt^2) masses right and
over the whole interval. The domain is cut into pieces whose linear-tail
exponents integrate in closed form; only the layer interior needs panel
quadrature, and everything is assembled in log space.

The asymptotic value is r~/a+ for kappa_tilde >= 1, and for small noise a
Laplace evaluation around the potential well: a prefactor
2*pi/sqrt(-A'(y1) A'(y2)) times exp(2 (V(y2) - V(y1))/kt^2), switched on
or off by a binary Stokes multiplier depending on whether the well exists
inside the layer, plus the drift-transit term r~/a+.

Configurations with both outer drifts negative are reflected (y~ -> -y~)
to the canonical rightward-crossing form first; escape statistics are
invariant under that reflection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import bisect

from .core import (
    NoiseRegime,
    PiecewisePotential,
    ReducedSystem,
    make_potential,
)
from .errors import DegenerateWell, NotCrossing, QuadratureFailure
from .quadrature import (
    DEFAULT_OPTIONS,
    QuadratureOptions,
    log1mexp,
    log_integral_exp,
    log_triangle_exp,
)

#: |A'(root)| below which the Laplace prefactor is treated as divergent
DERIVATIVE_TOL = 1e-6
#: panels used to bracket roots of a non-polynomial layer drift
BRACKET_PANELS = 512
#: bisection tolerance for bracketed roots
ROOT_TOL = 1e-12
#: kappa_tilde separating the large-noise from the small-noise asymptotic
REGIME_SPLIT = 1.0


# ---------------------------------------------------------------------------
# roots of the layer drift


def _real_cubic_roots(c0: float, c1: float, c2: float, c3: float) -> list[float]:
    """Real roots of c3 x^3 + c2 x^2 + c1 x + c0 by the depressed-cubic
    closed form (trigonometric for three real roots, Cardano otherwise)."""
    shift = c2 / (3.0 * c3)
    p = c1 / c3 - 3.0 * shift**2
    q = c0 / c3 - shift * (c1 / c3) + 2.0 * shift**3
    if abs(p) < 1e-300 and abs(q) < 1e-300:
        ts = [0.0]
    else:
        disc = -4.0 * p**3 - 27.0 * q**2
        if disc > 0.0:  # three distinct real roots, p < 0 here
            m = 2.0 * math.sqrt(-p / 3.0)
            arg = 3.0 * q / (p * m)
            theta = math.acos(min(1.0, max(-1.0, arg)))
            ts = [m * math.cos((theta - 2.0 * math.pi * k) / 3.0) for k in range(3)]
        else:
            half_q = -q / 2.0
            root = math.sqrt(max(0.0, q**2 / 4.0 + p**3 / 27.0))
            ts = [np.cbrt(half_q + root) + np.cbrt(half_q - root)]
            if disc == 0.0 and p != 0.0:  # double root alongside the simple one
                ts.append(-ts[0] / 2.0)
    return [t - shift for t in ts]


def _polish_poly_roots(coeffs: np.ndarray, roots: list[float]) -> list[float]:
    deriv = npoly.polyder(coeffs)
    out = []
    for r in roots:
        x = r
        for _ in range(3):
            d = npoly.polyval(x, deriv)
            if d == 0.0:
                break
            x = x - npoly.polyval(x, coeffs) / d
        out.append(float(x))
    return out


def _real_poly_roots(coeffs: np.ndarray) -> list[float]:
    c = np.asarray(coeffs, dtype=float)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return []
    while c.size > 1 and abs(c[-1]) <= 1e-14 * scale:
        c = c[:-1]
    deg = c.size - 1
    if deg <= 0:
        return []
    if deg == 1:
        roots = [-c[0] / c[1]]
    elif deg == 2:
        a, b, cc = c[2], c[1], c[0]
        disc = b * b - 4.0 * a * cc
        if disc < 0.0:
            return []
        sq = math.sqrt(disc)
        # Citardauq pairing avoids cancellation
        q = -0.5 * (b + math.copysign(sq, b))
        roots = [q / a] if q == 0.0 else [q / a, cc / q]
    elif deg == 3:
        roots = _real_cubic_roots(c[0], c[1], c[2], c[3])
    else:
        all_roots = np.roots(c[::-1])
        roots = [float(r.real) for r in all_roots if abs(r.imag) < 1e-9]
    return _polish_poly_roots(np.asarray(coeffs, dtype=float), roots)


def _bracketed_roots(red: ReducedSystem) -> list[float]:
    xs = np.linspace(-1.0, 1.0, BRACKET_PANELS + 1)
    vals = np.asarray(red.layer_drift(xs), dtype=float)
    roots = []
    f = lambda x: float(np.asarray(red.layer_drift(np.array(x))))
    for i in range(BRACKET_PANELS):
        lo, hi = vals[i], vals[i + 1]
        if lo == 0.0:
            roots.append(float(xs[i]))
        elif lo * hi < 0.0:
            roots.append(float(bisect(f, xs[i], xs[i + 1], xtol=ROOT_TOL)))
    if vals[-1] == 0.0:
        roots.append(float(xs[-1]))
    return roots


def drift_roots(red: ReducedSystem) -> list[float]:
    """Roots of the layer drift strictly inside (-1, 1), ascending.

    Polynomial drifts are solved in closed form (degree <= 3) or via the
    companion matrix with Newton polish; anything else falls back to
    sign-change bracketing on 512 panels plus bisection. The bracketing
    path cannot separate root pairs closer than a panel width.
    """
    if red.drift_poly is not None:
        raw = _real_poly_roots(red.drift_poly)
    else:
        raw = _bracketed_roots(red)
    inside = sorted(r for r in raw if -1.0 < r < 1.0)
    deduped: list[float] = []
    for r in inside:
        if not deduped or r - deduped[-1] > 1e-10:
            deduped.append(r)
    return deduped


def drift_slope(red: ReducedSystem, y: float) -> float:
    """d(layer drift)/dy~ at an interior point: exact for polynomials,
    O(h^2) central difference otherwise."""
    if red.drift_poly is not None:
        return float(npoly.polyval(y, npoly.polyder(red.drift_poly)))
    h = 1e-6
    lo = np.array(max(-1.0, y - h))
    hi = np.array(min(1.0, y + h))
    num = float(np.asarray(red.layer_drift(hi)) - np.asarray(red.layer_drift(lo)))
    return num / float(hi - lo)


def layer_breakpoints(red: ReducedSystem) -> list[float]:
    """Panel split points for layer integrals: edges, origin, drift roots."""
    return sorted({-1.0, 0.0, 1.0, *drift_roots(red)})


# ---------------------------------------------------------------------------
# well analysis


@dataclass(frozen=True)
class WellAnalysis:
    """Turning points of the potential inside the layer and the Stokes state.

    `roots` lists every (location, drift slope) pair for roots of the layer
    drift in (-1, 1). When a minimum/maximum pair of the potential exists
    (drift slope negative then positive on adjacent roots), y1 < y2 hold
    its location and `depth` = V(y2) - V(y1) > 0. `stokes` is 1 exactly
    when that well can trap rightward-crossing solutions: y2 must also lie
    in (0, 1).
    """

    roots: tuple[tuple[float, float], ...]
    y1: float | None
    y2: float | None
    stokes: int
    depth: float


def _canonical(red: ReducedSystem) -> ReducedSystem:
    if red.a_minus < 0.0 and red.a_plus < 0.0:
        return red.reflected()
    return red


def turning_points(red: ReducedSystem, pot: PiecewisePotential | None = None) -> WellAnalysis:
    """Locate the potential well (if any) inside the layer.

    Finds all roots of the layer drift in (-1, 1) with their slopes,
    selects the adjacent (negative slope, positive slope) pair that
    maximises the well depth when several exist, and sets the Stokes
    multiplier. Leftward-crossing systems are reflected first, so the
    reported locations live in the canonical frame.
    """
    red = _canonical(red)
    if pot is None or pot.reduced is not red:
        pot = make_potential(red)
    locs = drift_roots(red)
    slopes = [drift_slope(red, r) for r in locs]
    roots = tuple(zip(locs, slopes))

    best: tuple[float, float, float] | None = None  # (depth, y1, y2)
    for i in range(len(locs) - 1):
        if slopes[i] < 0.0 < slopes[i + 1]:
            depth = float(pot(locs[i + 1])) - float(pot(locs[i]))
            if best is None or depth > best[0]:
                best = (depth, locs[i], locs[i + 1])
    if best is None:
        return WellAnalysis(roots=roots, y1=None, y2=None, stokes=0, depth=0.0)
    depth, y1, y2 = best
    stokes = int(-1.0 < y1 < y2 < 1.0 and 0.0 < y2 < 1.0 and depth > 0.0)
    return WellAnalysis(roots=roots, y1=y1, y2=y2, stokes=stokes, depth=depth)


# ---------------------------------------------------------------------------
# closed-form pieces shared by the escape integrals


def _log_expm1(x: float) -> float:
    """log(exp(x) - 1) for x > 0."""
    return x + log1mexp(x)


def _log_drift_transit(a: float, scale: float, length: float) -> float:
    """log of the closed-form double integral over one linear tail,
    already multiplied by the 2/kt^2 prefactor:

        (2/kt^2) int int exp(-scale*a*(v-u)) = (L/a) * g(scale*a*L),
        g(q) = 1 - (1 - e^-q)/q  in (0, 1).
    """
    q = scale * a * length
    if q < 1e-3:
        g = q / 2.0 - q * q / 6.0 + q**3 / 24.0
    else:
        g = 1.0 - (-math.expm1(-q)) / q
    return math.log(length) - math.log(a) + math.log(g)


@dataclass(frozen=True)
class _Pieces:
    """Log-space building blocks reused by the constant and the exact time."""

    scale: float  # 2/kt^2
    length: float  # r~ - 1
    log_I_pos: float  # int_0^1 e^{W}
    log_I_neg: float  # int_{-1}^0 e^{W}
    log_J_int: float  # int_{-1}^1 e^{-W}
    log_J_left: float  # int_{-r~}^{-1} e^{-W}
    log_left_grow: float  # int_{-r~}^{-1} e^{W}
    log_J_tail: float  # int_1^{r~} e^{W}

    @property
    def log_num_C(self) -> float:  # int_0^{r~} e^{W}
        return float(np.logaddexp(self.log_I_pos, self.log_J_tail))

    @property
    def log_den_C(self) -> float:  # int_{-r~}^{r~} e^{W}
        return float(np.logaddexp.reduce([self.log_left_grow, self.log_I_neg, self.log_num_C]))


def _build_pieces(
    red: ReducedSystem, pot: PiecewisePotential, options: QuadratureOptions
) -> _Pieces:
    if not (red.a_minus > 0.0 and red.a_plus > 0.0):
        raise NotCrossing(
            "escape analysis needs a rightward crossing (a-, a+ > 0); "
            f"got a-={red.a_minus!r}, a+={red.a_plus!r}"
        )
    scale = 2.0 / red.kappa_tilde**2
    length = red.r_tilde - 1.0
    breaks = layer_breakpoints(red)

    def w(x: np.ndarray) -> np.ndarray:
        return scale * np.asarray(pot(x))

    def neg_w(x: np.ndarray) -> np.ndarray:
        return -scale * np.asarray(pot(x))

    q_minus = scale * red.a_minus * length
    q_plus = scale * red.a_plus * length
    w1 = scale * pot.V1
    return _Pieces(
        scale=scale,
        length=length,
        log_I_pos=log_integral_exp(w, 0.0, 1.0, breaks, options),
        log_I_neg=log_integral_exp(w, -1.0, 0.0, breaks, options),
        log_J_int=log_integral_exp(neg_w, -1.0, 1.0, breaks, options),
        log_J_left=log1mexp(q_minus) - math.log(scale * red.a_minus),
        log_left_grow=_log_expm1(q_minus) - math.log(scale * red.a_minus),
        log_J_tail=w1 + log1mexp(q_plus) - math.log(scale * red.a_plus),
    )


# ---------------------------------------------------------------------------
# the constant C and its bound


def _log_escape_constant(pieces: _Pieces) -> float:
    return pieces.log_num_C - pieces.log_den_C


def _log_constant_bound(red: ReducedSystem) -> float:
    kt2 = red.kappa_tilde**2
    return (
        math.log(2.0 * red.a_minus * (1.0 / red.a_plus + 2.0 / kt2))
        - red.a_minus * red.r_tilde / kt2
    )


def escape_C(
    red: ReducedSystem,
    pot: PiecewisePotential | None = None,
    options: QuadratureOptions = DEFAULT_OPTIONS,
) -> tuple[float, float]:
    """The escape constant C (mass of exp(2V/kt^2) to the right of 0 as a
    fraction of the whole interval) and its closed-form upper bound
    2 a- (1/a+ + 2/kt^2) exp(-r~ a-/kt^2).

    Both can underflow to 0.0 at small noise; the inequality C <= bound is
    asserted on the logs, where it stays meaningful.
    """
    red = _canonical(red)
    if pot is None or pot.reduced is not red:
        pot = make_potential(red)
    pieces = _build_pieces(red, pot, options)
    log_c = _log_escape_constant(pieces)
    log_bound = _log_constant_bound(red)
    assert log_c <= log_bound + 1e-9, (
        f"escape constant violates its bound: log C = {log_c:.6f} "
        f"> log bound = {log_bound:.6f}"
    )
    return float(np.exp(log_c)), float(np.exp(log_bound))


# ---------------------------------------------------------------------------
# exact mean escape time


def _log_escape_time_exact(
    red: ReducedSystem,
    pot: PiecewisePotential,
    options: QuadratureOptions,
    include_constant: bool = True,
) -> float:
    pieces = _build_pieces(red, pot, options)
    s = pieces.scale
    log_s = math.log(s)
    breaks = layer_breakpoints(red)

    def w(x: np.ndarray) -> np.ndarray:
        return s * np.asarray(pot(x))

    # v in [0, 1]: separable left-tail strip, then the true triangle piece
    c1 = log_s + pieces.log_I_pos + pieces.log_J_left
    c2 = log_s + log_triangle_exp(w, 0.0, 1.0, -1.0, breaks, options)
    # v in [1, r~]: separable strip over u <= 1, closed-form tail triangle
    c3 = log_s + pieces.log_J_tail + float(np.logaddexp(pieces.log_J_left, pieces.log_J_int))
    c4 = _log_drift_transit(red.a_plus, s, pieces.length)
    log_t_positive = float(np.logaddexp.reduce([c1, c2, c3, c4]))
    if not include_constant:
        return log_t_positive

    # the -C correction integrates over all v; add the v < 0 pieces
    m1 = _log_drift_transit(red.a_minus, s, pieces.length)
    m2 = log_s + pieces.log_I_neg + pieces.log_J_left
    m3 = log_s + log_triangle_exp(w, -1.0, 0.0, -1.0, breaks, options)
    log_t_all = float(np.logaddexp.reduce([log_t_positive, m1, m2, m3]))
    correction = _log_escape_constant(pieces) + log_t_all - log_t_positive
    if correction >= 0.0:
        raise QuadratureFailure(
            "escape constant correction is not small; the configuration is "
            "outside the crossing regime the formula is valid in"
        )
    return log_t_positive + math.log1p(-math.exp(correction))


def escape_time_exact(
    red: ReducedSystem,
    pot: PiecewisePotential | None = None,
    options: QuadratureOptions = DEFAULT_OPTIONS,
    include_constant: bool = True,
) -> float:
    """Mean scaled escape time from |y~| < r~, by the exact double integral.

    `include_constant=False` drops the exponentially small C term, which
    changes the value only at machine level for crossing configurations.
    Never overflows internally; the returned float is exp of a log value.
    """
    red = _canonical(red)
    if pot is None or pot.reduced is not red:
        pot = make_potential(red)
    return float(
        np.exp(_log_escape_time_exact(red, pot, options, include_constant=include_constant))
    )


# ---------------------------------------------------------------------------
# asymptotic mean escape time


def _log_escape_time_asymptotic(
    red: ReducedSystem, well: WellAnalysis
) -> tuple[float, NoiseRegime]:
    log_transit = math.log(red.r_tilde / red.a_plus)
    if red.kappa_tilde >= REGIME_SPLIT:
        return log_transit, NoiseRegime.LARGE_KAPPA
    if well.stokes == 1:
        slopes = dict(well.roots)
        d1, d2 = slopes[well.y1], slopes[well.y2]
        if min(abs(d1), abs(d2)) < DERIVATIVE_TOL:
            raise DegenerateWell(
                f"turning points y1={well.y1!r}, y2={well.y2!r} are too close "
                "to coalescence for the Laplace prefactor"
            )
        log_well = (
            math.log(2.0 * math.pi)
            - 0.5 * (math.log(-d1) + math.log(d2))
            + 2.0 * well.depth / red.kappa_tilde**2
        )
        return float(np.logaddexp(log_well, log_transit)), NoiseRegime.SMALL_KAPPA
    return log_transit, NoiseRegime.SMALL_KAPPA


def escape_time_asymptotic(
    red: ReducedSystem, well: WellAnalysis | None = None
) -> tuple[float, NoiseRegime]:
    """Asymptotic mean scaled escape time and the regime it was taken in.

    kappa_tilde >= 1: the drift-transit value r~/a+. Below that, the
    Laplace well term (present only when the Stokes multiplier is 1) is
    log-added to the transit value. Raises DegenerateWell when the well's
    turning points have nearly coalesced and the prefactor would diverge.
    """
    red = _canonical(red)
    if not (red.a_minus > 0.0 and red.a_plus > 0.0):
        raise NotCrossing(
            "escape analysis needs a rightward crossing (a-, a+ > 0); "
            f"got a-={red.a_minus!r}, a+={red.a_plus!r}"
        )
    if well is None:
        well = turning_points(red)
    log_value, regime = _log_escape_time_asymptotic(red, well)
    return float(np.exp(log_value)), regime


# ---------------------------------------------------------------------------
# pipeline


@dataclass(frozen=True)
class EscapeResult:
    """Everything the escape analysis produces for one configuration.

    Times are in the scaled units of the reduced SDE except `T_unscaled`,
    which multiplies back by the layer width eps. The log10 fields are
    exact even when the plain floats saturate.
    """

    T_tilde_exact: float
    T_tilde_asym: float
    T_unscaled: float
    C: float
    C_bound: float
    well: WellAnalysis
    regime: NoiseRegime
    log10_T_exact: float
    log10_T_asym: float
    log_C: float
    log_C_bound: float


def escape_pipeline(
    red: ReducedSystem, options: QuadratureOptions = DEFAULT_OPTIONS
) -> EscapeResult:
    """Run the full escape analysis: turning points, the constant and its
    bound, the exact and asymptotic times, and the unscaled time
    T = eps * T~. Component errors (NotCrossing, DegenerateWell,
    QuadratureFailure) propagate."""
    red = _canonical(red)
    pot = make_potential(red)
    well = turning_points(red, pot)
    pieces = _build_pieces(red, pot, options)
    log_c = _log_escape_constant(pieces)
    log_c_bound = _log_constant_bound(red)
    log_t_exact = _log_escape_time_exact(red, pot, options)
    log_t_asym, regime = _log_escape_time_asymptotic(red, well)
    t_exact = float(np.exp(log_t_exact))
    return EscapeResult(
        T_tilde_exact=t_exact,
        T_tilde_asym=float(np.exp(log_t_asym)),
        T_unscaled=red.eps * t_exact,
        C=float(np.exp(log_c)),
        C_bound=float(np.exp(log_c_bound)),
        well=well,
        regime=regime,
        log10_T_exact=log_t_exact / math.log(10.0),
        log10_T_asym=log_t_asym / math.log(10.0),
        log_C=log_c,
        log_C_bound=log_c_bound,
    )
