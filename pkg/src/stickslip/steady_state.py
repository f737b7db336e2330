"""Stationary density of the reduced SDE and the layer occupation probability.

For an attracting sliding configuration (a- > 0 > a+) the reduced SDE has
the stationary density p_ss(y~) = K exp(-2 V(y~)/kappa_tilde^2). The two
linear tails integrate analytically, the interior by panel quadrature, and
every exponential is handled in log space: at the parameters of interest
the raw exponents reach O(1e4).

The occupation probability P[|y~| <= 1] is reported both exactly and in
its two asymptotic limits: ~ 4 / ((1/a- + 1/(-a+)) kappa_tilde^2) for
large noise, ~ 1 for small noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .core import NoiseRegime, PiecewisePotential, RegionKind, classify
from .errors import NotNormalizable
from .escape import layer_breakpoints
from .quadrature import DEFAULT_OPTIONS, QuadratureOptions, log_integral_exp

#: kappa_tilde at/beyond which the large-noise asymptotic label applies
#: (and below whose reciprocal the small-noise label applies)
KAPPA_SPLIT = 3.0


def _require_attracting(pot: PiecewisePotential) -> None:
    red = pot.reduced
    if classify(red.a_minus, red.a_plus) is not RegionKind.ATTRACTING_SLIDING:
        raise NotNormalizable(
            "stationary density exists only for attracting sliding "
            f"(a- > 0 > a+); got a-={red.a_minus!r}, a+={red.a_plus!r}"
        )


def _log_pieces(pot: PiecewisePotential, options: QuadratureOptions) -> tuple[float, float, float]:
    """Logs of the three pieces of int exp(-2V/kt^2): left tail, layer
    interior, right tail. Tails are closed-form exponential integrals."""
    red = pot.reduced
    scale = 2.0 / red.kappa_tilde**2
    log_left = -math.log(scale * red.a_minus)
    log_right = -math.log(scale * (-red.a_plus)) - scale * pot.V1
    log_inner = log_integral_exp(
        lambda u: -scale * np.asarray(pot(u)),
        -1.0,
        1.0,
        breakpoints=layer_breakpoints(red),
        options=options,
    )
    return log_left, log_inner, log_right


@dataclass(frozen=True)
class StationaryDensity:
    """Normalised stationary density with its evaluation grid.

    `log_norm` is log of the full-line integral of exp(-2V/kt^2); the
    plain normalisation constant K = exp(-log_norm) is also provided but
    can underflow to 0.0 for deep potentials, so density values are always
    produced from the logs.
    """

    pot: PiecewisePotential
    log_norm: float
    K: float
    grid: np.ndarray
    values: np.ndarray

    def __call__(self, y) -> np.ndarray:
        scale = 2.0 / self.pot.reduced.kappa_tilde**2
        return np.exp(-scale * np.asarray(self.pot(y)) - self.log_norm)


def default_window(pot: PiecewisePotential) -> float:
    """Half-width covering all but ~1e-4 of the exponential tails."""
    red = pot.reduced
    return 1.0 + 10.0 * red.kappa_tilde**2 * max(1.0 / red.a_minus, 1.0 / (-red.a_plus))


def stationary_density(
    pot: PiecewisePotential,
    window: float | None = None,
    n_grid: int = 801,
    options: QuadratureOptions = DEFAULT_OPTIONS,
) -> StationaryDensity:
    """Normalise exp(-2V/kt^2) over the whole line.

    Raises NotNormalizable unless the configuration is attracting sliding;
    in every other region the density grows without bound on at least one
    side of the layer.
    """
    _require_attracting(pot)
    log_left, log_inner, log_right = _log_pieces(pot, options)
    log_norm = float(np.logaddexp.reduce([log_left, log_inner, log_right]))
    w = default_window(pot) if window is None else float(window)
    grid = np.linspace(-w, w, n_grid)
    scale = 2.0 / pot.reduced.kappa_tilde**2
    values = np.exp(-scale * np.asarray(pot(grid)) - log_norm)
    return StationaryDensity(
        pot=pot, log_norm=log_norm, K=float(np.exp(-log_norm)), grid=grid, values=values
    )


def occupation_probability_exact(
    pot: PiecewisePotential, options: QuadratureOptions = DEFAULT_OPTIONS
) -> float:
    """P[|y~| <= 1] under the stationary density.

    Computed as 1/(1 + tails/interior) with both integrals carried as
    logs, i.e. a logistic of the log-ratio, so neither huge nor tiny
    potentials overflow.
    """
    _require_attracting(pot)
    log_left, log_inner, log_right = _log_pieces(pot, options)
    log_tails = float(np.logaddexp(log_left, log_right))
    return float(expit(log_inner - log_tails))


@dataclass(frozen=True)
class OccupationResult:
    p_exact: float
    p_asym: float
    regime: NoiseRegime


def occupation_probability_asymptotic(
    pot: PiecewisePotential,
    kappa_split: float = KAPPA_SPLIT,
    options: QuadratureOptions = DEFAULT_OPTIONS,
) -> OccupationResult:
    """Exact and limiting occupation probabilities, with a regime label.

    kappa_tilde >= kappa_split uses the large-noise expansion
    4/((1/a- + 1/(-a+)) kt^2) (clipped to 1 in case the drifts are so
    large that the leading term leaves [0, 1]); kappa_tilde <= 1/kappa_split
    returns the small-noise leading order 1. In between the exact value is
    reported for both fields, since it is cheap and the expansions have no
    claim there.
    """
    _require_attracting(pot)
    red = pot.reduced
    p_exact = occupation_probability_exact(pot, options=options)
    kt = red.kappa_tilde
    if kt >= kappa_split:
        harmonic = 1.0 / red.a_minus + 1.0 / (-red.a_plus)
        p_asym = min(1.0, 4.0 / (harmonic * kt**2))
        regime = NoiseRegime.LARGE_KAPPA
    elif kt <= 1.0 / kappa_split:
        p_asym = 1.0
        regime = NoiseRegime.SMALL_KAPPA
    else:
        p_asym = p_exact
        regime = NoiseRegime.INTERMEDIATE
    return OccupationResult(p_exact=p_exact, p_asym=p_asym, regime=regime)
