"""Dry-friction oscillator: the flagship application.

A unit-mass block on a moving belt, with unit spring and damping, feels a
kinetic friction force +-alpha in the sign of the slip velocity. The jump
at zero slip is smoothed by a cubic profile of shape parameter mu over a
layer of half-width eps:

    force(y) = alpha * (s + mu (s - s^3)),   s = y/eps,  |y| < eps.

For mu > 1/2 the cubic overshoots: the maximum static force beta exceeds
alpha, the block sticks until the spring extension passes the breakaway
point z0_plus = 1 - beta, and between z0_plus and the Filippov sliding
band the surface traps solutions in a potential well even though the
discontinuous model predicts immediate crossing (spurious sliding).

This module builds the friction force, its breakaway data, the region
labelling, the reduced 1-D system for a given initial extension z0, and
the escape-time scans over (z0, kappa) grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .core import NoiseSpec, PiecewiseSystem, ReducedSystem, SmoothedSystem, make_potential
from .errors import DegenerateWell, NotCrossing, StickslipError
from .escape import escape_pipeline, escape_time_exact, turning_points
from .quadrature import DEFAULT_OPTIONS, QuadratureOptions

#: default scan grid over the initial spring extension, covering both
#: sides of the breakaway point for the parameter sets of interest
DEFAULT_Z0_GRID = (-1.5, -0.05, 200)


@dataclass(frozen=True)
class FrictionParams:
    """Oscillator parameters: kinetic amplitude alpha, cubic shape mu,
    layer half-width eps, noise amplitude kappa, escape radius r, and the
    initial spring extension z0."""

    alpha: float
    mu: float
    eps: float
    kappa: float
    r: float
    z0: float

    def __post_init__(self) -> None:
        if not self.alpha > 0.0:
            raise ValueError("alpha must be positive")
        if self.mu < 0.0:
            raise ValueError("mu must be nonnegative")
        if not 0.0 < self.eps < self.r:
            raise ValueError("need 0 < eps < r")
        if not self.kappa > 0.0:
            raise ValueError("kappa must be positive")


def friction_force(y, p: FrictionParams):
    """The smoothed friction force: -alpha below the layer, the cubic
    profile inside, +alpha above. Odd in y and continuous at +-eps."""
    arr = np.asarray(y, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    s = np.clip(arr / p.eps, -1.0, 1.0)
    out = p.alpha * (s + p.mu * (s - s**3))
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class BreakawayInfo:
    """Static-friction data of the cubic layer.

    beta is the maximum force over the layer; it exceeds alpha exactly
    when mu > 1/2, in which case the force has interior turning points at
    +-y_s (u_pm in stretched units) and the sticking band extends to the
    breakaway extensions z0_pm = (1 - beta, 1 + beta). The identities
    z0_plus = 1 - beta and z0_minus = 1 + beta hold for every mu; the
    turning-point fields are None when the force is monotone (mu <= 1/2).
    """

    beta: float
    y_s: tuple[float, float] | None
    u_pm: tuple[float, float] | None
    z0_pm: tuple[float, float]

    @property
    def z0_plus(self) -> float:
        return self.z0_pm[0]

    @property
    def z0_minus(self) -> float:
        return self.z0_pm[1]


def breakaway(p: FrictionParams) -> BreakawayInfo:
    """Maximum static force and breakaway extensions of the cubic layer."""
    if p.mu > 0.5:
        beta = p.alpha * 2.0 * (1.0 + p.mu) ** 1.5 / (3.0 * math.sqrt(3.0 * p.mu))
        u_star = math.sqrt((1.0 + p.mu) / (3.0 * p.mu))
        u_pm = (u_star, -u_star)
        y_s = (p.eps * u_star, -p.eps * u_star)
    else:
        beta = p.alpha
        u_pm = None
        y_s = None
    return BreakawayInfo(beta=beta, y_s=y_s, u_pm=u_pm, z0_pm=(1.0 - beta, 1.0 + beta))


class FrictionRegion(Enum):
    FILIPPOV_SLIDING = "filippov-sliding"
    SPURIOUS_SLIDING = "spurious-sliding"
    CROSSING = "crossing"


def region_map(z0: float, p: FrictionParams) -> FrictionRegion:
    """Label the surface dynamics at extension z0.

    Filippov sliding on (1 - alpha, 1 + alpha); for mu > 1/2 a spurious
    sliding band extends it to (z0_plus, 1 - alpha) and
    (1 + alpha, z0_minus), where the cubic layer traps solutions that the
    discontinuous model would let cross; crossing everywhere else.
    """
    info = breakaway(p)
    if 1.0 - p.alpha < z0 < 1.0 + p.alpha:
        return FrictionRegion.FILIPPOV_SLIDING
    if p.mu > 0.5 and (
        info.z0_plus < z0 <= 1.0 - p.alpha or 1.0 + p.alpha <= z0 < info.z0_minus
    ):
        return FrictionRegion.SPURIOUS_SLIDING
    return FrictionRegion.CROSSING


def _layer_drift_coeffs(p: FrictionParams) -> np.ndarray:
    # drift of the slip velocity at the surface: 1 - z0 - force profile
    return np.array(
        [1.0 - p.z0, -p.alpha * (1.0 + p.mu), 0.0, p.alpha * p.mu], dtype=float
    )


def reduced_from_friction(p: FrictionParams) -> ReducedSystem:
    """The 1-D reduced system for the slip velocity near sticking.

    Outer drifts a-+ = 1 - z0 +- alpha come from the layer profile at
    s = -+1; noise acts directly on the velocity, so kappa_eff = kappa.
    The cubic profile is carried as polynomial coefficients, so potentials
    and turning points downstream are closed-form.
    """
    coeffs = _layer_drift_coeffs(p)
    return ReducedSystem(
        a_minus=1.0 - p.z0 + p.alpha,
        a_plus=1.0 - p.z0 - p.alpha,
        layer_drift=lambda s: npoly.polyval(np.asarray(s, dtype=float), coeffs),
        kappa_tilde=p.kappa / math.sqrt(p.eps),
        r_tilde=p.r / p.eps,
        eps=p.eps,
        kappa_eff=p.kappa,
        r=p.r,
        drift_poly=coeffs,
    )


def oscillator_system(p: FrictionParams) -> tuple[SmoothedSystem, NoiseSpec]:
    """The full 2-D oscillator as a smoothed noisy system.

    State is (relative slip velocity, spring extension offset from z0), so
    the analysis point sits at the coordinate origin. Noise enters only
    the velocity equation.
    """

    def drift(x: np.ndarray, force: float) -> np.ndarray:
        y, dz = x[0], x[1]
        return np.array([1.0 - (p.z0 + dz) - y - force, y - 1.0])

    base = PiecewiseSystem(
        dim=2,
        f_minus=lambda x: drift(x, -p.alpha),
        f_plus=lambda x: drift(x, p.alpha),
        switch_index=0,
    )
    system = SmoothedSystem(
        base=base,
        eps=p.eps,
        layer_field=lambda s, x: drift(x, p.alpha * (s + p.mu * (s - s**3))),
        layer_poly=_layer_drift_coeffs(p),
    )
    noise = NoiseSpec(kappa=p.kappa, diffusion=np.array([[1.0, 0.0], [0.0, 0.0]]))
    return system, noise


@dataclass(frozen=True)
class ScanRow:
    """One (z0, kappa) cell of an escape-time scan. Times are the scaled
    T~; missing values (rejected rows, degenerate wells) are None with the
    reason recorded in `status`."""

    z0: float
    kappa: float
    mu: float
    stokes: int | None
    T_exact: float | None
    T_asym: float | None
    log10_T_exact: float | None
    log10_T_asym: float | None
    well_depth: float | None
    status: str


def scan_escape_times(
    z0_grid: Sequence[float],
    kappa_list: Sequence[float],
    p: FrictionParams,
    options: QuadratureOptions = DEFAULT_OPTIONS,
) -> list[ScanRow]:
    """Escape times over a (z0, kappa) grid, one row per cell in scan order
    (z0 outer, kappa inner).

    Rows that fall in the sliding band (a+ <= 0) or fail a component are
    recorded with a reason and skipped rather than aborting the scan; a
    degenerate well keeps the exact value and drops only the asymptotic.
    Every cell is a pure function of its inputs, so the scan may be
    distributed at will without changing the output table.
    """
    rows: list[ScanRow] = []
    for z0 in z0_grid:
        for kappa in kappa_list:
            cell = replace(p, z0=float(z0), kappa=float(kappa))
            a_plus = 1.0 - cell.z0 - cell.alpha
            if a_plus <= 0.0:
                rows.append(
                    ScanRow(
                        z0=cell.z0, kappa=cell.kappa, mu=cell.mu,
                        stokes=None, T_exact=None, T_asym=None,
                        log10_T_exact=None, log10_T_asym=None, well_depth=None,
                        status="rejected: sliding band (a_plus <= 0)",
                    )
                )
                continue
            red = reduced_from_friction(cell)
            try:
                result = escape_pipeline(red, options=options)
                rows.append(
                    ScanRow(
                        z0=cell.z0, kappa=cell.kappa, mu=cell.mu,
                        stokes=result.well.stokes,
                        T_exact=result.T_tilde_exact,
                        T_asym=result.T_tilde_asym,
                        log10_T_exact=result.log10_T_exact,
                        log10_T_asym=result.log10_T_asym,
                        well_depth=result.well.depth,
                        status="ok",
                    )
                )
            except DegenerateWell as exc:
                pot = make_potential(red)
                well = turning_points(red, pot)
                log_t = math.log(escape_time_exact(red, pot, options=options))
                rows.append(
                    ScanRow(
                        z0=cell.z0, kappa=cell.kappa, mu=cell.mu,
                        stokes=well.stokes,
                        T_exact=math.exp(log_t), T_asym=None,
                        log10_T_exact=log_t / math.log(10.0), log10_T_asym=None,
                        well_depth=well.depth,
                        status=f"degenerate well: {exc}",
                    )
                )
            except (NotCrossing, StickslipError) as exc:
                rows.append(
                    ScanRow(
                        z0=cell.z0, kappa=cell.kappa, mu=cell.mu,
                        stokes=None, T_exact=None, T_asym=None,
                        log10_T_exact=None, log10_T_asym=None, well_depth=None,
                        status=f"error: {exc}",
                    )
                )
    return rows
