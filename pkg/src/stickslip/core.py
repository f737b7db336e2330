"""Domain types for piecewise-smooth systems near a switching surface.

A piecewise-smooth vector field jumps across the coordinate plane y = 0
(y being one component of the state). Smoothing spreads the jump over a
layer |y| <= eps, and additive white noise of amplitude kappa turns the
flow into an SDE. Close to the surface the normal coordinate decouples
into a one-dimensional SDE

    dy~ = phi(y~) dt~ + kappa~ dW,    y~ = y/eps,  t~ = t/eps,
    kappa~ = kappa_eff/sqrt(eps),

with drift phi equal to the outer drifts a-, a+ beyond |y~| = 1 and to the
layer profile in between. This module holds those types, the Filippov
classification and sliding field, the reduction, and the potential
V(y~) = -int phi, which everything downstream (densities, escape times)
is built from.
"""

from __future__ import annotations

import enum
import math
import warnings
from bisect import bisect_left, insort
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.integrate import quad

from .errors import BadScales, NotSliding

#: absolute tolerance under which an outer drift counts as exactly zero
TOL_ZERO = 1e-12
#: continuity mismatch tolerated between the layer field and the outer fields
TOL_CONT = 1e-8
#: absolute tolerance for quadrature-backed potential evaluation
TOL_QUAD = 1e-12

VectorField = Callable[[np.ndarray], np.ndarray]


class RegionKind(enum.Enum):
    CROSSING = "crossing"
    ATTRACTING_SLIDING = "attracting-sliding"
    REPELLING_SLIDING = "repelling-sliding"
    DEGENERATE = "degenerate"


class NoiseRegime(enum.Enum):
    """Which side of the kappa~ ~ 1 divide an analysis ran on."""

    LARGE_KAPPA = "large-kappa"
    SMALL_KAPPA = "small-kappa"
    INTERMEDIATE = "intermediate"


def classify(a_minus: float, a_plus: float, tol_zero: float = TOL_ZERO) -> RegionKind:
    """Classify the switching surface from the two outer normal drifts.

    Crossing if both drifts share a sign, attracting sliding if both point
    at the surface (a- > 0 > a+), repelling sliding if both point away,
    degenerate if either is zero to within `tol_zero` (relative to the
    larger drift magnitude).
    """
    if not (math.isfinite(a_minus) and math.isfinite(a_plus)):
        raise ValueError("outer drifts must be finite")
    scale = max(1.0, abs(a_minus), abs(a_plus))
    if abs(a_minus) <= tol_zero * scale or abs(a_plus) <= tol_zero * scale:
        return RegionKind.DEGENERATE
    if a_minus * a_plus > 0.0:
        return RegionKind.CROSSING
    if a_minus > 0.0 > a_plus:
        return RegionKind.ATTRACTING_SLIDING
    return RegionKind.REPELLING_SLIDING


def filippov_sliding_field(
    f_minus_val: np.ndarray, f_plus_val: np.ndarray, switch_index: int
) -> tuple[np.ndarray, float]:
    """Convex combination of the one-sided fields that is tangent to the surface.

    Parameters
    ----------
    f_minus_val, f_plus_val : array_like
        The two one-sided field values at a point of the switching surface.
    switch_index : int
        Which component is the surface-normal coordinate.

    Returns
    -------
    (field, lam) : the sliding field (its switch component is exactly zero
        by construction) and the combination weight lam in (0, 1).

    Raises
    ------
    NotSliding
        If the normal components do not satisfy a- > 0 > a+.
    """
    fm = np.asarray(f_minus_val, dtype=float)
    fp = np.asarray(f_plus_val, dtype=float)
    a_minus = fm[switch_index]
    a_plus = fp[switch_index]
    if not (a_minus > 0.0 > a_plus):
        raise NotSliding(
            f"sliding needs a- > 0 > a+, got a-={a_minus!r}, a+={a_plus!r}"
        )
    lam = a_minus / (a_minus - a_plus)
    out = lam * fp + (1.0 - lam) * fm
    out[switch_index] = 0.0
    return out, float(lam)


@dataclass(frozen=True)
class PiecewiseSystem:
    """A vector field with a jump across the plane x[switch_index] = 0."""

    dim: int
    f_minus: VectorField
    f_plus: VectorField
    switch_index: int = 0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if not 0 <= self.switch_index < self.dim:
            raise ValueError("switch_index must index a coordinate")


@dataclass(frozen=True)
class SmoothedSystem:
    """`base` with the jump spread over the layer |y| <= eps.

    `layer_field(s, x)` is the field inside the layer as a function of the
    stretched coordinate s = y/eps in [-1, 1] and the full state x. If the
    switch component of layer_field(s, 0) happens to be polynomial in s,
    `layer_poly` may carry its coefficients (ascending powers); reductions
    and potentials then use closed forms instead of nested quadrature.
    """

    base: PiecewiseSystem
    eps: float
    layer_field: Callable[[float, np.ndarray], np.ndarray]
    layer_poly: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not self.eps > 0.0:
            raise ValueError("eps must be positive")
        if self.layer_poly is not None:
            object.__setattr__(self, "layer_poly", np.asarray(self.layer_poly, dtype=float))


@dataclass(frozen=True)
class NoiseSpec:
    """Additive white noise kappa * diffusion @ dW for an n-dimensional system."""

    kappa: float
    diffusion: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "diffusion", np.asarray(self.diffusion, dtype=float))
        if not (math.isfinite(self.kappa) and self.kappa > 0.0):
            raise ValueError("kappa must be positive and finite")
        if not np.all(np.isfinite(self.diffusion)):
            raise ValueError("diffusion matrix must have finite entries")


@dataclass(frozen=True)
class ContinuityReport:
    """Componentwise mismatch between the layer field and the outer fields."""

    gap_minus: np.ndarray
    gap_plus: np.ndarray
    tol: float

    @property
    def passed(self) -> bool:
        return bool(max(self.gap_minus.max(), self.gap_plus.max()) <= self.tol)


def continuity_check(system: SmoothedSystem, x0: np.ndarray, tol: float) -> ContinuityReport:
    """Check that the layer field matches f+- at the layer edges s = +-1.

    Reports |layer_field(+1, x0) - f_plus(x0)| and the analogous gap at
    s = -1, per component; passes iff both maxima are <= tol.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    x0 = np.asarray(x0, dtype=float)
    gap_plus = np.abs(
        np.asarray(system.layer_field(1.0, x0), dtype=float) - system.base.f_plus(x0)
    )
    gap_minus = np.abs(
        np.asarray(system.layer_field(-1.0, x0), dtype=float) - system.base.f_minus(x0)
    )
    return ContinuityReport(gap_minus=gap_minus, gap_plus=gap_plus, tol=tol)


def _vectorized_scalar(fn: Callable[[float], float]) -> Callable[[np.ndarray], np.ndarray]:
    def wrapped(s):
        arr = np.asarray(s, dtype=float)
        if arr.ndim == 0:
            return np.float64(fn(float(arr)))
        return np.array([fn(float(v)) for v in arr.ravel()]).reshape(arr.shape)

    return wrapped


@dataclass(frozen=True)
class ReducedSystem:
    """The scaled one-dimensional SDE governing the surface-normal coordinate.

    dy~ = phi(y~) dt~ + kappa_tilde dW with phi = a_minus below the layer,
    `layer_drift` on [-1, 1] and a_plus above. `drift_poly`, when present,
    holds ascending polynomial coefficients of layer_drift; root finding
    and potentials then run in closed form.
    """

    a_minus: float
    a_plus: float
    layer_drift: Callable[[np.ndarray], np.ndarray]
    kappa_tilde: float
    r_tilde: float
    eps: float
    kappa_eff: float
    r: float
    drift_poly: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.drift_poly is not None:
            object.__setattr__(self, "drift_poly", np.asarray(self.drift_poly, dtype=float))
        if not self.kappa_tilde > 0.0:
            raise ValueError("kappa_tilde must be positive (zero noise is out of scope)")
        if not self.r_tilde > 1.0:
            raise ValueError("r_tilde = r/eps must exceed 1 (escape radius outside the layer)")
        end_lo = float(np.asarray(self.layer_drift(np.array(-1.0))))
        end_hi = float(np.asarray(self.layer_drift(np.array(1.0))))
        scale = max(1.0, abs(self.a_minus), abs(self.a_plus))
        if abs(end_lo - self.a_minus) > TOL_CONT * scale or abs(end_hi - self.a_plus) > TOL_CONT * scale:
            raise ValueError(
                "layer drift does not meet the outer drifts at s = +-1: "
                f"A(-1)={end_lo!r} vs a-={self.a_minus!r}, A(1)={end_hi!r} vs a+={self.a_plus!r}"
            )

    def drift(self, y: np.ndarray) -> np.ndarray:
        """Full piecewise drift phi(y~): a- / layer profile / a+."""
        arr = np.asarray(y, dtype=float)
        if self.drift_poly is not None:
            # polynomial layers are finite everywhere, so evaluate and clip
            val = npoly.polyval(arr, self.drift_poly)
            out = np.where(arr <= -1.0, self.a_minus,
                           np.where(arr >= 1.0, self.a_plus, val))
            return float(out) if out.ndim == 0 else out
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        out = np.empty_like(arr)
        below = arr <= -1.0
        above = arr >= 1.0
        inside = ~(below | above)
        out[below] = self.a_minus
        out[above] = self.a_plus
        if inside.any():
            out[inside] = self.layer_drift(arr[inside])
        return out[0] if scalar else out

    def region(self) -> RegionKind:
        return classify(self.a_minus, self.a_plus)

    def reflected(self) -> "ReducedSystem":
        """The system under y~ -> -y~ (drift s -> -phi(-s)); escape
        statistics are invariant under this reflection."""
        base_drift = self.layer_drift
        poly = None
        if self.drift_poly is not None:
            k = np.arange(len(self.drift_poly))
            poly = self.drift_poly * (-1.0) ** (k + 1)
        return replace(
            self,
            a_minus=-self.a_plus,
            a_plus=-self.a_minus,
            layer_drift=lambda s: -base_drift(-np.asarray(s, dtype=float)),
            drift_poly=poly,
        )


def reduce_system(system: SmoothedSystem, noise: NoiseSpec, r: float) -> ReducedSystem:
    """Collapse an n-dimensional smoothed noisy system to the 1-D normal SDE.

    Freezes the fields at the origin (the analysis point must be the
    coordinate origin), takes the switch components, and rescales by the
    layer width: kappa_tilde = kappa_eff/sqrt(eps), r_tilde = r/eps. The
    effective noise amplitude multiplies kappa by the Euclidean norm of
    the switch row of the diffusion matrix, which is the amplitude of the
    summed independent Brownian motions acting on the normal coordinate.

    Raises BadScales when eps >= r; merely warns when the softer guards
    eps <= r/5 and kappa <= r/2 are violated, since those are asymptotic
    orderings rather than hard bounds.
    """
    eps = system.eps
    if eps >= r:
        raise BadScales(f"need eps < r, got eps={eps} >= r={r}")
    if eps > r / 5.0 or noise.kappa > r / 2.0:
        warnings.warn(
            "scale separation eps << r and kappa << r is weak "
            f"(eps={eps}, kappa={noise.kappa}, r={r}); asymptotics may be poor",
            RuntimeWarning,
            stacklevel=2,
        )
    base = system.base
    origin = np.zeros(base.dim)
    idx = base.switch_index
    a_minus = float(np.asarray(base.f_minus(origin), dtype=float)[idx])
    a_plus = float(np.asarray(base.f_plus(origin), dtype=float)[idx])

    if system.layer_poly is not None:
        coeffs = system.layer_poly
        layer_drift = lambda s: npoly.polyval(np.asarray(s, dtype=float), coeffs)
    else:
        coeffs = None
        layer_drift = _vectorized_scalar(
            lambda s: float(np.asarray(system.layer_field(s, origin), dtype=float)[idx])
        )

    row = noise.diffusion[idx, :]
    kappa_eff = noise.kappa * float(np.linalg.norm(row))
    return ReducedSystem(
        a_minus=a_minus,
        a_plus=a_plus,
        layer_drift=layer_drift,
        kappa_tilde=kappa_eff / math.sqrt(eps),
        r_tilde=r / eps,
        eps=eps,
        kappa_eff=kappa_eff,
        r=r,
        drift_poly=coeffs,
    )


class _QuadAntiderivative:
    """-int_{-1}^{y} A(v) dv by incremental adaptive quadrature.

    Keeps a sorted list of already-integrated anchor points so repeated
    evaluations (quadrature nodes, refinement sweeps) only ever integrate
    short new segments. The memo is an internal cache; instances remain
    semantically immutable.
    """

    def __init__(self, layer_drift, tol: float = TOL_QUAD):
        self._drift = layer_drift
        self._tol = tol
        self._anchors: list[float] = [-1.0]
        self._values: dict[float, float] = {-1.0: 0.0}

    def _integral_from_minus_one(self, y: float) -> float:
        if y in self._values:
            return self._values[y]
        pos = bisect_left(self._anchors, y)
        anchor = self._anchors[pos - 1] if pos > 0 else self._anchors[0]
        piece, _ = quad(
            lambda v: float(np.asarray(self._drift(np.array(v)))),
            anchor,
            y,
            epsabs=self._tol,
            epsrel=1e-12,
            limit=200,
        )
        value = self._values[anchor] + piece
        insort(self._anchors, y)
        self._values[y] = value
        return value

    def __call__(self, y):
        arr = np.asarray(y, dtype=float)
        scalar = arr.ndim == 0
        flat = np.atleast_1d(arr).ravel()
        out = np.empty_like(flat)
        for i in np.argsort(flat):
            out[i] = -self._integral_from_minus_one(float(flat[i]))
        out = out.reshape(np.atleast_1d(arr).shape)
        return float(out[0]) if scalar else out


@dataclass(frozen=True)
class PiecewisePotential:
    """The potential V(y~) = -int_{-1}^{y~} phi, with analytic linear tails.

    V(-1) = 0 by construction, V' = -phi, and beyond the layer V continues
    with the constant outer slopes -a_minus (left) and -a_plus (right).
    """

    reduced: ReducedSystem
    interior: Callable[[np.ndarray], np.ndarray]
    V1: float

    def __call__(self, y):
        return potential_eval(self, y)


def make_potential(reduced: ReducedSystem, tol_quad: float = TOL_QUAD) -> PiecewisePotential:
    """Build the potential, in closed form when the layer drift is polynomial.

    V sits inside exp(2 V / kappa_tilde^2), so the interior antiderivative
    is evaluated either exactly (polynomial layer) or by adaptive
    quadrature at near-machine tolerance.
    """
    if reduced.drift_poly is not None:
        anti = npoly.polyint(reduced.drift_poly)
        offset = npoly.polyval(-1.0, anti)

        def interior(y):
            return -(npoly.polyval(np.asarray(y, dtype=float), anti) - offset)

    else:
        interior = _QuadAntiderivative(reduced.layer_drift, tol=tol_quad)
    v1 = float(np.asarray(interior(np.array(1.0))))
    return PiecewisePotential(reduced=reduced, interior=interior, V1=v1)


def potential_eval(pot: PiecewisePotential, y) -> float | np.ndarray:
    """Evaluate V: linear tails outside [-1, 1], antiderivative inside."""
    arr = np.asarray(y, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if not np.all(np.isfinite(arr)):
        raise ValueError("potential evaluated at a non-finite point")
    out = np.empty_like(arr)
    red = pot.reduced
    left = arr <= -1.0
    right = arr >= 1.0
    mid = ~(left | right)
    out[left] = -red.a_minus * (arr[left] + 1.0)
    out[right] = pot.V1 - red.a_plus * (arr[right] - 1.0)
    if mid.any():
        out[mid] = pot.interior(arr[mid])
    return float(out[0]) if scalar else out
