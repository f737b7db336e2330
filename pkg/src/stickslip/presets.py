"""Named system presets addressable from the CLI and from user code.

A preset is a builder taking keyword parameters and returning a
ReducedSystem. Two ship by default:

- "cubic-friction": the dry-friction oscillator layer
  (z0, alpha, mu, eps, kappa, r);
- "linear": a straight-line interpolation between the outer drifts
  (a_minus, a_plus, eps, kappa, r), the smoothing that never creates
  spurious dynamics.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as npoly

from .core import ReducedSystem
from .friction import FrictionParams, reduced_from_friction

PresetBuilder = Callable[..., ReducedSystem]


def reduced_from_poly(
    coeffs, eps: float, kappa: float, r: float,
    a_minus: float | None = None, a_plus: float | None = None,
) -> ReducedSystem:
    """A reduced system whose layer drift is the polynomial with the given
    ascending coefficients in s in [-1, 1]. Outer drifts default to the
    polynomial's endpoint values; explicit values must agree with them."""
    c = np.asarray(coeffs, dtype=float)
    end_lo = float(npoly.polyval(-1.0, c))
    end_hi = float(npoly.polyval(1.0, c))
    return ReducedSystem(
        a_minus=end_lo if a_minus is None else a_minus,
        a_plus=end_hi if a_plus is None else a_plus,
        layer_drift=lambda s: npoly.polyval(np.asarray(s, dtype=float), c),
        kappa_tilde=kappa / math.sqrt(eps),
        r_tilde=r / eps,
        eps=eps,
        kappa_eff=kappa,
        r=r,
        drift_poly=c,
    )


def _linear(a_minus: float, a_plus: float, eps: float, kappa: float, r: float) -> ReducedSystem:
    mid = 0.5 * (a_plus + a_minus)
    half = 0.5 * (a_plus - a_minus)
    return reduced_from_poly([mid, half], eps=eps, kappa=kappa, r=r)


def _cubic_friction(
    z0: float, alpha: float, mu: float, eps: float, kappa: float, r: float
) -> ReducedSystem:
    return reduced_from_friction(
        FrictionParams(alpha=alpha, mu=mu, eps=eps, kappa=kappa, r=r, z0=z0)
    )


PRESETS: dict[str, PresetBuilder] = {
    "cubic-friction": _cubic_friction,
    "linear": _linear,
}


def get_preset(name: str) -> PresetBuilder:
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise KeyError(f"unknown preset {name!r}; available: {known}") from None
