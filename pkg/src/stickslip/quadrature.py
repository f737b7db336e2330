"""Log-space composite Gauss-Legendre quadrature for exponential integrands.

Every integral here has the form ``int exp(f(x)) dx`` where the exponent f
can reach magnitudes of order 1e4, so values are carried as logarithms
throughout: panels are summed with log-sum-exp and nothing is ever
exponentiated before the largest exponent has been subtracted.

Panels are split at caller-supplied breakpoints (kinks of the potential,
turning points, the origin) and refined dyadically until the log of the
integral is stable to ``log_tol``, which equals the relative tolerance on
the integral itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import QuadratureFailure

ExponentFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureOptions:
    """Knobs for the panel quadrature.

    nodes: Gauss-Legendre points per panel.
    gap_nodes: points used on the short spans between consecutive outer
        nodes when accumulating the inner integral of a triangle domain.
    log_tol: convergence threshold on |log I_k - log I_{k-1}| between
        refinement levels; equals the relative tolerance on I itself.
    max_refinements: dyadic levels tried before giving up.
    initial_subdivisions: pieces each base panel is cut into at level 0;
        raise it to force a finer grid from the start (used by the
        refinement-stability tests).
    """

    nodes: int = 32
    gap_nodes: int = 8
    log_tol: float = 1e-9
    max_refinements: int = 12
    initial_subdivisions: int = 1


DEFAULT_OPTIONS = QuadratureOptions()


@lru_cache(maxsize=64)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return nodes, weights


def _panel_edges(a: float, b: float, breakpoints: Sequence[float], pieces: int) -> np.ndarray:
    """Sorted panel edges on [a, b]: breakpoints inside (a, b) plus a
    uniform split of every base panel into `pieces` parts."""
    inner = sorted({float(p) for p in breakpoints if a < p < b})
    base = np.array([a, *inner, b])
    parts = [np.linspace(base[i], base[i + 1], pieces + 1)[:-1] for i in range(len(base) - 1)]
    return np.append(np.concatenate(parts), b)


def _panel_nodes(edges: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes (ascending) and log-weights for a set of panels."""
    ref_x, ref_w = _leggauss(n)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * ref_x[None, :]
    log_w = np.log(ref_w)[None, :] + np.log(half)[:, None]
    return nodes.ravel(), log_w.ravel()


def log_integral_exp(
    fexp: ExponentFn,
    a: float,
    b: float,
    breakpoints: Sequence[float] = (),
    options: QuadratureOptions = DEFAULT_OPTIONS,
) -> float:
    """log of ``int_a^b exp(fexp(x)) dx``.

    `fexp` must accept and return ndarrays. Refines dyadically until the
    log-value is stable; raises QuadratureFailure if it never is.
    """
    if b <= a:
        if b == a:
            return -math.inf
        raise ValueError(f"empty integration range [{a}, {b}]")
    previous = None
    for level in range(options.max_refinements + 1):
        pieces = options.initial_subdivisions << level
        nodes, log_w = _panel_nodes(_panel_edges(a, b, breakpoints, pieces), options.nodes)
        value = float(logsumexp(log_w + fexp(nodes)))
        if previous is not None and abs(value - previous) < options.log_tol:
            return value
        previous = value
    raise QuadratureFailure(
        f"integral on [{a}, {b}] did not stabilise after "
        f"{options.max_refinements} refinements (last change {abs(value - previous):.3e})"
    )


def log_triangle_exp(
    fexp: ExponentFn,
    v_lo: float,
    v_hi: float,
    u_lo: float,
    breakpoints: Sequence[float] = (),
    options: QuadratureOptions = DEFAULT_OPTIONS,
) -> float:
    """log of ``int_{v_lo}^{v_hi} exp(fexp(v)) int_{u_lo}^{v} exp(-fexp(u)) du dv``.

    The inner integral is accumulated as a running log-sum over the gaps
    between consecutive outer nodes, so the whole triangle costs O(N)
    exponent evaluations per refinement level instead of O(N^2).
    Requires u_lo <= v_lo < v_hi.
    """
    if not (u_lo <= v_lo < v_hi):
        raise ValueError(f"triangle domain needs u_lo <= v_lo < v_hi, got {u_lo}, {v_lo}, {v_hi}")

    def neg(x: np.ndarray) -> np.ndarray:
        return -fexp(x)

    gap_x, gap_w = _leggauss(options.gap_nodes)
    previous = None
    for level in range(options.max_refinements + 1):
        pieces = options.initial_subdivisions << level
        v_nodes, log_w = _panel_nodes(_panel_edges(v_lo, v_hi, breakpoints, pieces), options.nodes)

        # running inner integral: head [u_lo, v_1], then node-to-node gaps
        if v_nodes[0] > u_lo:
            head_nodes, head_w = _panel_nodes(
                _panel_edges(u_lo, float(v_nodes[0]), breakpoints, pieces), options.nodes
            )
            log_head = float(logsumexp(head_w + neg(head_nodes)))
        else:
            log_head = -math.inf
        lo, hi = v_nodes[:-1], v_nodes[1:]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        gap_nodes = mid[:, None] + half[:, None] * gap_x[None, :]
        gap_logw = np.log(gap_w)[None, :] + np.log(half)[:, None]
        log_gaps = logsumexp(gap_logw + neg(gap_nodes), axis=1)
        log_prefix = np.logaddexp.accumulate(np.concatenate(([log_head], log_gaps)))

        value = float(logsumexp(log_w + fexp(v_nodes) + log_prefix))
        if previous is not None and abs(value - previous) < options.log_tol:
            return value
        previous = value
    raise QuadratureFailure(
        f"triangle integral v in [{v_lo}, {v_hi}] did not stabilise after "
        f"{options.max_refinements} refinements (last change {abs(value - previous):.3e})"
    )


def log1mexp(x: float) -> float:
    """log(1 - exp(-x)) for x > 0, stable for both tiny and huge x."""
    if x <= 0.0:
        raise ValueError("log1mexp needs x > 0")
    if x < math.log(2.0):
        return math.log(-math.expm1(-x))
    return math.log1p(-math.exp(-x))


def log_linexp_integral(log_f0: float, slope: float, length: float) -> float:
    """log of ``int_0^L exp(log_f0 + slope * x) dx`` for L = length > 0."""
    if length <= 0.0:
        raise ValueError("length must be positive")
    q = slope * length
    if abs(q) < 1e-12:
        return log_f0 + math.log(length) + 0.5 * q
    if q > 0.0:
        return log_f0 + q + log1mexp(q) - math.log(slope)
    return log_f0 + log1mexp(-q) - math.log(-slope)
