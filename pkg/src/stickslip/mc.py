"""Seeded Euler-Maruyama simulation of the reduced and full systems.

This is the independent validation arm: escape times and layer occupation
fractions estimated by direct simulation, to be compared against the
quadrature and asymptotic modules.

Reproducibility contract: path i draws its normals from the counter-based
substream Philox(key=(seed, i)). Each path's noise depends only on
(seed, i) - never on how many other paths run, in what order, or how the
draws are blocked (the generator's normal stream is partition-invariant) -
so estimates are identical for any degree of parallelism and a single
re-simulated path reproduces its column of a batch exactly.

Exit times use fixed-step Euler-Maruyama without boundary-crossing
corrections; the O(sqrt(step)) first-passage bias that implies is accepted
and the convergence tests exercise it explicitly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import NoiseSpec, ReducedSystem, RegionKind, SmoothedSystem, classify
from .errors import NotNormalizable

_BLOCK = 1024
_BLOCK_ELEMENTS = 8_000_000  # cap on normals held in memory at once
_MASK64 = (1 << 64) - 1


def _block_size(n_paths: int) -> int:
    return max(64, min(_BLOCK, _BLOCK_ELEMENTS // max(1, n_paths)))


def _substream(seed: int, index: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class McConfig:
    """Simulation controls: step and horizon are in the scaled time of the
    reduced SDE when simulating reduced systems, and in the original time
    units when simulating a full system."""

    step: float
    n_paths: int
    seed: int
    t_max: float

    def __post_init__(self) -> None:
        if not self.step > 0.0:
            raise ValueError("step must be positive")
        if not self.t_max > 0.0:
            raise ValueError("t_max must be positive")
        if self.n_paths < 1:
            raise ValueError("n_paths must be a positive integer")


def default_config(red: ReducedSystem, seed: int, n_paths: int = 10_000) -> McConfig:
    """Step resolving both the drift and diffusion scales, horizon long
    enough for many drift transits."""
    step = min(0.01, 0.01 * red.kappa_tilde**2)
    if red.a_plus > 0.0:
        t_max = 100.0 * red.r_tilde / red.a_plus
    else:
        t_max = 100.0 * red.r_tilde
    return McConfig(step=step, n_paths=n_paths, seed=seed, t_max=t_max)


@dataclass(frozen=True)
class McEstimate:
    """A Monte-Carlo mean with its sampling error.

    `unreliable` is set whenever any path was censored at the horizon:
    a mean over censored escape times is biased low and should only be
    read as a lower bound.
    """

    mean: float
    stderr: float
    ci95: tuple[float, float]
    n_censored: int
    n_paths: int
    seed: int
    unreliable: bool


@dataclass(frozen=True)
class SamplePath:
    """One trajectory. `values` has shape (k,) for reduced systems and
    (k, dim) for full systems; `times` starts at 0."""

    times: np.ndarray
    values: np.ndarray
    exited: bool
    exit_time: float | None


def _n_steps(cfg: McConfig) -> int:
    return int(math.ceil(cfg.t_max / cfg.step - 1e-12))


def _warn_step(red: ReducedSystem, cfg: McConfig) -> None:
    recommended = 0.01 * min(1.0, red.kappa_tilde**2)
    if cfg.step > recommended * (1.0 + 1e-12):
        warnings.warn(
            f"step {cfg.step} exceeds the recommended {recommended:.3g} "
            "(0.01 * min(1, kappa_tilde^2)); discretisation bias may dominate",
            RuntimeWarning,
            stacklevel=3,
        )


def simulate_reduced(
    red: ReducedSystem, cfg: McConfig, y0: float, path_index: int = 0
) -> SamplePath:
    """One Euler-Maruyama path of the reduced SDE, stopped at the first
    |y~| >= r~ or at the horizon.

    y_{k+1} = y_k + phi(y_k) h + kappa_tilde sqrt(h) xi_k with xi_k from
    the (seed, path_index) substream; identical inputs give bit-identical
    paths.
    """
    if abs(y0) > red.r_tilde:
        raise ValueError("start point lies outside the escape interval")
    _warn_step(red, cfg)
    h = cfg.step
    noise_scale = red.kappa_tilde * math.sqrt(h)
    n_steps = _n_steps(cfg)
    gen = _substream(cfg.seed, path_index)
    values = np.empty(n_steps + 1)
    values[0] = y0
    y = float(y0)
    exited = False
    exit_time = None
    step = 0
    while step < n_steps and not exited:
        block = min(_BLOCK, n_steps - step)
        z = gen.standard_normal(block)
        for b in range(block):
            y = y + float(red.drift(np.float64(y))) * h + noise_scale * z[b]
            values[step + 1] = y
            step += 1
            if abs(y) >= red.r_tilde:
                exited = True
                exit_time = step * h
                break
    kept = step + 1
    return SamplePath(
        times=np.arange(kept) * h, values=values[:kept], exited=exited, exit_time=exit_time
    )


def _escape_samples(red: ReducedSystem, cfg: McConfig) -> tuple[np.ndarray, np.ndarray]:
    """Exit times (t_max where censored) and the censoring mask, vectorised
    across paths with per-path substreams."""
    h = cfg.step
    n = cfg.n_paths
    n_steps = _n_steps(cfg)
    noise_scale = red.kappa_tilde * math.sqrt(h)
    r_tilde = red.r_tilde
    gens = [_substream(cfg.seed, i) for i in range(n)]
    times = np.full(n, cfg.t_max)
    censored = np.ones(n, dtype=bool)
    y = np.zeros(n)
    alive = np.arange(n)
    step = 0
    while step < n_steps and alive.size:
        block = min(_block_size(alive.size), n_steps - step)
        z = np.empty((block, alive.size))
        for row, idx in enumerate(alive):
            z[:, row] = gens[idx].standard_normal(block)
        z = np.ascontiguousarray(z)
        ya = y[alive].copy()
        done = np.zeros(alive.size, dtype=bool)
        for b in range(block):
            act = ~done
            if not act.any():
                break
            ya[act] = ya[act] + red.drift(ya[act]) * h + noise_scale * z[b, act]
            hit = act & (np.abs(ya) >= r_tilde)
            if hit.any():
                times[alive[hit]] = (step + b + 1) * h
                censored[alive[hit]] = False
                done |= hit
        y[alive] = ya
        alive = alive[~done]
        step += block
    return times, censored


def _estimate(samples: np.ndarray, n_censored: int, cfg: McConfig) -> McEstimate:
    n = len(samples)
    if n < 2:
        raise ValueError("need at least two paths for a standard error")
    mean = float(samples.mean())
    stderr = float(samples.std(ddof=1) / math.sqrt(n))
    half = 1.96 * stderr
    return McEstimate(
        mean=mean,
        stderr=stderr,
        ci95=(mean - half, mean + half),
        n_censored=n_censored,
        n_paths=n,
        seed=cfg.seed,
        unreliable=n_censored > 0,
    )


def mc_escape_time(red: ReducedSystem, cfg: McConfig) -> McEstimate:
    """Mean first time |y~| reaches r~, starting from y~ = 0.

    Censored paths enter the mean at the horizon value t_max, which biases
    the estimate low, so any censoring flags the estimate unreliable.
    """
    _warn_step(red, cfg)
    times, censored = _escape_samples(red, cfg)
    return _estimate(times, int(censored.sum()), cfg)


def mc_occupation(red: ReducedSystem, cfg: McConfig, t_burn: float) -> McEstimate:
    """Time-average fraction of post-burn-in steps with |y~| <= 1,
    averaged over paths; the standard error is across paths.

    Only attracting sliding configurations have a stationary layer
    occupation; anything else raises NotNormalizable. The burn-in should
    cover the O(kappa_tilde^2) settling time, i.e. t_burn >= 10 kt^2.
    """
    if classify(red.a_minus, red.a_plus) is not RegionKind.ATTRACTING_SLIDING:
        raise NotNormalizable(
            "occupation sampling needs attracting sliding "
            f"(a- > 0 > a+); got a-={red.a_minus!r}, a+={red.a_plus!r}"
        )
    if t_burn < 10.0 * red.kappa_tilde**2:
        warnings.warn(
            f"burn-in {t_burn} is below the settling scale "
            f"10*kappa_tilde^2 = {10.0 * red.kappa_tilde**2:.3g}",
            RuntimeWarning,
            stacklevel=2,
        )
    _warn_step(red, cfg)
    h = cfg.step
    n = cfg.n_paths
    n_steps = _n_steps(cfg)
    n_burn = int(math.floor(t_burn / h + 1e-12))
    if n_burn >= n_steps:
        raise ValueError("horizon t_max does not extend past the burn-in")
    noise_scale = red.kappa_tilde * math.sqrt(h)
    gens = [_substream(cfg.seed, i) for i in range(n)]
    counts = np.zeros(n)
    y = np.zeros(n)
    step = 0
    while step < n_steps:
        block = min(_block_size(n), n_steps - step)
        z = np.empty((block, n))
        for i in range(n):
            z[:, i] = gens[i].standard_normal(block)
        z = np.ascontiguousarray(z)
        for b in range(block):
            y = y + red.drift(y) * h + noise_scale * z[b]
            if step + b + 1 > n_burn:
                counts += np.abs(y) <= 1.0
        step += block
    fractions = counts / (n_steps - n_burn)
    return _estimate(fractions, 0, cfg)


def simulate_full(
    system: SmoothedSystem,
    noise: NoiseSpec,
    x0: np.ndarray,
    cfg: McConfig,
    stop_radius: float | None = None,
    path_index: int = 0,
) -> SamplePath:
    """One Euler-Maruyama path of the full n-dimensional smoothed SDE.

    The drift picks f-, the layer field, or f+ from the sign of the switch
    coordinate relative to the layer width; the diffusion is
    kappa * diffusion @ dW with a full vector of independent increments.
    If `stop_radius` is given the path stops when |x[switch_index]|
    reaches it.
    """
    base = system.base
    idx = base.switch_index
    eps = system.eps
    x = np.array(x0, dtype=float)
    if x.shape != (base.dim,):
        raise ValueError(f"x0 must have shape ({base.dim},)")
    h = cfg.step
    sqrt_h = math.sqrt(h)
    n_steps = _n_steps(cfg)
    gen = _substream(cfg.seed, path_index)
    states = np.empty((n_steps + 1, base.dim))
    states[0] = x
    exited = False
    exit_time = None
    step = 0
    while step < n_steps and not exited:
        block = min(_BLOCK, n_steps - step)
        z = gen.standard_normal(block * base.dim).reshape(block, base.dim)
        for b in range(block):
            y = x[idx]
            if y <= -eps:
                drift = base.f_minus(x)
            elif y >= eps:
                drift = base.f_plus(x)
            else:
                drift = system.layer_field(y / eps, x)
            x = x + np.asarray(drift, dtype=float) * h + noise.kappa * sqrt_h * (
                noise.diffusion @ z[b]
            )
            states[step + 1] = x
            step += 1
            if stop_radius is not None and abs(x[idx]) >= stop_radius:
                exited = True
                exit_time = step * h
                break
    kept = step + 1
    return SamplePath(
        times=np.arange(kept) * h, values=states[:kept], exited=exited, exit_time=exit_time
    )
