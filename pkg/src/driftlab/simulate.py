"""Path simulators: Euler-Maruyama, exact GBM and OU, and the coupled
time-varying-growth system.

All simulators are pure functions of their inputs and a seed; calling twice
with the same arguments gives bit-identical paths.  ``seed`` may be an int or
a tuple key such as ``(seed, replicate)`` for replicate loops.
"""

from __future__ import annotations

import numpy as np

from .errors import SimulationDivergedError
from .models import DiffusionSpec, GbmParams, OuParams
from .paths import Path, TimeGrid
from .rng import stream


def _stream_from(seed) -> np.random.Generator:
    if isinstance(seed, tuple):
        return stream(*seed)
    return stream(seed)


def _check_finite(arr, step: int, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise SimulationDivergedError(step, f"non-finite {what}")


def simulate_euler(spec: DiffusionSpec, grid: TimeGrid, seed) -> Path:
    """Euler-Maruyama: x_{k+1} = x_k + mu(x_k) dt + sigma(x_k) sqrt(dt) z_k."""
    dt = grid.dt
    sqdt = np.sqrt(dt)
    z = _stream_from(seed).standard_normal((grid.n_steps, spec.state_dim))
    values = np.empty((grid.n_steps + 1, spec.state_dim))
    x = spec.x0.copy()
    values[0] = x
    for k in range(grid.n_steps):
        mu = spec.drift_at(x)
        sig = spec.diffusion_at(x)
        _check_finite(mu, k, "drift")
        _check_finite(sig, k, "diffusion")
        x = x + mu * dt + sig * sqdt * z[k]
        _check_finite(x, k, "state")
        values[k + 1] = x
    return Path(times=grid.times(), values=values)


def euler_step_batch(spec: DiffusionSpec, x: np.ndarray, dt: float, z: np.ndarray,
                     step: int = 0) -> np.ndarray:
    """One Euler step applied to a batch of states of shape (n, state_dim)."""
    mu = spec.drift_at(x)
    sig = spec.diffusion_at(x)
    _check_finite(mu, step, "drift")
    _check_finite(sig, step, "diffusion")
    return x + mu * dt + sig * np.sqrt(dt) * z


def euler_endpoints(spec: DiffusionSpec, grid: TimeGrid, z: np.ndarray) -> np.ndarray:
    """Terminal states of Euler paths driven by given normals.

    ``z`` has shape (n_reps, n_steps, state_dim) (a trailing dim of 1 may be
    omitted for scalar models); drift and diffusion must be vectorizable.
    Marks diverged replicates with NaN instead of raising, so replicate
    studies can drop and count them.
    """
    if z.ndim == 2:
        z = z[:, :, None]
    n_reps, n_steps, _ = z.shape
    dt = grid.dt
    sqdt = np.sqrt(dt)
    x = np.broadcast_to(spec.x0, (n_reps, spec.state_dim)).copy()
    for k in range(n_steps):
        with np.errstate(over="ignore", invalid="ignore"):
            mu = spec.drift_at(x)
            sig = spec.diffusion_at(x)
            x = x + mu * dt + sig * sqdt * z[:, k, :]
    return x


def simulate_gbm_exact(p: GbmParams, grid: TimeGrid, seed) -> Path:
    """Exact GBM path x0 * exp((beta - sigma^2/2) t + sigma B_t).

    Uses the same normal draws, in the same order, as ``simulate_euler`` on the
    GBM spec with the same seed, so the two are pathwise coupled.
    """
    z = _stream_from(seed).standard_normal(grid.n_steps)
    t = grid.times()
    b = np.concatenate([[0.0], np.cumsum(np.sqrt(grid.dt) * z)])
    values = p.x0 * np.exp((p.beta - 0.5 * p.sigma**2) * (t - t[0]) + p.sigma * b)
    return Path(times=t, values=values)


def ou_transition_moments(p: OuParams, dt) -> tuple:
    """Mean coefficient, offset, and variance of the exact OU transition.

    b_{t+dt} | b_t ~ Normal(beta_bar + (b_t - beta_bar) e^{-gamma dt},
    sigma^2 (1 - e^{-2 gamma dt}) / (2 gamma)); returned as (phi, offset, var)
    with mean = phi * b_t + offset.
    """
    phi = np.exp(-p.gamma * np.asarray(dt, dtype=float))
    offset = p.beta_bar * (1.0 - phi)
    var = p.sigma**2 * (1.0 - phi**2) / (2.0 * p.gamma)
    return phi, offset, var


def simulate_ou(p: OuParams, grid: TimeGrid, seed) -> Path:
    """OU path sampled by its exact Gaussian transition (no discretization error)."""
    z = _stream_from(seed).standard_normal(grid.n_steps)
    phi, offset, var = ou_transition_moments(p, grid.dt)
    sd = np.sqrt(var)
    values = np.empty(grid.n_steps + 1)
    values[0] = p.b0
    for k in range(grid.n_steps):
        values[k + 1] = phi * values[k] + offset + sd * z[k]
    return Path(times=grid.times(), values=values)


def ou_paths_batch(p: OuParams, grid: TimeGrid, z: np.ndarray) -> np.ndarray:
    """Exact OU paths for a batch of normal draws of shape (n_reps, n_steps)."""
    n_reps, n_steps = z.shape
    phi, offset, var = ou_transition_moments(p, grid.dt)
    sd = np.sqrt(var)
    values = np.empty((n_reps, n_steps + 1))
    values[:, 0] = p.b0
    for k in range(n_steps):
        values[:, k + 1] = phi * values[:, k] + offset + sd * z[:, k]
    return values


def simulate_tv_growth(ou: OuParams, x0: float, grid: TimeGrid, seed) -> tuple:
    """Simulate the coupled system: growth rate b_t by exact OU transitions and
    dx = b_t x dt integrated with b frozen per step, x_{k+1} = x_k exp(b_k dt).

    The exponential update keeps x strictly positive; negative growth rates
    from the OU model are allowed and simply shrink x.  Returns
    (beta_path, x_path) on the shared grid.
    """
    if not x0 > 0:
        raise ValueError("x0 must be positive")
    beta_path = simulate_ou(ou, grid, seed)
    b = beta_path.scalar_values()
    dt = grid.dt
    x = np.empty(grid.n_steps + 1)
    x[0] = x0
    with np.errstate(over="raise"):
        for k in range(grid.n_steps):
            try:
                x[k + 1] = x[k] * np.exp(b[k] * dt)
            except FloatingPointError:
                raise SimulationDivergedError(k, "x overflow in exponential update") from None
    if not np.all(np.isfinite(x)):
        bad = int(np.argmax(~np.isfinite(x)))
        raise SimulationDivergedError(bad, "x overflow in exponential update")
    return beta_path, Path(times=grid.times(), values=x)
