"""Monte Carlo estimating functions for discretely observed diffusions.

When the conditional expectation E[psi(X_s, X_t, theta) | X_s = x] has no
closed form it is estimated by J forward simulations from x.  Centering psi
by that estimate gives a martingale estimating function whose root estimates
theta; using J replicates instead of the exact expectation inflates the
estimator's asymptotic variance by the factor (1 + 1/J), so small J is fine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EstimationFailedError
from .models import DiffusionSpec
from .observe import ObservationSet
from .results import FitResult
from .rng import stream

MIN_SUBSTEPS = 20


@dataclass(frozen=True)
class EstimatingFunction:
    """psi(x_s, x_t, theta) -> vector of length dim(theta), plus the replicate count J.

    ``psi`` must vectorize: given arrays x, y of shape (n,), it returns
    (n, dim_theta).
    """

    psi: Callable
    J: int

    def __post_init__(self):
        if self.J < 1:
            raise ValueError("J must be at least 1")


def raw_moment_psi(orders=(1,)) -> Callable:
    """Polynomial moment functions psi_m(x, y, theta) = y^m for m in orders."""
    orders = tuple(orders)

    def psi(x, y, theta):
        y = np.asarray(y, dtype=float)
        return np.stack([y**m for m in orders], axis=-1)

    return psi


def _euler_terminal(spec: DiffusionSpec, x0, span, z) -> np.ndarray:
    """Terminal values of scalar Euler paths from x0 driven by normals z.

    ``x0`` broadcasts against ``z[..., 0]``; the substep is span / z.shape[-1].
    Diverged paths propagate NaN/inf instead of raising.
    """
    n_sub = z.shape[-1]
    delta = span / n_sub
    sqd = np.sqrt(delta)
    x = np.broadcast_to(np.asarray(x0, dtype=float), z.shape[:-1]).copy()
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n_sub):
            mu = np.asarray(spec.drift(x, spec.theta), dtype=float)
            sig = np.asarray(spec.diffusion(x, spec.theta), dtype=float)
            x = x + mu * delta + sig * sqd * z[..., k]
    return x


def mc_conditional_expectation(spec: DiffusionSpec, ef: EstimatingFunction,
                               s: float, t: float, x: float, seed,
                               n_substeps: int = MIN_SUBSTEPS,
                               return_diagnostics: bool = False):
    """Estimate E[psi(x, X_t, theta) | X_s = x] by J Euler fine paths.

    The internal substep is at most (t - s)/20.  Diverged replicates are
    dropped and counted; if every replicate diverges an EstimationFailedError
    is raised.
    """
    if not t > s:
        raise ValueError("t must exceed s")
    n_substeps = max(n_substeps, MIN_SUBSTEPS)
    z = stream(seed).standard_normal((ef.J, n_substeps))
    y = _euler_terminal(spec, x, t - s, z)
    ok = np.isfinite(y)
    n_divergent = int(np.sum(~ok))
    if not np.any(ok):
        raise EstimationFailedError(f"all {ef.J} replicates diverged")
    vals = np.asarray(ef.psi(np.full(ok.sum(), float(x)), y[ok], spec.theta), dtype=float)
    est = vals.mean(axis=0)
    if return_diagnostics:
        return est, {"divergent": n_divergent}
    return est


def ee_solve(spec: DiffusionSpec, ef: EstimatingFunction, obs: ObservationSet,
             init_theta, seed, n_substeps: int = MIN_SUBSTEPS,
             expectation_fn: Callable | None = None,
             tol: float = 1e-6, max_iter: int = 80) -> FitResult:
    """Solve the martingale estimating equation sum_i psi~(x_i, x_{i+1}, theta) = 0,
    where psi~ centers psi by its (estimated) conditional expectation.

    The Monte Carlo draws are keyed per observation pair and frozen across
    theta evaluations (common random numbers), so the residual is a smooth
    deterministic function of theta and the whole solve is reproducible.
    ``expectation_fn(x, dts, theta) -> (n, k)`` substitutes an exact
    conditional expectation for the Monte Carlo one (the J = infinity
    baseline).  Root-finding is damped Newton on the residual with a
    finite-difference Jacobian.
    """
    if len(obs) < 2:
        raise ValueError("need at least two observations")
    values = np.asarray(obs.values, dtype=float).reshape(len(obs), -1)[:, 0]
    x_s, x_t = values[:-1], values[1:]
    dts = np.diff(obs.times)
    n_pairs = len(dts)
    theta0 = np.atleast_1d(np.asarray(init_theta, dtype=float))
    k = len(theta0)

    if expectation_fn is None:
        # one frozen normal block per observation pair; row j is MC sample j
        z = np.empty((n_pairs, ef.J, max(n_substeps, MIN_SUBSTEPS)))
        for i in range(n_pairs):
            z[i] = stream(seed, "ee", i).standard_normal(z.shape[1:])

    divergent = 0

    def residual(theta):
        nonlocal divergent
        spec_th = spec.with_theta(theta)
        psi_data = np.asarray(ef.psi(x_s, x_t, theta), dtype=float).reshape(n_pairs, k)
        if expectation_fn is not None:
            cond = np.asarray(expectation_fn(x_s, dts, theta), dtype=float).reshape(n_pairs, k)
        else:
            y = np.empty((n_pairs, ef.J))
            for dt in np.unique(dts):
                m = dts == dt
                y[m] = _euler_terminal(spec_th, x_s[m][:, None], dt, z[m])
            sim = np.asarray(
                ef.psi(np.repeat(x_s, ef.J), y.reshape(-1), theta), dtype=float
            ).reshape(n_pairs, ef.J, k)
            ok = np.all(np.isfinite(sim), axis=2)
            divergent = int(np.sum(~ok))
            if np.any(~ok.any(axis=1)):
                raise EstimationFailedError("all replicates diverged for some pair")
            sim = np.where(ok[:, :, None], sim, 0.0)
            cond = sim.sum(axis=1) / ok.sum(axis=1)[:, None]
        return (psi_data - cond).sum(axis=0)

    theta = theta0.copy()
    r = residual(theta)
    nrm = float(np.linalg.norm(r))
    nit = 0
    converged = nrm <= tol
    while not converged and nit < max_iter:
        nit += 1
        jac = np.empty((k, k))
        for j in range(k):
            h = 1e-6 * max(1.0, abs(theta[j]))
            tp = theta.copy()
            tp[j] += h
            jac[:, j] = (residual(tp) - r) / h
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            step = -r
        # damp until the residual norm actually decreases
        t_damp = 1.0
        improved = False
        while t_damp >= 1.0 / 1024.0:
            cand = theta + t_damp * step
            r_cand = residual(cand)
            n_cand = float(np.linalg.norm(r_cand))
            if np.isfinite(n_cand) and n_cand < nrm:
                theta, r, nrm = cand, r_cand, n_cand
                improved = True
                break
            t_damp *= 0.5
        if not improved:
            break
        converged = nrm <= tol

    return FitResult(
        theta_hat=theta,
        objective_value=nrm,
        iterations=nit,
        converged=converged,
        seed=seed if isinstance(seed, int) else 0,
        standard_errors=None,
        diagnostics={"divergent_replicates": divergent, "residual_norm": nrm,
                     "J": ef.J if expectation_fn is None else None},
    )
