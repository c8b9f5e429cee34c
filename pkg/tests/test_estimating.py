import numpy as np
import pytest

from driftlab.adequacy import simulate_states_at
from driftlab.errors import EstimationFailedError
from driftlab.estimating import (
    EstimatingFunction,
    ee_solve,
    mc_conditional_expectation,
    raw_moment_psi,
)
from driftlab.models import DiffusionSpec, GbmParams, gbm_beta_spec, gbm_spec
from driftlab.observe import ObservationSet
from driftlab.rng import stream

SPEC = gbm_spec(GbmParams(beta=0.1, sigma=0.2, x0=1.0))


def _obs(times, key, p=GbmParams(beta=0.1, sigma=0.2, x0=1.0)):
    return ObservationSet(times=times, values=simulate_states_at(p, times, stream(*key))[:, 0])


def test_constant_psi_returns_one_exactly():
    ef = EstimatingFunction(psi=lambda x, y, th: np.ones(np.shape(y) + (1,)), J=7)
    est = mc_conditional_expectation(SPEC, ef, 0.0, 1.0, 1.0, seed=3)
    assert est[0] == 1.0


def test_identity_psi_estimates_conditional_mean():
    # E[Y | x] = x e^{beta (t - s)} for GBM
    ef = EstimatingFunction(psi=raw_moment_psi((1,)), J=10_000)
    est = mc_conditional_expectation(SPEC, ef, 0.0, 0.5, 1.0, seed=4)
    target = np.exp(0.1 * 0.5)
    # MC standard error of the mean at J = 1e4
    se = target * 0.2 * np.sqrt(0.5) / np.sqrt(10_000)
    assert abs(est[0] - target) < 3.5 * se


def test_variance_shrinks_with_j():
    ef1 = EstimatingFunction(psi=raw_moment_psi((1,)), J=1)
    ef100 = EstimatingFunction(psi=raw_moment_psi((1,)), J=100)
    est1 = np.array([mc_conditional_expectation(SPEC, ef1, 0.0, 0.5, 1.0, (9, r))[0]
                     for r in range(1000)])
    est100 = np.array([mc_conditional_expectation(SPEC, ef100, 0.0, 0.5, 1.0, (9, r))[0]
                       for r in range(1000)])
    ratio = est1.var(ddof=1) / est100.var(ddof=1)
    assert 60 < ratio < 160


def test_all_divergent_raises():
    bad = DiffusionSpec(drift=lambda x, th: np.full_like(x, np.nan),
                        diffusion=lambda x, th: np.ones_like(x),
                        theta=[0.0], x0=[1.0])
    ef = EstimatingFunction(psi=raw_moment_psi((1,)), J=4)
    with pytest.raises(EstimationFailedError):
        mc_conditional_expectation(bad, ef, 0.0, 1.0, 1.0, seed=0)


def test_divergence_counter_in_diagnostics():
    ef = EstimatingFunction(psi=raw_moment_psi((1,)), J=16)
    _, diag = mc_conditional_expectation(SPEC, ef, 0.0, 0.5, 1.0, seed=1,
                                         return_diagnostics=True)
    assert diag["divergent"] == 0


def test_ee_closed_form_root_matches_moment_estimator():
    # with the exact conditional mean, the root of sum(y_i - x_i e^{beta dt}) = 0
    # is beta = log(sum y / sum x) / dt
    times = 0.1 * np.arange(201)
    obs = _obs(times, (31, 0))
    x, y = obs.values[:-1], obs.values[1:]
    analytic = np.log(y.sum() / x.sum()) / 0.1
    ef = EstimatingFunction(psi=raw_moment_psi((1,)), J=1)
    fit = ee_solve(gbm_beta_spec(0.1, 0.2), ef, obs, [0.05], seed=0, tol=1e-10,
                   expectation_fn=lambda xs, dts, th: (xs * np.exp(th[0] * dts))[:, None])
    assert fit.converged
    assert fit.theta_hat[0] == pytest.approx(analytic, abs=1e-8)


def test_ee_mc_estimator_is_consistent_across_replications():
    # moderate noise keeps the moment estimator's finite-sample bias
    # negligible against the replication standard error
    times = 0.1 * np.arange(201)
    p = GbmParams(beta=0.1, sigma=0.05, x0=1.0)
    ef = EstimatingFunction(psi=raw_moment_psi((1,)), J=8)
    spec = gbm_beta_spec(0.1, 0.05)
    estimates = []
    for rep in range(200):
        obs = _obs(times, (32, rep), p)
        fit = ee_solve(spec, ef, obs, [0.1], seed=(32, "mc", rep))
        assert fit.converged
        estimates.append(fit.theta_hat[0])
    estimates = np.array(estimates)
    se = estimates.std(ddof=1) / np.sqrt(len(estimates))
    assert abs(estimates.mean() - 0.1) < 2 * se


def test_ee_bit_identical_under_fixed_seed():
    times = 0.1 * np.arange(51)
    obs = _obs(times, (33, 0))
    ef = EstimatingFunction(psi=raw_moment_psi((1,)), J=4)
    spec = gbm_beta_spec(0.1, 0.2)
    a = ee_solve(spec, ef, obs, [0.1], seed=(33, "mc"))
    b = ee_solve(spec, ef, obs, [0.1], seed=(33, "mc"))
    assert a.theta_hat[0] == b.theta_hat[0]
    assert a.objective_value == b.objective_value
