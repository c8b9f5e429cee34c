import numpy as np
import pytest

from driftlab.adequacy import simulate_states_at
from driftlab.densities import gbm_transition_logdensity
from driftlab.errors import InvalidStartError, NonFiniteTermError
from driftlab.likelihood import (
    EulerDensity,
    FokkerPlanckDensity,
    GbmDensity,
    OuDensity,
    SimplexOptions,
    discrete_loglikelihood,
    mle_fit,
)
from driftlab.models import DiffusionSpec, GbmParams, OuParams, gbm_spec
from driftlab.observe import ObservationSet
from driftlab.rng import stream

P_GBM = GbmParams(beta=0.1, sigma=0.2, x0=1.0)


def _gbm_obs(p, times, key):
    return ObservationSet(times=times, values=simulate_states_at(p, times, stream(*key))[:, 0])


def test_single_pair_equals_density():
    obs = ObservationSet(times=[0.0, 0.5], values=[1.0, 1.2])
    td = GbmDensity(P_GBM)
    assert discrete_loglikelihood(td, obs) == pytest.approx(
        gbm_transition_logdensity(P_GBM, 0.5, 1.0, 1.2), rel=1e-14)


def test_true_theta_beats_perturbed_on_average():
    times = 0.1 * np.arange(101)
    td_true = GbmDensity(P_GBM)
    td_wrong = GbmDensity(GbmParams(beta=0.6, sigma=0.2, x0=1.0))
    diffs = []
    for rep in range(100):
        obs = _gbm_obs(P_GBM, times, (1001, rep))
        diffs.append(discrete_loglikelihood(td_true, obs)
                     - discrete_loglikelihood(td_wrong, obs))
    assert np.mean(diffs) > 0


def test_time_reversal_invariance_for_bm():
    # Brownian motion with constant sigma: Gaussian increments are symmetric
    bm = DiffusionSpec(drift=lambda x, th: 0.0 * x,
                       diffusion=lambda x, th: 0.7 * np.ones_like(x),
                       theta=[0.0], x0=[0.0])
    td = EulerDensity(bm)
    times = np.array([0.0, 0.3, 1.1, 1.4, 2.0])
    values = np.array([0.0, -0.2, 0.5, 0.1, 0.4])
    fwd = ObservationSet(times=times, values=values)
    rev = ObservationSet(times=times[-1] - times[::-1], values=values[::-1])
    assert discrete_loglikelihood(td, fwd) == pytest.approx(
        discrete_loglikelihood(td, rev), rel=1e-12)


def test_nonfinite_term_reports_pair():
    # the Euler variance sigma(x)^2 dt underflows to zero at x = 1e-300,
    # making the second transition term non-finite
    obs = ObservationSet(times=[0.0, 0.5, 1.0], values=[1.0, 1e-300, 1.0])
    td = EulerDensity(gbm_spec(P_GBM))
    with pytest.raises(NonFiniteTermError) as err:
        discrete_loglikelihood(td, obs)
    assert err.value.pair == 1


def test_mle_matches_closed_form_with_fixed_sigma():
    times = 0.1 * np.arange(501)
    obs = _gbm_obs(P_GBM, times, (77, 0))
    r = np.diff(np.log(obs.values))
    beta_closed = np.mean(r) / 0.1 + 0.5 * P_GBM.sigma**2
    td = GbmDensity(P_GBM, free=("beta",))
    fit = mle_fit(td, obs, [0.3], compute_stderr=False)
    assert fit.converged
    assert fit.theta_hat[0] == pytest.approx(beta_closed, abs=1e-6)


def test_mle_from_optimum_stays_there():
    times = 0.1 * np.arange(301)
    obs = _gbm_obs(P_GBM, times, (78, 0))
    td = GbmDensity(P_GBM, free=("beta",))
    first = mle_fit(td, obs, [0.1], compute_stderr=False)
    again = mle_fit(td, obs, first.theta_hat, compute_stderr=False)
    assert again.converged
    assert again.theta_hat[0] == pytest.approx(first.theta_hat[0], abs=1e-6)
    assert again.iterations < first.iterations


def test_mle_joint_beta_sigma_recovers_truth_roughly():
    times = 0.1 * np.arange(501)
    obs = _gbm_obs(P_GBM, times, (79, 0))
    fit = mle_fit(GbmDensity(P_GBM), obs, [0.2, 0.4])
    assert fit.converged
    assert fit.standard_errors is not None
    assert np.all(np.abs(fit.theta_hat - [0.1, 0.2]) <= 4 * fit.standard_errors)


def test_mle_invalid_start():
    obs = ObservationSet(times=[0.0, 0.5], values=[1.0, 1.2])
    td = GbmDensity(P_GBM)
    with pytest.raises((InvalidStartError, ValueError)):
        mle_fit(td, obs, [0.1, -0.5])  # negative sigma start


def test_ou_density_fit_smoke():
    p = OuParams(gamma=1.0, beta_bar=0.4, sigma=0.5, b0=0.0)
    times = 0.2 * np.arange(301)
    obs = ObservationSet(times=times, values=simulate_states_at(p, times, stream(5, 5))[:, 0])
    fit = mle_fit(OuDensity(p), obs, [1.3, 0.2, 0.4], compute_stderr=False,
                  opts=SimplexOptions(max_iter=4000))
    assert fit.converged
    assert fit.theta_hat[0] == pytest.approx(1.0, abs=0.5)
    assert fit.theta_hat[2] == pytest.approx(0.5, abs=0.1)


def test_mle_asymptotically_centered():
    # bias of beta_hat over 200 datasets of N = 1000 stays below 2 standard
    # errors of the replication mean
    times = 0.1 * np.arange(1001)
    td = GbmDensity(P_GBM, free=("beta",))
    estimates = []
    for rep in range(200):
        obs = _gbm_obs(P_GBM, times, (88, rep))
        fit = mle_fit(td, obs, [0.1], compute_stderr=False)
        estimates.append(fit.theta_hat[0])
    estimates = np.array(estimates)
    se = estimates.std(ddof=1) / np.sqrt(len(estimates))
    assert abs(estimates.mean() - 0.1) < 2 * se


def test_fit_result_json_schema():
    times = 0.1 * np.arange(101)
    obs = _gbm_obs(P_GBM, times, (89, 0))
    fit = mle_fit(GbmDensity(P_GBM), obs, [0.1, 0.2], seed=5)
    d = fit.to_json_dict()
    assert set(d) == {"theta_hat", "objective", "converged", "iterations",
                      "seed", "stderr", "diagnostics"}
    assert d["seed"] == 5
    from driftlab.results import FitResult
    back = FitResult.from_json(fit.to_json())
    assert np.array_equal(back.theta_hat, fit.theta_hat)
    assert back.converged == fit.converged


def test_fokker_planck_density_close_to_closed_form_loglik():
    times = 0.5 * np.arange(6)
    obs = _gbm_obs(P_GBM, times, (80, 0))
    exact = discrete_loglikelihood(GbmDensity(P_GBM), obs)
    fp = FokkerPlanckDensity(gbm_spec(P_GBM), y_min=0.05, y_max=4.0,
                             n_cells=400, n_time_steps=100)
    approx = discrete_loglikelihood(fp, obs)
    assert approx == pytest.approx(exact, abs=0.05)
