import numpy as np
import pytest
from scipy import stats

from driftlab.adequacy import simulate_states_at
from driftlab.bridge import bridge_loglikelihood, bridge_pair_logdensity
from driftlab.densities import gbm_transition_logdensity
from driftlab.errors import DegenerateImportanceError, UnsupportedDimensionError
from driftlab.models import DiffusionSpec, GbmParams, gbm_spec
from driftlab.observe import ObservationSet
from driftlab.rng import stream

P = GbmParams(beta=0.1, sigma=0.2, x0=1.0)


def test_bm_one_interior_point_is_exact():
    # mu = 0, constant sigma: the bridge proposal is the true conditional law,
    # so every importance weight equals the exact transition density
    bm = DiffusionSpec(drift=lambda x, th: 0.0 * x,
                       diffusion=lambda x, th: 0.7 * np.ones_like(x),
                       theta=[0.0], x0=[0.0])
    est = bridge_pair_logdensity(bm, 0.5, 0.1, 0.4, m_sub=2, j_samples=10_000, seed=5)
    exact = stats.norm.logpdf(0.4, 0.1, 0.7 * np.sqrt(0.5))
    assert est == pytest.approx(exact, abs=1e-2 * abs(exact))


def test_gbm_pairs_within_five_percent():
    times = 0.5 * np.arange(51)
    vals = simulate_states_at(P, times, stream(6, "path"))[:, 0]
    spec = gbm_spec(P)
    rel = []
    for i in range(50):
        est = np.exp(bridge_pair_logdensity(spec, 0.5, vals[i], vals[i + 1],
                                            m_sub=8, j_samples=200, seed=6, pair=i))
        exact = np.exp(gbm_transition_logdensity(P, 0.5, vals[i], vals[i + 1]))
        rel.append(abs(est - exact) / exact)
    assert np.mean(rel) <= 0.05


def test_m_sub_refinement_moves_toward_exact():
    spec = gbm_spec(P)
    exact = np.exp(gbm_transition_logdensity(P, 1.0, 1.0, 1.1))
    gaps = []
    for m in (2, 4, 8, 16):
        est = np.exp(bridge_pair_logdensity(spec, 1.0, 1.0, 1.1,
                                            m_sub=m, j_samples=20_000, seed=8))
        gaps.append(abs(est - exact))
    assert gaps[0] > gaps[1] > gaps[2] > gaps[3]


def test_loglikelihood_sums_pairs_deterministically():
    times = 0.5 * np.arange(6)
    obs = ObservationSet(times=times,
                         values=simulate_states_at(P, times, stream(9, "p"))[:, 0])
    spec = gbm_spec(P)
    a = bridge_loglikelihood(spec, obs, m_sub=4, j_samples=50, seed=3)
    b = bridge_loglikelihood(spec, obs, m_sub=4, j_samples=50, seed=3)
    assert a == b
    total = sum(
        bridge_pair_logdensity(spec, 0.5, obs.values[i], obs.values[i + 1],
                               m_sub=4, j_samples=50, seed=3, pair=i)
        for i in range(5)
    )
    assert a == pytest.approx(total, rel=1e-14)


def test_bridge_density_normalizes_over_terminal_state():
    # trapezoid mass of the estimated density within 5% at j_samples = 1e4
    spec = gbm_spec(P)
    y = np.linspace(0.4, 2.6, 56)
    dens = np.array([
        np.exp(bridge_pair_logdensity(spec, 0.5, 1.0, float(v),
                                      m_sub=8, j_samples=10_000, seed=(12, i)))
        for i, v in enumerate(y)
    ])
    mass = np.trapezoid(dens, y)
    assert abs(mass - 1.0) <= 0.05


def test_degenerate_weights_raise():
    frozen = DiffusionSpec(drift=lambda x, th: 0.0 * x,
                           diffusion=lambda x, th: np.zeros_like(x),
                           theta=[0.0], x0=[0.0])
    with pytest.raises(DegenerateImportanceError) as err:
        bridge_pair_logdensity(frozen, 0.5, 0.0, 1.0, m_sub=4, j_samples=10, seed=0, pair=3)
    assert err.value.pair == 3


def test_multidimensional_rejected():
    spec = DiffusionSpec(drift=lambda x, th: 0.0 * x,
                         diffusion=lambda x, th: np.ones_like(x),
                         theta=[0.0], x0=[0.0, 0.0], state_dim=2)
    obs = ObservationSet(times=[0.0, 1.0], values=np.zeros((2, 2)))
    with pytest.raises(UnsupportedDimensionError):
        bridge_loglikelihood(spec, obs, m_sub=2, j_samples=10, seed=0)


def test_validation():
    spec = gbm_spec(P)
    with pytest.raises(ValueError):
        bridge_pair_logdensity(spec, 0.5, 1.0, 1.1, m_sub=1, j_samples=10, seed=0)
    with pytest.raises(ValueError):
        bridge_pair_logdensity(spec, 0.5, 1.0, 1.1, m_sub=4, j_samples=0, seed=0)
