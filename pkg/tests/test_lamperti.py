import numpy as np
import pytest
from hypothesis import given, strategies as st

from driftlab.errors import TransformUndefinedError, UnsupportedDimensionError
from driftlab.lamperti import lamperti_transform
from driftlab.models import DiffusionSpec, GbmParams, gbm_spec
from driftlab.paths import TimeGrid, quadratic_variation
from driftlab.simulate import simulate_gbm_exact

GBM = GbmParams(beta=0.1, sigma=0.3, x0=1.0)


def test_gbm_transform_is_scaled_log():
    tr = lamperti_transform(gbm_spec(GBM))
    xs = np.array([0.2, 0.7, 1.0, 1.9, 4.2])
    assert np.max(np.abs(tr.forward(xs) - np.log(xs) / 0.3)) < 1e-6


def test_gbm_transformed_drift_and_diffusion():
    tr = lamperti_transform(gbm_spec(GBM))
    z = np.array([-0.5, 0.0, 1.2])
    expected = 0.1 / 0.3 - 0.3 / 2.0
    assert np.allclose(tr.drift(z, tr.theta), expected, atol=1e-6)
    assert np.array_equal(tr.diffusion(z, tr.theta), np.ones(3))
    assert tr.x0[0] == pytest.approx(0.0, abs=1e-12)


def test_constant_sigma_transform_is_affine():
    spec = DiffusionSpec(drift=lambda x, th: th[0] - x,
                         diffusion=lambda x, th: 2.0 * np.ones_like(x),
                         theta=[0.4], x0=[1.0])
    tr = lamperti_transform(spec)
    xs = np.array([-3.0, 0.0, 2.5])
    assert np.allclose(tr.forward(xs), (xs - 1.0) / 2.0, atol=1e-9)
    # drift becomes mu/sigma since d(sigma)/dx = 0
    assert np.allclose(tr.drift(tr.forward(xs), tr.theta), (0.4 - xs) / 2.0, atol=1e-6)


def test_transformed_path_has_unit_quadratic_variation():
    tr = lamperti_transform(gbm_spec(GBM))
    fine = simulate_gbm_exact(GBM, TimeGrid(0.0, 1.0, 10_000), 2024)
    z = tr.forward(fine.values[:, 0])
    qv = quadratic_variation(type(fine)(times=fine.times, values=z))
    assert abs(qv - 1.0) < 0.05


@given(st.floats(min_value=-2.0, max_value=2.0))
def test_forward_inverse_identity(z):
    tr = lamperti_transform(gbm_spec(GBM))
    assert tr.forward(tr.inverse(z)) == pytest.approx(z, abs=1e-8)


def test_inverse_of_forward_on_states():
    tr = lamperti_transform(gbm_spec(GBM))
    xs = np.array([0.05, 0.3, 1.0, 2.0, 9.0])
    assert np.max(np.abs(tr.inverse(tr.forward(xs)) - xs)) < 1e-8


def test_nonpositive_sigma_rejected():
    spec = DiffusionSpec(drift=lambda x, th: 0.0 * x,
                         diffusion=lambda x, th: x,  # vanishes at 0, negative below
                         theta=[0.0], x0=[1.0])
    tr = lamperti_transform(spec)
    with pytest.raises(TransformUndefinedError):
        tr.forward(-1.0)


def test_multidimensional_rejected():
    spec = DiffusionSpec(drift=lambda x, th: 0.0 * x,
                         diffusion=lambda x, th: np.ones_like(x),
                         theta=[0.0], x0=[0.0, 0.0], state_dim=2)
    with pytest.raises(UnsupportedDimensionError):
        lamperti_transform(spec)
