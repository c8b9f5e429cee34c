import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from driftlab.errors import InsufficientDataError
from driftlab.models import DiffusionSpec
from driftlab.paths import Path, TimeGrid, quadratic_variation, read_path_csv, write_path_csv
from driftlab.simulate import simulate_euler


def test_grid_times():
    g = TimeGrid(0.0, 1.0, 4)
    assert np.allclose(g.times(), [0, 0.25, 0.5, 0.75, 1.0])
    assert g.dt == 0.25


def test_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid(1.0, 1.0, 10)
    with pytest.raises(ValueError):
        TimeGrid(0.0, 1.0, 0)


def test_path_requires_increasing_times():
    with pytest.raises(ValueError):
        Path(times=[0.0, 0.0, 1.0], values=[1.0, 2.0, 3.0])


def test_path_requires_finite_values():
    with pytest.raises(ValueError):
        Path(times=[0.0, 1.0], values=[1.0, np.inf])


def test_quadratic_variation_constant_path():
    p = Path(times=[0, 1, 2], values=[3.0, 3.0, 3.0])
    assert quadratic_variation(p) == 0.0


def test_quadratic_variation_direct_sum():
    p = Path(times=[0, 1, 2], values=[0.0, 1.0, 0.0])
    assert quadratic_variation(p) == 2.0


def test_quadratic_variation_needs_two_points():
    with pytest.raises(InsufficientDataError):
        quadratic_variation(Path(times=[0.0], values=[1.0]))


def test_quadratic_variation_brownian_motion():
    # QV of standard BM over [0,1] is 1; realized QV at dt=1e-4 within 5%
    bm = DiffusionSpec(drift=lambda x, th: 0.0 * x,
                       diffusion=lambda x, th: np.ones_like(x),
                       theta=[0.0], x0=[0.0])
    path = simulate_euler(bm, TimeGrid(0.0, 1.0, 10_000), 123)
    assert abs(quadratic_variation(path) - 1.0) < 0.05


def test_quadratic_variation_sums_coordinates():
    p = Path(times=[0, 1], values=np.array([[0.0, 0.0], [1.0, 2.0]]))
    assert quadratic_variation(p) == 5.0


@given(st.lists(st.floats(min_value=-1e12, max_value=1e12,
                          allow_nan=False, allow_infinity=False),
                min_size=2, max_size=30))
def test_csv_round_trip_is_lossless(values):
    times = np.arange(len(values), dtype=float)
    path = Path(times=times, values=np.asarray(values))
    buf = io.StringIO()
    write_path_csv(path, buf)
    buf.seek(0)
    back = read_path_csv(buf)
    assert np.array_equal(back.times, path.times)
    assert np.array_equal(back.values, path.values)


def test_csv_header_names_columns():
    path = Path(times=[0.0, 1.0], values=np.array([[1.0, 2.0], [3.0, 4.0]]))
    buf = io.StringIO()
    write_path_csv(path, buf)
    assert buf.getvalue().splitlines()[0] == "t,x1,x2"
