"""Time grids, simulated paths, and path CSV serialization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    n_steps: int

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        if self.n_steps < 1:
            raise ValueError("n_steps must be a positive integer")

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.n_steps

    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_steps + 1)


@dataclass(frozen=True)
class Path:
    """A trajectory on a strictly increasing time grid.

    ``values`` has shape (n_times, state_dim); scalar input is reshaped.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1 or len(times) != len(values):
            raise ValueError("times and values must have matching leading length")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("path values must be finite")

    @property
    def state_dim(self) -> int:
        return self.values.shape[1]

    def scalar_values(self) -> np.ndarray:
        if self.state_dim != 1:
            raise ValueError("path is not scalar")
        return self.values[:, 0]


def quadratic_variation(path: Path) -> float:
    """Sum of squared increments, summed over coordinates."""
    if len(path.times) < 2:
        raise InsufficientDataError("quadratic variation needs at least 2 points")
    return float(np.sum(np.diff(path.values, axis=0) ** 2))


def format_float(v: float) -> str:
    # 17 significant digits: lossless float64 round trip
    return f"{v:.17g}"


def write_path_csv(path: Path, file) -> None:
    """Write ``t,x1[,x2,...]`` rows at full double precision."""
    cols = ["t"] + [f"x{i + 1}" for i in range(path.state_dim)]
    file.write(",".join(cols) + "\n")
    for t, row in zip(path.times, path.values):
        file.write(",".join(format_float(v) for v in (t, *row)) + "\n")


def read_path_csv(file) -> Path:
    header = file.readline().strip()
    if not header.startswith("t,"):
        raise ValueError(f"expected a 't,...' header, got {header!r}")
    rows = [line.strip().split(",") for line in file if line.strip()]
    data = np.array([[float(v) for v in row] for row in rows])
    return Path(times=data[:, 0], values=data[:, 1:])
