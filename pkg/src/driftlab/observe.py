"""Observation sets and observation-noise models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln


@dataclass(frozen=True)
class ObservationSet:
    """Exactly observed states x_{t_i} at strictly increasing times."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if np.any(np.diff(times) <= 0):
            raise ValueError("observation times must be strictly increasing")
        if len(times) != len(values):
            raise ValueError("times and values must have the same length")
        if not np.all(np.isfinite(values)):
            raise ValueError("observation values must be finite")

    def __len__(self):
        return len(self.times)


@dataclass(frozen=True)
class NoisyObservationSet:
    """Noisy observations y_i of the latent state at strictly increasing times.

    ``y_values`` has shape (n,) for scalar observations or (n, p).
    """

    times: np.ndarray
    y_values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        y = np.asarray(self.y_values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "y_values", y)
        if np.any(np.diff(times) <= 0):
            raise ValueError("observation times must be strictly increasing")
        if len(times) != len(y):
            raise ValueError("times and y_values must have the same length")
        if not np.all(np.isfinite(y)):
            raise ValueError("observations must be finite")

    def __len__(self):
        return len(self.times)

    def y2d(self) -> np.ndarray:
        return self.y_values[:, None] if self.y_values.ndim == 1 else self.y_values


def projection_link(indices) -> Callable:
    """Link selecting state coordinates as the observation mean."""
    idx = np.asarray(indices, dtype=int)

    def link(states: np.ndarray) -> np.ndarray:
        return np.asarray(states)[..., idx]

    return link


@dataclass(frozen=True)
class ObservationModel:
    """Conditional density of an observation given the state, y | x ~ f(y | x).

    ``kind`` is "gaussian" or "student_t"; ``link`` maps states (n, d) to
    observation means (n, p), identity by default.  Observation coordinates
    are conditionally independent given the state.
    """

    kind: str
    scale: float
    dof: float | None = None
    link: Callable | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "student_t"):
            raise ValueError(f"unknown observation model kind {self.kind!r}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.kind == "student_t" and not (self.dof is not None and self.dof > 0):
            raise ValueError("student_t requires dof > 0")

    def mean(self, states: np.ndarray) -> np.ndarray:
        states = np.asarray(states, dtype=float)
        return states if self.link is None else np.asarray(self.link(states), dtype=float)

    def loglik(self, y, states: np.ndarray) -> np.ndarray:
        """Log f(y | x) for each state row; y is one observation.

        Far-tail evaluations may overflow to -inf, which is the correct
        degenerate-weight value for the filter.
        """
        m = np.atleast_2d(self.mean(np.atleast_2d(states)))
        u = (np.atleast_1d(np.asarray(y, dtype=float))[None, :] - m) / self.scale
        with np.errstate(over="ignore"):
            if self.kind == "gaussian":
                lp = -0.5 * u**2 - 0.5 * np.log(2.0 * np.pi) - np.log(self.scale)
            else:
                nu = self.dof
                lp = (gammaln((nu + 1.0) / 2.0) - gammaln(nu / 2.0)
                      - 0.5 * np.log(nu * np.pi) - np.log(self.scale)
                      - (nu + 1.0) / 2.0 * np.log1p(u**2 / nu))
        return lp.sum(axis=1)

    def loglik_series(self, y: np.ndarray, states: np.ndarray) -> np.ndarray:
        """Log f(y_i | x_i) for paired sequences: one observation per state row."""
        m = np.atleast_2d(self.mean(np.atleast_2d(states)))
        y = np.asarray(y, dtype=float)
        y = y[:, None] if y.ndim == 1 else y
        u = (y - m) / self.scale
        if self.kind == "gaussian":
            lp = -0.5 * u**2 - 0.5 * np.log(2.0 * np.pi) - np.log(self.scale)
        else:
            nu = self.dof
            lp = (gammaln((nu + 1.0) / 2.0) - gammaln(nu / 2.0)
                  - 0.5 * np.log(nu * np.pi) - np.log(self.scale)
                  - (nu + 1.0) / 2.0 * np.log1p(u**2 / nu))
        return lp.sum(axis=1)

    def sample(self, rng: np.random.Generator, states: np.ndarray) -> np.ndarray:
        m = self.mean(np.atleast_2d(states))
        if self.kind == "gaussian":
            noise = rng.standard_normal(m.shape)
        else:
            noise = rng.standard_t(self.dof, size=m.shape)
        return m + self.scale * noise


def write_observations_csv(obs, file) -> None:
    from .paths import format_float

    if isinstance(obs, ObservationSet):
        vals = obs.values[:, None] if obs.values.ndim == 1 else obs.values
        header = ["t"] + (["x"] if vals.shape[1] == 1 else [f"x{i+1}" for i in range(vals.shape[1])])
    else:
        vals = obs.y2d()
        header = ["t"] + [f"y{i+1}" for i in range(vals.shape[1])]
    file.write(",".join(header) + "\n")
    for t, row in zip(obs.times, vals):
        file.write(",".join(format_float(v) for v in (t, *row)) + "\n")


def _read_table(file, kind: str):
    header = file.readline().strip().split(",")
    if header[0] != "t":
        raise ValueError(f"expected first column 't', got {header[0]!r}")
    rows = [line.strip().split(",") for line in file if line.strip()]
    data = np.array([[float(v) for v in row] for row in rows])
    vals = data[:, 1] if data.shape[1] == 2 else data[:, 1:]
    return data[:, 0], vals


def read_observations_csv(file) -> ObservationSet:
    """Read exact observations; accepts `t,x` or simulator `t,x1` headers."""
    times, vals = _read_table(file, "x")
    return ObservationSet(times=times, values=vals)


def read_noisy_csv(file) -> NoisyObservationSet:
    times, vals = _read_table(file, "y")
    return NoisyObservationSet(times=times, y_values=vals)
