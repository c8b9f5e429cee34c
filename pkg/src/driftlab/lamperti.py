"""Variance-stabilizing state transform for scalar diffusions.

Maps a model with state-dependent diffusion sigma(x) to one with unit
diffusion via eta(x) = integral of 1/sigma(u) du from a reference point.
Separating the diffusion scale from the path this way is the standard
pre-processing step before latent-path imputation, because paths carry
unbounded information about sigma as they are refined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import TransformUndefinedError, UnsupportedDimensionError
from .models import DiffusionSpec

SIMPSON_TOL = 1e-10
_FD_REL = 1e-6


def _adaptive_simpson(f: Callable, a: float, b: float, tol: float = SIMPSON_TOL,
                      max_depth: int = 48) -> float:
    """Recursive adaptive Simpson quadrature with absolute tolerance."""

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        if depth >= max_depth or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
                + recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))

    if a == b:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 0)


@dataclass(frozen=True)
class TransformedDiffusion(DiffusionSpec):
    """A DiffusionSpec with unit diffusion plus the forward/inverse state maps."""

    forward: Callable = None
    inverse: Callable = None


def lamperti_transform(spec: DiffusionSpec) -> TransformedDiffusion:
    """Transform a scalar model to unit diffusion.

    The new state is eta(x) = int_{x0}^{x} du / sigma(u, theta) (adaptive
    Simpson, abs tol 1e-10) and the new drift is
    mu(x)/sigma(x) - sigma'(x)/2 with sigma' by central finite difference.
    The forward map accepts scalars or arrays; the inverse solves
    eta(z) = v by damped Newton (d eta/dx = 1/sigma > 0).
    """
    if spec.state_dim != 1:
        raise UnsupportedDimensionError("lamperti_transform handles scalar models only")

    theta0 = spec.theta
    x_ref = float(spec.x0[0])

    def inv_sigma(u: float) -> float:
        s = float(np.asarray(spec.diffusion(np.array([u]), theta0)).reshape(-1)[0])
        if not np.isfinite(s) or s <= 0.0:
            raise TransformUndefinedError(f"diffusion is {s} at x={u}; must be positive")
        return 1.0 / s

    def forward(x):
        """eta evaluated at a scalar or array of states."""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        pts = np.unique(np.concatenate([xs, [x_ref]]))
        # cumulative integral along the sorted points, anchored at x_ref
        segs = np.empty(len(pts))
        segs[0] = 0.0
        for i in range(1, len(pts)):
            segs[i] = _adaptive_simpson(inv_sigma, pts[i - 1], pts[i])
        cum = np.cumsum(segs)
        cum -= cum[np.searchsorted(pts, x_ref)]
        out = cum[np.searchsorted(pts, xs)]
        return float(out[0]) if np.isscalar(x) or np.ndim(x) == 0 else out

    def inverse(v):
        vs = np.atleast_1d(np.asarray(v, dtype=float))
        out = np.empty_like(vs)
        for i, target in enumerate(vs):
            z = x_ref
            fz = 0.0
            for _ in range(200):
                resid = target - fz
                if abs(resid) <= 1e-13 * max(1.0, abs(target)):
                    break
                step = resid / inv_sigma(z)  # Newton: eta'(z) = 1/sigma(z)
                for _ in range(60):
                    try:
                        z_new = z + step
                        f_new = forward(z_new)
                        break
                    except TransformUndefinedError:
                        step *= 0.5
                else:
                    raise TransformUndefinedError("inverse map left the valid domain")
                z, fz = z_new, f_new
            out[i] = z
        return float(out[0]) if np.isscalar(v) or np.ndim(v) == 0 else out

    def sigma_scalar(x: float, th) -> float:
        return float(np.asarray(spec.diffusion(np.array([x]), th)).reshape(-1)[0])

    def new_drift(z, th):
        zs = np.asarray(z, dtype=float)
        x = np.asarray(inverse(zs.reshape(-1)), dtype=float).reshape(-1)
        out = np.empty_like(x)
        for i, xi in enumerate(x):
            h = max(_FD_REL, _FD_REL * abs(xi))
            dsig = (sigma_scalar(xi + h, th) - sigma_scalar(xi - h, th)) / (2.0 * h)
            mu = float(np.asarray(spec.drift(np.array([xi]), th)).reshape(-1)[0])
            out[i] = mu / sigma_scalar(xi, th) - 0.5 * dsig
        return out.reshape(zs.shape)

    return TransformedDiffusion(
        drift=new_drift,
        diffusion=lambda z, th: np.ones_like(np.asarray(z, dtype=float)),
        theta=theta0,
        x0=np.array([forward(x_ref)]),
        state_dim=1,
        positive=spec.positive,
        forward=forward,
        inverse=inverse,
    )
