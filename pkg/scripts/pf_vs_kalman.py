#!/usr/bin/env python3
"""Particle-filter likelihood error against the exact Kalman value, as the
particle count grows (OU state, Gaussian observation noise)."""

import argparse

import numpy as np

from driftlab import (
    NoisyObservationSet,
    ObservationModel,
    OuParams,
    TimeGrid,
    kalman_loglik,
    ou_to_ssm,
    particle_filter,
    simulate_ou,
)
from driftlab.models import ou_spec
from driftlab.rng import stream


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--sigma", type=float, default=0.5)
    ap.add_argument("--obs-scale", type=float, default=0.3)
    ap.add_argument("--n-obs", type=int, default=100)
    ap.add_argument("--dt", type=float, default=0.1)
    ap.add_argument("--particles", type=str, default="250,500,1000,2000,4000")
    ap.add_argument("--pf-seeds", type=int, default=20)
    ap.add_argument("--substeps", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    p = OuParams(gamma=args.gamma, beta_bar=0.0, sigma=args.sigma, b0=0.0)
    grid = TimeGrid(0.0, args.dt * (args.n_obs - 1), args.n_obs - 1)
    latent = simulate_ou(p, grid, (args.seed, "path")).scalar_values()
    noise = stream(args.seed, "noise").standard_normal(args.n_obs)
    obs = NoisyObservationSet(times=grid.times(), y_values=latent + args.obs_scale * noise)
    om = ObservationModel(kind="gaussian", scale=args.obs_scale)

    exact = kalman_loglik(ou_to_ssm(p, om, obs.times), obs)
    print(f"Kalman log-likelihood: {exact:.4f}")
    print(f"{'N':>6}  {'mean PF loglik':>15}  {'bias':>8}  {'sd over seeds':>13}")
    for n in (int(v) for v in args.particles.split(",")):
        lls = [particle_filter(ou_spec(p), om, obs, n, substeps=args.substeps,
                               seed=(args.seed, "pf", n, k)).loglik
               for k in range(args.pf_seeds)]
        print(f"{n:>6}  {np.mean(lls):>15.4f}  {np.mean(lls) - exact:>8.4f}  "
              f"{np.std(lls, ddof=1):>13.4f}")


if __name__ == "__main__":
    main()
