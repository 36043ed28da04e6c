#!/usr/bin/env python3
"""Monte-Carlo convergence campaign from the Lyapunov sublevel set.

The faithful certified path is attempted first; since no configuration
satisfies the printed gain conditions, the campaign falls back to the
uncertified sublevel value derived from the lower sandwich matrices and
reports the empirical convergence fraction.

Usage: python scripts/run_roa_campaign.py [--config PATH] [--trials N] [--T SECONDS]
"""

import argparse
from pathlib import Path

from coupled_hover.certificate import build_V_bound_matrices, certify, roa_level_from_matrices
from coupled_hover.config import load_config
from coupled_hover.errors import NotCertified
from coupled_hover.verification import monte_carlo_roa

DEFAULT_CONFIG = Path(__file__).resolve().parents[1] / "configs" / "reference_platform.cfg"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=DEFAULT_CONFIG)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--T", type=float, default=20.0)
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()

    cfg = load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed

    try:
        report = monte_carlo_roa(cfg.platform, cfg.gains, cfg.domain, cfg.reference,
                                 n_trials=args.trials, T=args.T, seed=seed, h=cfg.h)
        print("running under a feasible certificate")
    except NotCertified:
        cert = certify(cfg.platform, cfg.gains, cfg.domain)
        worst = min(cert.conditions, key=lambda c: c.margin)
        print(f"configuration does not certify (binding condition: {worst.name}); "
              "falling back to the uncertified sublevel value")
        M11, _, M21, _ = build_V_bound_matrices(cfg.platform, cfg.gains, cfg.domain)
        level = roa_level_from_matrices(M11, M21, cfg.domain)
        report = monte_carlo_roa(cfg.platform, cfg.gains, cfg.domain, cfg.reference,
                                 n_trials=args.trials, T=args.T, seed=seed, h=cfg.h,
                                 level=level)

    n = len(report.trials)
    converged = sum(t.converged for t in report.trials)
    print(f"level c = {report.level:.4g}, trials = {n}, "
          f"converged = {converged}/{n} (|z(T)| < {report.ratio:g} |z(0)|)")
    times = [t.t_converged for t in report.trials if t.t_converged is not None]
    if times:
        print(f"first-crossing times: min {min(times):.2f} s, max {max(times):.2f} s")


if __name__ == "__main__":
    main()
