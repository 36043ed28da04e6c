#!/usr/bin/env python3
"""Full numerical audit of a configuration: equilibrium residual, the
sampled bound audit, the certificate condition table, and a boundary
rollout audit under the (uncertified) sublevel value.

Usage: python scripts/run_reference_audit.py [--config PATH] [--samples N]
"""

import argparse
from pathlib import Path

import numpy as np

from coupled_hover.certificate import build_V_bound_matrices, certify, roa_level_from_matrices
from coupled_hover.config import load_config
from coupled_hover.controller import HoverController
from coupled_hover.verification import (
    audit_lemma_bounds,
    audit_trajectory,
    equilibrium_residual,
    sample_sublevel_states,
)

DEFAULT_CONFIG = Path(__file__).resolve().parents[1] / "configs" / "reference_platform.cfg"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=DEFAULT_CONFIG)
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--rollouts", type=int, default=50)
    ap.add_argument("--T", type=float, default=6.0)
    args = ap.parse_args()

    cfg = load_config(args.config)
    print(f"== {args.config} ==")

    residual = equilibrium_residual(cfg.platform, cfg.gains, cfg.reference, cfg.domain)
    print(f"equilibrium residual: {residual:.3e}")

    report = audit_lemma_bounds(cfg.platform, cfg.gains, cfg.domain, cfg.reference,
                                n_samples=args.samples, seed=cfg.seed)
    print(f"\nsampled bound audit ({args.samples} states):")
    print(report.summary())

    cert = certify(cfg.platform, cfg.gains, cfg.domain)
    print("\ncertificate conditions:")
    print(cert.condition_table())
    print("compact-vs-expanded attitude decrease matrix "
          f"(max entry gap): {cert.cross_audit['max_abs_difference']:.3g}")

    M11, _, M21, _ = build_V_bound_matrices(cfg.platform, cfg.gains, cfg.domain)
    level = roa_level_from_matrices(M11, M21, cfg.domain)
    print(f"\nboundary rollout audit at uncertified level c = {level:.4g}:")
    controller = HoverController(cfg.gains, cfg.platform, cfg.reference, cfg.domain)
    boundary = sample_sublevel_states(controller, cfg.domain, level, args.rollouts,
                                      np.random.default_rng(cfg.seed), boundary=True)
    audit = audit_trajectory(cfg.platform, cfg.gains, cfg.domain, cfg.reference,
                             boundary, h=cfg.h, T=args.T, seed=cfg.seed)
    print(audit.report.summary())
    print(f"fitted exponential rate of V: {audit.fitted_rate:.3f} 1/s "
          f"(slack kappa = {audit.kappa:.3g})")


if __name__ == "__main__":
    main()
