#!/usr/bin/env python3
"""Search the full parameter space for certificate-feasible configurations.

Random log-uniform exploration over platform constants, gains, and
domain bounds (gamma = 0 unless --gamma is given), followed by a
coordinate-descent polish of the most promising points.  Reports the
best worst-margin found; positive means a feasible configuration.
"""

import argparse
import math

import numpy as np

from coupled_hover.certificate import (
    DomainBounds, GainSet, certify, default_c1, feasible_c2_interval, f_lower,
)
from coupled_hover.platform import Platform


def make_platform(m, g, lam, gamma):
    B = np.zeros((3, 3))
    if gamma > 0:
        B[0, 2] = gamma  # sigma_max(B)/sigma_min(C) = gamma with C = I
    return Platform(
        mass=m, gravity=g, inertia=lam * np.eye(3),
        force_alloc=np.array([[0.0], [0.0], [1.0]]),
        spurious_alloc=B, moment_alloc=np.eye(3),
    )


def worst_margin(platform, domain, kp, kv, kR, kO, c2_frac=None):
    """Most-violated normalized condition margin at auto-chosen c1/c2."""
    base = GainSet(k_p=kp, k_v=kv, k_R=kR, k_Omega=kO)
    if f_lower(platform, base, domain) <= 0:
        return -math.inf, None
    c1 = default_c1(platform, base, domain)
    interval = feasible_c2_interval(platform, base, domain)
    if interval:
        t = 0.5 if c2_frac is None else c2_frac
        c2 = interval[0] + t * (interval[1] - interval[0])
    else:
        c2 = 0.5 * math.sqrt(platform.inertia_eigs()[0] * kR)
    gains = base.replace(c1=c1, c2=c2)
    rep = certify(platform, gains, domain)
    margins = []
    for c in rep.conditions:
        if c.bound is None:
            margins.append(-1e6)
        else:
            scale = max(abs(c.value), abs(c.bound), 1e-30)
            margins.append(c.margin / scale)
    return min(margins), (gains, rep)


def sample(rng, gamma):
    m = 10 ** rng.uniform(-1.5, 3.0)
    g = 9.81
    lam = 10 ** rng.uniform(-4, 8)
    kp = 10 ** rng.uniform(-3, 4)
    kv = 10 ** rng.uniform(-3, 4)
    kR = 10 ** rng.uniform(-3, 8)
    kO = 10 ** rng.uniform(-3, 8)
    psi = 10 ** rng.uniform(-6, -0.5)
    delta = 10 ** rng.uniform(-4, -0.3)
    mg = m * g
    e_p_max = 10 ** rng.uniform(-6, 0) * mg / max(kp, 1e-12)
    v_max = 10 ** rng.uniform(-6, 0) * mg / max(kv, 1e-12)
    Om = 10 ** rng.uniform(-8, 0)
    return dict(m=m, g=g, lam=lam, kp=kp, kv=kv, kR=kR, kO=kO,
                psi=psi, delta=delta, e_p_max=e_p_max, v_max=v_max, Om=Om)


def evaluate(params, gamma, c2_frac=None):
    try:
        platform = make_platform(params["m"], params["g"], params["lam"], gamma)
        domain = DomainBounds(psi=params["psi"], delta=params["delta"],
                              e_p_max=params["e_p_max"], v_max=params["v_max"],
                              Omega_max=params["Om"])
        return worst_margin(platform, domain, params["kp"], params["kv"],
                            params["kR"], params["kO"], c2_frac)
    except Exception:
        return -math.inf, None


def polish(params, gamma, rng, iters=4000):
    best = dict(params)
    best_score, best_detail = evaluate(best, gamma)
    keys = ["m", "lam", "kp", "kv", "kR", "kO", "psi", "delta", "e_p_max", "v_max", "Om"]
    scale = 0.5
    stall = 0
    for i in range(iters):
        cand = dict(best)
        for k in rng.choice(keys, size=rng.integers(1, 4), replace=False):
            cand[k] = best[k] * 10 ** rng.normal(0, scale)
        cand["psi"] = min(cand["psi"], 0.999)
        cand["delta"] = min(cand["delta"], 0.999)
        score, detail = evaluate(cand, gamma, c2_frac=rng.uniform(0.05, 0.95))
        if score > best_score:
            best, best_score, best_detail = cand, score, detail
            stall = 0
        else:
            stall += 1
            if stall > 400:
                scale *= 0.7
                stall = 0
    return best, best_score, best_detail


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=200000)
    ap.add_argument("--gamma", type=float, default=0.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--polish-top", type=int, default=6)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    pool = []
    for i in range(args.samples):
        p = sample(rng, args.gamma)
        score, _ = evaluate(p, args.gamma)
        if np.isfinite(score):
            pool.append((score, p))
    pool.sort(key=lambda t: -t[0])
    print(f"random phase: best worst-margins: {[f'{s:.4g}' for s, _ in pool[:8]]}")

    overall_best = (-math.inf, None, None)
    for rank, (score, p) in enumerate(pool[: args.polish_top]):
        bp, bs, bd = polish(p, args.gamma, np.random.default_rng(args.seed + 1000 + rank))
        print(f"polished seed {rank}: {score:.4g} -> {bs:.4g}")
        if bs > overall_best[0]:
            overall_best = (bs, bp, bd)

    score, params, detail = overall_best
    print("\n=== best configuration found ===")
    print(f"worst normalized margin: {score:.6g}  (positive = FEASIBLE)")
    print(params)
    if detail:
        gains, rep = detail
        print(gains)
        print(rep.condition_table())


if __name__ == "__main__":
    main()
