"""Command-line driver.

Subcommands: simulate, certify, search-gains, audit, roa.  Exit codes:
0 = success / feasible / all checks passed, 2 = infeasible or a failed
check, 1 = error (bad config, numerical failure).  COUPLED_HOVER_THREADS
caps worker pools inside the search.

Trajectory CSV column order (versioned, fixed):
  t, p_x, p_y, p_z, v_x, v_y, v_z,
  R_00, R_01, R_02, R_10, R_11, R_12, R_20, R_21, R_22  (row-major),
  Omega_x, Omega_y, Omega_z, u_f, u_tau_x, u_tau_y, u_tau_z,
  V, V1, V2, norm_e_p, norm_v, norm_e_R, norm_Omega, norm_Omega_d
The JSON format carries the same columns under "columns"/"rows".
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .certificate import certify, estimate_roa_level, gain_search
from .config import RunConfig, load_config
from .controller import HoverController, equilibrium_state
from .dynamics import BodyState, Trajectory, rollout
from .errors import CoupledHoverError, NotCertified
from .platform import classify
from .verification import audit_lemma_bounds, equilibrium_residual, monte_carlo_roa

TRAJECTORY_COLUMNS = (
    ["t"]
    + [f"p_{a}" for a in "xyz"]
    + [f"v_{a}" for a in "xyz"]
    + [f"R_{i}{j}" for i in range(3) for j in range(3)]
    + [f"Omega_{a}" for a in "xyz"]
    + ["u_f"]
    + [f"u_tau_{a}" for a in "xyz"]
    + ["V", "V1", "V2", "norm_e_p", "norm_v", "norm_e_R", "norm_Omega", "norm_Omega_d"]
)

DIAG_COLUMNS = ["V", "V1", "V2", "norm_e_p", "norm_v", "norm_e_R", "norm_Omega", "norm_Omega_d"]


def trajectory_rows(traj: Trajectory) -> list:
    rows = []
    for k in range(len(traj)):
        row = [float(traj.t[k])]
        row += traj.p[k].reshape(-1).tolist()
        row += traj.v[k].reshape(-1).tolist()
        row += traj.R[k].reshape(-1).tolist()
        row += traj.Omega[k].reshape(-1).tolist()
        row.append(float(traj.u_f[k]))
        row += traj.u_tau[k].reshape(-1).tolist()
        for name in DIAG_COLUMNS:
            row.append(float(traj.diagnostics[name][k]))
        rows.append(row)
    return rows


def write_trajectory(traj: Trajectory, path: Path, fmt: str) -> None:
    rows = trajectory_rows(traj)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRAJECTORY_COLUMNS)
            writer.writerows(rows)
    else:
        path.write_text(json.dumps({"columns": TRAJECTORY_COLUMNS, "rows": rows}))


def _write_json(data: dict, path: Path) -> None:
    path.write_text(json.dumps(data, indent=2, default=_json_default))


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def _initial_state(cfg: RunConfig, controller: HoverController) -> BodyState:
    eq = equilibrium_state(controller)
    init = cfg.initial
    return BodyState(
        p=eq.p if init.position is None else init.position,
        v=eq.v if init.velocity is None else init.velocity,
        R=eq.R if init.attitude is None else init.attitude,
        Omega=eq.Omega if init.body_rate is None else init.body_rate,
    )


def cmd_simulate(cfg: RunConfig, out_dir: Path, fmt: str) -> int:
    controller = HoverController(cfg.gains, cfg.platform, cfg.reference, cfg.domain)
    x0 = _initial_state(cfg, controller)
    traj = rollout(cfg.platform, x0, controller, cfg.h, cfg.T)
    path = out_dir / ("trajectory.csv" if fmt == "csv" else "trajectory.json")
    write_trajectory(traj, path, fmt)
    print(f"simulated {cfg.T} s at h={cfg.h} s: {len(traj)} samples -> {path}")
    return 0


def cmd_certify(cfg: RunConfig, out_dir: Path, fmt: str) -> int:
    report = certify(cfg.platform, cfg.gains, cfg.domain)
    print(report.condition_table())
    cls = classify(cfg.platform)
    print(f"platform class: {cls.coupling.value}, force rank {cls.force_rank}, tags {sorted(cls.tags)}")
    if report.feasible:
        print(f"region-of-attraction level c = {report.roa_level:.6g}")
    _write_json(report.to_dict(), out_dir / "certificate.json")
    return 0 if report.feasible else 2


def cmd_search(cfg: RunConfig, out_dir: Path, fmt: str) -> int:
    result = gain_search(cfg.platform, cfg.domain, ranges=cfg.search_ranges)
    payload = {
        "feasible": result.feasible,
        "evaluated": result.evaluated,
        "objective": result.objective if result.feasible else None,
        "worst_condition": result.worst_condition,
    }
    if result.feasible:
        g = result.gains
        payload["gains"] = {"k_p": g.k_p, "k_v": g.k_v, "k_R": g.k_R,
                            "k_Omega": g.k_Omega, "c1": g.c1, "c2": g.c2}
        payload["report"] = result.report.to_dict()
        print(f"feasible gains found (decay proxy {result.objective:.4g}): {payload['gains']}")
    else:
        if result.nearest_miss is not None:
            g = result.nearest_miss
            payload["nearest_miss"] = {"k_p": g.k_p, "k_v": g.k_v, "k_R": g.k_R,
                                       "k_Omega": g.k_Omega, "c1": g.c1, "c2": g.c2}
            payload["nearest_miss_report"] = result.nearest_miss_report.to_dict()
        print(f"no feasible point among {result.evaluated} grid evaluations; "
              f"closest violated condition: {result.worst_condition}")
    _write_json(payload, out_dir / "search.json")
    return 0 if result.feasible else 2


def cmd_audit(cfg: RunConfig, out_dir: Path, fmt: str) -> int:
    residual = equilibrium_residual(cfg.platform, cfg.gains, cfg.reference, cfg.domain)
    report = audit_lemma_bounds(
        cfg.platform, cfg.gains, cfg.domain, cfg.reference,
        n_samples=cfg.audit_samples, seed=cfg.seed,
    )
    print(f"equilibrium residual: {residual:.3e}")
    print(report.summary())
    payload = report.to_dict()
    payload["equilibrium_residual"] = residual
    _write_json(payload, out_dir / "audit.json")
    ok = report.passed and residual <= 1e-10
    return 0 if ok else 2


def cmd_roa(cfg: RunConfig, out_dir: Path, fmt: str, uncertified_level: float | None,
            dump_trials: int = 0) -> int:
    report = monte_carlo_roa(
        cfg.platform, cfg.gains, cfg.domain, cfg.reference,
        n_trials=cfg.roa_trials, T=cfg.roa_T, seed=cfg.seed, h=cfg.h,
        level=uncertified_level,
    )
    _write_json(report.to_dict(), out_dir / "roa.json")
    if dump_trials > 0 and report.trials:
        _dump_trial_trajectories(cfg, report, out_dir, fmt, dump_trials)
    if report.fraction is None:
        print("no trials requested; nothing to report")
        return 0
    print(f"converged {int(report.fraction * len(report.trials))}/{len(report.trials)} "
          f"trials within T={report.T} s (level c={report.level:.4g})")
    return 0 if report.fraction == 1.0 else 2


def _dump_trial_trajectories(cfg: RunConfig, report, out_dir: Path, fmt: str, count: int) -> None:
    """Re-simulate the first trials with full recording and write each one."""
    from .verification import sample_sublevel_states

    controller = HoverController(cfg.gains, cfg.platform, cfg.reference, cfg.domain)
    root = np.random.SeedSequence(report.seed)
    streams = root.spawn(len(report.trials))
    for i in range(min(count, len(report.trials))):
        x0 = sample_sublevel_states(controller, cfg.domain, report.level, 1,
                                    np.random.default_rng(streams[i]))
        x0 = x0.select(0)
        traj = rollout(cfg.platform, x0, controller, cfg.h, report.T)
        suffix = "csv" if fmt == "csv" else "json"
        write_trajectory(traj, out_dir / f"trial_{i:03d}.{suffix}", fmt)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coupled-hover",
        description="Simulator and gain-certificate toolkit for hovering "
                    "rigid bodies with moment-induced spurious forces.",
    )
    parser.add_argument("--config", required=True, help="path to the run configuration (YAML or JSON)")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, default=None, help="seed override")
    parser.add_argument("--format", choices=["csv", "json"], default=None, help="trajectory format override")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", help="roll out the closed loop from the configured initial state")
    sub.add_parser("certify", help="evaluate every gain condition and print the table")
    sub.add_parser("search-gains", help="grid-search gains for a feasible certificate")
    sub.add_parser("audit", help="equilibrium residual plus the sampled bound audit")
    roa = sub.add_parser("roa", help="Monte-Carlo convergence campaign over the sublevel set")
    roa.add_argument("--uncertified-level", type=float, default=None,
                     help="run the campaign at this sublevel value without a feasibility "
                          "certificate (empirical study only)")
    roa.add_argument("--dump-trials", type=int, default=0, metavar="N",
                     help="re-simulate and write the first N trial trajectories")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.format is not None:
            cfg.out_format = args.format
        out_dir = Path(args.out if args.out is not None else cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "simulate":
            return cmd_simulate(cfg, out_dir, cfg.out_format)
        if args.command == "certify":
            return cmd_certify(cfg, out_dir, cfg.out_format)
        if args.command == "search-gains":
            return cmd_search(cfg, out_dir, cfg.out_format)
        if args.command == "audit":
            return cmd_audit(cfg, out_dir, cfg.out_format)
        if args.command == "roa":
            return cmd_roa(cfg, out_dir, cfg.out_format, args.uncertified_level,
                           dump_trials=args.dump_trials)
        raise AssertionError(f"unhandled command {args.command}")
    except NotCertified as exc:
        print(f"not certified: {exc}", file=sys.stderr)
        return 2
    except CoupledHoverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
