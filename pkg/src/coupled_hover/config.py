"""Config ingestion: one nested key-value format (YAML superset of JSON).

Every module invariant is validated at load time and reported with the
offending field path, so a bad config fails before any computation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .certificate import DomainBounds, GainSet
from .controller import Reference
from .errors import ParseError, ValidationError
from .platform import Platform, matrix_rank
from .so3 import AxisAngle, is_rotation


@dataclass
class InitialState:
    """Optional initial condition for `simulate`; None = hover equilibrium."""

    position: np.ndarray | None = None
    velocity: np.ndarray | None = None
    attitude: np.ndarray | None = None
    body_rate: np.ndarray | None = None


@dataclass
class RunConfig:
    platform: Platform
    gains: GainSet
    domain: DomainBounds
    reference: Reference
    h: float = 1e-3
    T: float = 10.0
    seed: int = 0
    out_dir: str = "out"
    out_format: str = "csv"
    audit_samples: int = 10_000
    roa_trials: int = 200
    roa_T: float = 20.0
    initial: InitialState = field(default_factory=InitialState)
    search_ranges: dict | None = None
    raw: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        p = self.platform
        return {
            "platform": {
                "mass": p.mass,
                "gravity": p.gravity,
                "inertia": p.inertia.tolist(),
                "force_alloc": p.force_alloc.tolist(),
                "spurious_alloc": p.spurious_alloc.tolist(),
                "moment_alloc": p.moment_alloc.tolist(),
            },
            "gains": {
                "k_p": self.gains.k_p, "k_v": self.gains.k_v,
                "k_R": self.gains.k_R, "k_Omega": self.gains.k_Omega,
                "c1": self.gains.c1, "c2": self.gains.c2,
            },
            "domain": {
                "psi": self.domain.psi, "delta": self.domain.delta,
                "e_p_max": self.domain.e_p_max, "v_max": self.domain.v_max,
                "Omega_max": self.domain.Omega_max,
            },
            "reference": {
                "position": self.reference.p_r.tolist(),
                "heading": {"matrix": self.reference.R_r.tolist()},
            },
            "integrator": {"h": self.h, "T": self.T},
            "seed": self.seed,
            "output": {"directory": self.out_dir, "format": self.out_format},
            "audit": {"samples": self.audit_samples},
            "roa": {"trials": self.roa_trials, "T": self.roa_T},
        }


def _require(mapping: dict, key: str, path: str):
    if key not in mapping:
        raise ValidationError(f"{path}.{key}", "missing required field")
    return mapping[key]


def _as_float(value, path: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ValidationError(path, f"expected a number, got {value!r}")


def _as_positive(value, path: str) -> float:
    x = _as_float(value, path)
    if x <= 0.0:
        raise ValidationError(path, f"must be > 0 (got {x})")
    return x


def _as_matrix(value, path: str, rows: int, cols: int | None = None) -> np.ndarray:
    try:
        M = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(path, "expected a numeric matrix")
    if M.ndim == 1 and cols == 1:
        M = M[:, None]
    if M.ndim != 2 or M.shape[0] != rows or (cols is not None and M.shape[1] != cols):
        want = f"{rows}x{cols if cols is not None else 'n'}"
        raise ValidationError(path, f"expected a {want} matrix, got shape {M.shape}")
    return M


def _as_vector(value, path: str) -> np.ndarray:
    try:
        v = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(path, "expected a numeric 3-vector")
    if v.shape != (3,):
        raise ValidationError(path, f"expected a 3-vector, got shape {v.shape}")
    return v


def parse_rotation(node, path: str) -> np.ndarray:
    """Rotation from {axis, angle_rad|angle_deg} or {matrix}; validated."""
    if not isinstance(node, dict):
        raise ValidationError(path, "expected a mapping with 'axis'/'angle' or 'matrix'")
    if "matrix" in node:
        R = _as_matrix(node["matrix"], f"{path}.matrix", 3, 3)
        if not is_rotation(R, tol=1e-9):
            raise ValidationError(f"{path}.matrix", "not orthonormal with det +1 within 1e-9")
        return R
    axis = _as_vector(_require(node, "axis", path), f"{path}.axis")
    if "angle_rad" in node:
        angle = _as_float(node["angle_rad"], f"{path}.angle_rad")
    elif "angle_deg" in node:
        angle = np.deg2rad(_as_float(node["angle_deg"], f"{path}.angle_deg"))
    else:
        raise ValidationError(path, "need angle_rad or angle_deg alongside axis")
    try:
        return AxisAngle(axis=axis, angle=angle).matrix()
    except ValueError as exc:
        raise ValidationError(f"{path}.axis", str(exc))


def _parse_inertia(node, path: str) -> np.ndarray:
    M = np.array(node, dtype=float)
    if M.ndim == 1 and M.shape == (3,):
        return np.diag(M)
    return _as_matrix(node, path, 3, 3)


def _build_platform(node: dict, path: str = "platform") -> Platform:
    mass = _as_float(_require(node, "mass", path), f"{path}.mass")
    if mass <= 0.0:
        raise ValidationError(f"{path}.mass", f"must be > 0 (got {mass})")
    gravity = _as_float(_require(node, "gravity", path), f"{path}.gravity")
    if gravity <= 0.0:
        raise ValidationError(f"{path}.gravity", f"must be > 0 (got {gravity})")
    inertia = _parse_inertia(_require(node, "inertia", path), f"{path}.inertia")
    A = _as_matrix(_require(node, "force_alloc", path), f"{path}.force_alloc", 3, None)
    B = _as_matrix(_require(node, "spurious_alloc", path), f"{path}.spurious_alloc", 3, None)
    C = _as_matrix(_require(node, "moment_alloc", path), f"{path}.moment_alloc", 3, None)
    try:
        platform = Platform(mass=mass, gravity=gravity, inertia=inertia,
                            force_alloc=A, spurious_alloc=B, moment_alloc=C)
    except ValueError as exc:
        raise ValidationError(path, str(exc))
    if matrix_rank(C) < 3:
        raise ValidationError(f"{path}.moment_alloc", "must have rank 3")
    if matrix_rank(A) < min(3, A.shape[1]):
        raise ValidationError(f"{path}.force_alloc", "columns must be independent (full rank)")
    return platform


def _build_gains(node: dict, path: str = "gains") -> GainSet:
    vals = {}
    for key in ("k_p", "k_v", "k_R", "k_Omega"):
        vals[key] = _as_positive(_require(node, key, path), f"{path}.{key}")
    for key in ("c1", "c2"):
        if key in node:
            x = _as_float(node[key], f"{path}.{key}")
            if x < 0.0:
                raise ValidationError(f"{path}.{key}", f"must be >= 0 (got {x})")
            vals[key] = x
    return GainSet(**vals)


def _build_domain(node: dict, path: str = "domain") -> DomainBounds:
    psi = _as_float(_require(node, "psi", path), f"{path}.psi")
    if not 0.0 < psi < 1.0:
        raise ValidationError(f"{path}.psi", f"must lie in (0, 1) (got {psi})")
    delta = _as_float(_require(node, "delta", path), f"{path}.delta")
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"{path}.delta", f"must lie in (0, 1) (got {delta})")
    return DomainBounds(
        psi=psi, delta=delta,
        e_p_max=_as_positive(_require(node, "e_p_max", path), f"{path}.e_p_max"),
        v_max=_as_positive(_require(node, "v_max", path), f"{path}.v_max"),
        Omega_max=_as_positive(_require(node, "Omega_max", path), f"{path}.Omega_max"),
    )


def _build_reference(node: dict, path: str = "reference") -> Reference:
    p_r = _as_vector(_require(node, "position", path), f"{path}.position")
    R_r = parse_rotation(_require(node, "heading", path), f"{path}.heading")
    return Reference(p_r=p_r, R_r=R_r)


def _build_initial(node: dict | None, path: str = "initial") -> InitialState:
    if node is None:
        return InitialState()
    out = InitialState()
    if "position" in node:
        out.position = _as_vector(node["position"], f"{path}.position")
    if "velocity" in node:
        out.velocity = _as_vector(node["velocity"], f"{path}.velocity")
    if "attitude" in node:
        out.attitude = parse_rotation(node["attitude"], f"{path}.attitude")
    if "body_rate" in node:
        out.body_rate = _as_vector(node["body_rate"], f"{path}.body_rate")
    return out


def load_config_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ValidationError("<root>", "top level must be a mapping")
    platform = _build_platform(_require(data, "platform", "<root>"))
    gains = _build_gains(_require(data, "gains", "<root>"))
    domain = _build_domain(_require(data, "domain", "<root>"))
    reference = _build_reference(_require(data, "reference", "<root>"))

    integ = data.get("integrator", {})
    h = _as_positive(integ.get("h", 1e-3), "integrator.h")
    T = _as_positive(integ.get("T", 10.0), "integrator.T")
    if T < h:
        raise ValidationError("integrator.T", f"must be >= h (got T={T}, h={h})")

    out = data.get("output", {})
    out_format = out.get("format", "csv")
    if out_format not in ("csv", "json"):
        raise ValidationError("output.format", f"must be 'csv' or 'json' (got {out_format!r})")

    audit = data.get("audit", {})
    roa = data.get("roa", {})
    cfg = RunConfig(
        platform=platform, gains=gains, domain=domain, reference=reference,
        h=h, T=T,
        seed=int(data.get("seed", 0)),
        out_dir=str(out.get("directory", "out")),
        out_format=out_format,
        audit_samples=int(audit.get("samples", 10_000)),
        roa_trials=int(roa.get("trials", 200)),
        roa_T=_as_positive(roa.get("T", 20.0), "roa.T"),
        initial=_build_initial(data.get("initial")),
        search_ranges=data.get("search"),
        raw=data,
    )
    return cfg


def load_config(path: str | Path) -> RunConfig:
    """Parse and fully validate a config file (YAML or JSON)."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"config file not found: {path}")
    text = path.read_text()
    try:
        if path.suffix == ".json":
            data = json.loads(text)
        else:
            data = yaml.safe_load(text)
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}")
    return load_config_dict(data)


def save_config(cfg: RunConfig, path: str | Path) -> None:
    path = Path(path)
    data = cfg.to_dict()
    if path.suffix == ".json":
        path.write_text(json.dumps(data, indent=2))
    else:
        path.write_text(yaml.safe_dump(data, sort_keys=False))
