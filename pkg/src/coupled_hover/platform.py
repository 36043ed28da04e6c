"""Platform description, allocation classification, and hoverability checks."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import NotD1Minimal, RankDeficientC, ZeroColumn

RANK_TOL = 1e-9  # sigma_i > RANK_TOL * sigma_max counts toward the rank
SYM_TOL = 1e-12


class Coupling(enum.Enum):
    FULLY_DECOUPLED = "FullyDecoupled"
    PARTIALLY_COUPLED = "PartiallyCoupled"


@dataclass(frozen=True, eq=False)
class Platform:
    """Rigid body plus its wrench allocation matrices.

    force_alloc (A) maps the force input to body force, moment_alloc (C)
    maps the moment input to body moment, and spurious_alloc (B) is the
    translational side effect of the moment input.
    """

    mass: float
    gravity: float
    inertia: np.ndarray       # (3, 3), symmetric positive definite
    force_alloc: np.ndarray   # (3, n_f)
    spurious_alloc: np.ndarray  # (3, n_tau)
    moment_alloc: np.ndarray  # (3, n_tau)

    def __post_init__(self):
        object.__setattr__(self, "inertia", np.array(self.inertia, dtype=float))
        object.__setattr__(self, "force_alloc", np.atleast_2d(np.array(self.force_alloc, dtype=float)))
        object.__setattr__(self, "spurious_alloc", np.atleast_2d(np.array(self.spurious_alloc, dtype=float)))
        object.__setattr__(self, "moment_alloc", np.atleast_2d(np.array(self.moment_alloc, dtype=float)))
        if self.mass <= 0.0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.gravity <= 0.0:
            raise ValueError(f"gravity must be positive, got {self.gravity}")
        J = self.inertia
        if J.shape != (3, 3):
            raise ValueError(f"inertia must be 3x3, got {J.shape}")
        if np.max(np.abs(J - J.T)) > SYM_TOL * max(1.0, np.max(np.abs(J))):
            raise ValueError("inertia must be symmetric; refusing to symmetrize silently")
        if np.min(np.linalg.eigvalsh(J)) <= 0.0:
            raise ValueError("inertia must be positive definite")
        for name in ("force_alloc", "spurious_alloc", "moment_alloc"):
            M = getattr(self, name)
            if M.ndim != 2 or M.shape[0] != 3:
                raise ValueError(f"{name} must have shape (3, n), got {M.shape}")
        if self.spurious_alloc.shape[1] != self.moment_alloc.shape[1]:
            raise ValueError(
                "spurious_alloc and moment_alloc must share the moment input "
                f"dimension, got {self.spurious_alloc.shape[1]} vs {self.moment_alloc.shape[1]}"
            )

    @property
    def n_f(self) -> int:
        return self.force_alloc.shape[1]

    @property
    def n_tau(self) -> int:
        return self.moment_alloc.shape[1]

    @property
    def n_inputs(self) -> int:
        return self.n_f + self.n_tau

    def inertia_eigs(self) -> tuple[float, float]:
        w = np.linalg.eigvalsh(self.inertia)
        return float(w[0]), float(w[-1])

    @property
    def inertia_inv(self) -> np.ndarray:
        cached = getattr(self, "_inertia_inv", None)
        if cached is None:
            cached = np.linalg.inv(self.inertia)
            object.__setattr__(self, "_inertia_inv", cached)
        return cached

    @property
    def weight(self) -> float:
        return self.mass * self.gravity


@dataclass(frozen=True)
class PlatformClass:
    coupling: Coupling
    force_rank: int
    tags: frozenset = field(default_factory=frozenset)

    @property
    def is_d1(self) -> bool:
        return "D1" in self.tags


@dataclass(frozen=True)
class HoverabilityReport:
    hoverable: bool
    violations: tuple


def matrix_rank(M: np.ndarray, tol: float = RANK_TOL) -> int:
    """Rank by SVD with a relative singular-value threshold."""
    M = np.asarray(M, dtype=float)
    if M.size == 0 or not np.any(M):
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > tol * s[0]))


def classify(platform: Platform, tol: float = RANK_TOL) -> PlatformClass:
    """Coupling and force-authority classification of the allocation pair."""
    A, B, C = platform.force_alloc, platform.spurious_alloc, platform.moment_alloc
    if matrix_rank(C, tol) < 3:
        raise RankDeficientC("moment allocation must have rank 3 for classification")
    rank_a = matrix_rank(A, tol)
    rank_ab = matrix_rank(np.hstack([A, B]), tol)
    coupling = Coupling.FULLY_DECOUPLED if rank_ab == rank_a else Coupling.PARTIALLY_COUPLED
    tags = set()
    if rank_a >= 1:
        tags.add("D1")
    if rank_a >= 2:
        tags.add("D2")
    if rank_a == 3:
        tags.add("FA")
    return PlatformClass(coupling=coupling, force_rank=rank_a, tags=frozenset(tags))


def preferential_direction(platform: Platform) -> np.ndarray:
    """Unit direction of the single moment-free force column."""
    if platform.n_f != 1:
        raise NotD1Minimal(f"preferential direction requires n_f = 1, got n_f = {platform.n_f}")
    a = platform.force_alloc[:, 0]
    norm = np.linalg.norm(a)
    if norm < 1e-12:
        raise ZeroColumn("force allocation column is numerically zero")
    return a / norm


def spurious_gain(platform: Platform) -> float:
    """Coupling magnitude sigma_max(B) / sigma_min(C)."""
    C = platform.moment_alloc
    s_c = np.linalg.svd(C, compute_uv=False)
    if matrix_rank(C) < 3:
        raise RankDeficientC("moment allocation must have rank 3")
    B = platform.spurious_alloc
    s_b_max = 0.0 if not np.any(B) else float(np.linalg.svd(B, compute_uv=False)[0])
    return s_b_max / float(s_c[-1])


def static_hoverability(platform: Platform) -> HoverabilityReport:
    """Necessary conditions for a static hover equilibrium to exist.

    Violations are reported, not raised, so degenerate platforms can be
    inspected.
    """
    violations = []
    if platform.n_inputs < 4:
        violations.append(f"n = {platform.n_inputs} < 4 total inputs")
    if matrix_rank(platform.moment_alloc) < 3:
        violations.append(f"rank(moment_alloc) = {matrix_rank(platform.moment_alloc)} < 3")
    rank_a = matrix_rank(platform.force_alloc)
    if rank_a < 1:
        violations.append("rank(force_alloc) = 0, no moment-free thrust direction")
    return HoverabilityReport(hoverable=not violations, violations=tuple(violations))
