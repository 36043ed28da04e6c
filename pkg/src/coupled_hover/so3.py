"""Rotation-group primitives and the attitude-error machinery.

All functions accept stacked inputs: vectors are (..., 3) and rotation
matrices (..., 3, 3); the batch axes broadcast through every operation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotSkew

SKEW_TOL = 1e-9
SMALL_ANGLE = 1e-8


@dataclass(frozen=True)
class AxisAngle:
    """Unit axis and angle in [0, pi); the config-facing rotation form."""

    axis: np.ndarray
    angle: float

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        norm = np.linalg.norm(axis)
        if abs(norm - 1.0) > 1e-12:
            if norm < 1e-12:
                raise ValueError("axis must be nonzero")
            axis = axis / norm
        object.__setattr__(self, "axis", axis)
        angle = float(self.angle) % (2.0 * np.pi)
        if angle >= np.pi:  # canonical range via the opposite axis
            angle = 2.0 * np.pi - angle
            object.__setattr__(self, "axis", -self.axis)
        object.__setattr__(self, "angle", angle)

    def matrix(self) -> np.ndarray:
        return exp_so3(self.axis * self.angle)


def hat(v: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix of v, satisfying hat(v) @ w = v x w."""
    v = np.asarray(v, dtype=float)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    zero = np.zeros_like(x)
    return np.stack(
        [
            np.stack([zero, -z, y], axis=-1),
            np.stack([z, zero, -x], axis=-1),
            np.stack([-y, x, zero], axis=-1),
        ],
        axis=-2,
    )


def skew_part_vee(M: np.ndarray) -> np.ndarray:
    """vee of the antisymmetric part of M: 0.5 * vee(M - M^T).

    No skewness check; used where the argument is skew by construction.
    """
    M = np.asarray(M, dtype=float)
    return 0.5 * np.stack(
        [
            M[..., 2, 1] - M[..., 1, 2],
            M[..., 0, 2] - M[..., 2, 0],
            M[..., 1, 0] - M[..., 0, 1],
        ],
        axis=-1,
    )


def vee(M: np.ndarray) -> np.ndarray:
    """Inverse of hat(); raises NotSkew if M is not skew within 1e-9."""
    M = np.asarray(M, dtype=float)
    residual = np.max(np.abs(M + np.swapaxes(M, -1, -2)))
    if residual > SKEW_TOL:
        raise NotSkew(f"matrix is not skew-symmetric: |M + M^T| = {residual:.3e}")
    return np.stack([M[..., 2, 1], M[..., 0, 2], M[..., 1, 0]], axis=-1)


def exp_so3(v: np.ndarray) -> np.ndarray:
    """Rodrigues exponential of a rotation vector.

    Below SMALL_ANGLE the sin/cos coefficients switch to second-order
    Taylor expansions to avoid 0/0.
    """
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v, axis=-1, keepdims=True)
    theta2 = theta * theta
    small = theta < SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    a = np.where(small, 1.0 - theta2 / 6.0, np.sin(safe) / safe)
    b = np.where(small, 0.5 - theta2 / 24.0, (1.0 - np.cos(safe)) / (safe * safe))
    K = hat(v)
    eye = np.broadcast_to(np.eye(3), K.shape)
    return eye + a[..., None] * K + b[..., None] * (K @ K)


def log_so3(R: np.ndarray) -> np.ndarray:
    """Rotation vector of R for eigen-angles away from pi.

    Valid on angles in [0, pi); near pi the axis extraction from the
    antisymmetric part degenerates and is not handled here.
    """
    R = np.asarray(R, dtype=float)
    tr = np.trace(R, axis1=-2, axis2=-1)
    cos_theta = np.clip((tr - 1.0) / 2.0, -1.0, 1.0)
    theta = np.arccos(cos_theta)
    w = np.stack(
        [
            R[..., 2, 1] - R[..., 1, 2],
            R[..., 0, 2] - R[..., 2, 0],
            R[..., 1, 0] - R[..., 0, 1],
        ],
        axis=-1,
    )
    small = theta < SMALL_ANGLE
    safe = np.where(small, 1.0, np.sin(theta))
    scale = np.where(small, 0.5 + theta**2 / 12.0, theta / (2.0 * safe))
    return scale[..., None] * w


def psi(R: np.ndarray, Rd: np.ndarray) -> np.ndarray:
    """Attitude-error function 0.5 * (3 - Tr[Rd^T R]) = 1 - cos(angle)."""
    R = np.asarray(R, dtype=float)
    Rd = np.asarray(Rd, dtype=float)
    tr = np.einsum("...ij,...ij->...", Rd, R)  # Tr[Rd^T R]
    return 0.5 * (3.0 - tr)


def attitude_error(R: np.ndarray, Rd: np.ndarray) -> np.ndarray:
    """Attitude error vector 0.5 * vee(Rd^T R - R^T Rd).

    Undefined only at the antipode (psi = 2), which is outside every
    certified domain.
    """
    R = np.asarray(R, dtype=float)
    Rd = np.asarray(Rd, dtype=float)
    M = np.einsum("...ji,...jk->...ik", Rd, R)
    return skew_part_vee(M)


def transport_matrix(R: np.ndarray, Rd: np.ndarray) -> np.ndarray:
    """Matrix 0.5 * (Tr[R^T Rd] I - R^T Rd) mapping rate error to d/dt e_R.

    Its operator 2-norm never exceeds 1.
    """
    R = np.asarray(R, dtype=float)
    Rd = np.asarray(Rd, dtype=float)
    M = np.einsum("...ji,...jk->...ik", R, Rd)
    tr = np.einsum("...ii->...", M)
    eye = np.broadcast_to(np.eye(3), M.shape)
    return 0.5 * (tr[..., None, None] * eye - M)


def rotate(R: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Apply rotation matrices to stacked vectors."""
    return np.einsum("...ij,...j->...i", np.asarray(R, float), np.asarray(v, float))


def rotate_t(R: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Apply transposed rotations (world -> body) to stacked vectors."""
    return np.einsum("...ji,...j->...i", np.asarray(R, float), np.asarray(v, float))


def orthonormality_residual(R: np.ndarray) -> np.ndarray:
    """Max-abs entry of R^T R - I per stacked matrix."""
    R = np.asarray(R, dtype=float)
    G = np.einsum("...ji,...jk->...ik", R, R)
    return np.max(np.abs(G - np.eye(3)), axis=(-2, -1))


def project_to_so3(R: np.ndarray) -> np.ndarray:
    """Closest proper rotation in Frobenius norm (polar projection via SVD)."""
    R = np.asarray(R, dtype=float)
    U, _, Vt = np.linalg.svd(R)
    det = np.linalg.det(U @ Vt)
    D = np.zeros(R.shape[:-2] + (3, 3))
    D[..., 0, 0] = 1.0
    D[..., 1, 1] = 1.0
    D[..., 2, 2] = det
    return U @ D @ Vt


def is_rotation(R: np.ndarray, tol: float = 1e-9) -> bool:
    """True if every stacked matrix is orthonormal with det +1 within tol."""
    R = np.asarray(R, dtype=float)
    if R.shape[-2:] != (3, 3):
        return False
    if np.any(orthonormality_residual(R) > tol):
        return False
    return bool(np.all(np.abs(np.linalg.det(R) - 1.0) <= max(tol, 1e-9)))


def random_rotation(rng: np.random.Generator, shape=()) -> np.ndarray:
    """Haar-uniform random rotations via normalized quaternions."""
    q = rng.normal(size=tuple(shape) + (4,))
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    row0 = np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], axis=-1)
    row1 = np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], axis=-1)
    row2 = np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], axis=-1)
    return np.stack([row0, row1, row2], axis=-2)


def rotation_about(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rotation by `angle` about a (not necessarily unit) axis."""
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis, axis=-1, keepdims=True)
    unit = axis / np.where(n == 0.0, 1.0, n)
    return exp_so3(unit * np.asarray(angle)[..., None])
