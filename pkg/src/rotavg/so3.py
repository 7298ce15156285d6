"""Numerically careful primitives on the rotation group SO(3).

Rotations are plain 3x3 numpy arrays with determinant +1; rotation vectors
are plain 3-vectors holding axis times angle, in radians.  Every function
accepts either a single element or an array with extra leading batch
dimensions, and the pairwise metrics broadcast.  Everything is float64.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "SMALL_ANGLE",
    "NEAR_PI_BAND",
    "NotSkewSymmetric",
    "DegenerateMatrix",
    "hat",
    "vee",
    "exp_map",
    "log_map",
    "geodesic_distance",
    "chordal_distance",
    "project_to_so3",
    "is_rotation",
]

# Below this angle the sin/cos coefficient ratios of the exponential are
# replaced by their limits, and the log returns the zero vector.
SMALL_ANGLE = 1e-8

# Width of the band below pi where the log recovers the axis from the
# symmetric part of the matrix instead of the vanishing skew part.
NEAR_PI_BAND = 1e-6

# Singular-value tolerance below which the nearest-rotation problem stops
# having a unique answer.
_NONUNIQUE_TOL = 1e-12


class NotSkewSymmetric(ValueError):
    """Input to vee() has a symmetric part above tolerance."""


class DegenerateMatrix(ValueError):
    """Matrix is too close to rank deficiency for a unique nearest rotation."""


def _check_mat3(m: np.ndarray) -> None:
    if m.ndim < 2 or m.shape[-2:] != (3, 3):
        raise ValueError(f"expected trailing 3x3 matrix dimensions, got shape {m.shape}")


def hat(v: np.ndarray) -> np.ndarray:
    """Map a 3-vector to the skew-symmetric matrix S with S @ w == cross(v, w).

    Args:
        v: array with trailing dimension 3.

    Returns:
        Array with trailing dimensions (3, 3), skew-symmetric.
    """
    v = np.asarray(v, dtype=float)
    if v.shape[-1:] != (3,):
        raise ValueError(f"expected trailing dimension 3, got shape {v.shape}")
    out = np.zeros(v.shape[:-1] + (3, 3))
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    out[..., 0, 1] = -z
    out[..., 0, 2] = y
    out[..., 1, 0] = z
    out[..., 1, 2] = -x
    out[..., 2, 0] = -y
    out[..., 2, 1] = x
    return out


def vee(s: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Inverse of hat(): extract the 3-vector from a skew-symmetric matrix.

    The symmetric part is discarded after the check, so inputs that are skew
    up to roundoff come back clean.

    Raises:
        NotSkewSymmetric: if ||s + s.T||_F exceeds ``tol`` for any input.
    """
    s = np.asarray(s, dtype=float)
    _check_mat3(s)
    residual = np.linalg.norm(s + np.swapaxes(s, -1, -2), axis=(-2, -1))
    worst = float(np.max(residual)) if residual.size else 0.0
    if worst > tol:
        raise NotSkewSymmetric(f"symmetric part has norm {worst:.3e} (tol {tol:.1e})")
    a = 0.5 * (s - np.swapaxes(s, -1, -2))
    return np.stack([a[..., 2, 1], a[..., 0, 2], a[..., 1, 0]], axis=-1)


def exp_map(v: np.ndarray) -> np.ndarray:
    """Rodrigues map from a rotation vector to a rotation matrix.

    R = I + a * hat(v) + b * hat(v)^2 with a = sin(t)/t and b = (1-cos(t))/t^2
    for t = ||v||.  Below SMALL_ANGLE both ratios are replaced by their limits
    1 and 1/2, which are exact to double precision there.

    Args:
        v: rotation vector(s), trailing dimension 3.  Norms above pi are
            accepted; the result simply wraps.

    Returns:
        Rotation matrix (or stack of them) with trailing dims (3, 3).
    """
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v, axis=-1)
    K = hat(v)
    K2 = K @ K
    safe = np.where(theta < SMALL_ANGLE, 1.0, theta)
    a = np.where(theta < SMALL_ANGLE, 1.0, np.sin(safe) / safe)
    b = np.where(theta < SMALL_ANGLE, 0.5, (1.0 - np.cos(safe)) / (safe * safe))
    return np.eye(3) + a[..., None, None] * K + b[..., None, None] * K2


def _log_near_pi(R: np.ndarray, theta: float) -> np.ndarray:
    """Axis-angle vector for a rotation within NEAR_PI_BAND of a half turn."""
    # Symmetrizing removes the sin(theta)-scaled skew part, leaving
    # ((1+cos)/2) I + ((1-cos)/2) aa^T; the dominant diagonal entry then
    # exposes the axis with O((pi-theta)^2) error.
    A = 0.5 * (0.5 * (R + R.T) + np.eye(3))
    k = int(np.argmax(np.diag(A)))
    axis = A[k] / np.sqrt(A[k, k])  # A[k, k] >= ~1/3 for a unit axis
    axis = axis / np.linalg.norm(axis)
    w = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    wn = float(np.linalg.norm(w))
    # arccos of the trace resolves the angle only to ~sqrt(eps) this close to
    # pi; ||w|| = 2 sin(theta) pins the same angle to full precision
    theta = np.pi - np.arcsin(min(1.0, 0.5 * wn))
    if wn > 1e-12:
        # strictly below pi the sign is still determined by the skew part
        if float(axis @ w) < 0.0:
            axis = -axis
    else:
        # at pi both signs are valid; pick the representative whose first
        # nonzero component is positive
        for c in axis:
            if abs(c) > 1e-9:
                if c < 0.0:
                    axis = -axis
                break
    return theta * axis


def log_map(r: np.ndarray) -> np.ndarray:
    """Rotation matrix to rotation vector with norm in [0, pi].

    Angles below SMALL_ANGLE map to the zero vector.  Within NEAR_PI_BAND of
    pi the usual (R - R.T) route loses all precision, so the axis is
    recovered from the symmetric part instead (see _log_near_pi).  The caller
    is responsible for handing in genuine rotations.
    """
    r = np.asarray(r, dtype=float)
    _check_mat3(r)
    single = r.ndim == 2
    R = r.reshape((-1, 3, 3))
    tr = np.einsum("nii->n", R)
    w = np.stack(
        [
            R[:, 2, 1] - R[:, 1, 2],
            R[:, 0, 2] - R[:, 2, 0],
            R[:, 1, 0] - R[:, 0, 1],
        ],
        axis=-1,
    )
    wn = np.linalg.norm(w, axis=-1)
    # On a rotation, ||w|| == 2 sin(theta) and tr == 1 + 2 cos(theta), so
    # atan2 recovers theta with full precision over the whole of [0, pi] —
    # arccos of the trace alone bottoms out near sqrt(eps) at both ends.
    theta = np.arctan2(0.5 * wn, 0.5 * (tr - 1.0))
    v = np.zeros((R.shape[0], 3))
    main = (theta >= SMALL_ANGLE) & (theta < np.pi - NEAR_PI_BAND)
    if np.any(main):
        # theta/(2 sin theta) * w, with 2 sin(theta) evaluated as ||w||
        v[main] = (theta[main] / wn[main])[:, None] * w[main]
    for i in np.flatnonzero(theta >= np.pi - NEAR_PI_BAND):
        v[i] = _log_near_pi(R[i], float(theta[i]))
    if single:
        return v[0]
    return v.reshape(r.shape[:-2] + (3,))


def geodesic_distance(r1: np.ndarray, r2: np.ndarray) -> float | np.ndarray:
    """Rotation angle of r1 @ r2.T in radians, within [0, pi].

    The angle comes out of atan2(sin, cos) with the sine read off the skew
    part of r1 @ r2.T and the cosine off its trace, which stays accurate for
    angles arbitrarily close to 0 and pi alike (arccos of the trace alone
    cannot resolve below ~1e-8 at either end).  Broadcasts over leading
    dimensions.
    """
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    _check_mat3(r1)
    _check_mat3(r2)
    m = r1 @ np.swapaxes(r2, -1, -2)
    tr = np.einsum("...ii->...", m)
    sin2 = np.stack(
        [
            m[..., 2, 1] - m[..., 1, 2],
            m[..., 0, 2] - m[..., 2, 0],
            m[..., 1, 0] - m[..., 0, 1],
        ],
        axis=-1,
    )
    d = np.arctan2(0.5 * np.linalg.norm(sin2, axis=-1), 0.5 * (tr - 1.0))
    return float(d) if np.ndim(d) == 0 else d


def chordal_distance(r1: np.ndarray, r2: np.ndarray) -> float | np.ndarray:
    """Frobenius distance ||r1 - r2||_F; equals 2*sqrt(2)*sin(geodesic/2)."""
    diff = np.asarray(r1, dtype=float) - np.asarray(r2, dtype=float)
    _check_mat3(diff)
    d = np.sqrt(np.einsum("...ij,...ij->...", diff, diff))
    return float(d) if np.ndim(d) == 0 else d


def project_to_so3(m: np.ndarray) -> np.ndarray:
    """Frobenius-nearest rotation to an arbitrary 3x3 matrix.

    Uses the SVD U diag(1, 1, sign(det(U V^T))) V^T, which handles inputs
    with negative determinant.  The minimizer exists for any matrix but is
    only unique when the rank is at least 2 and, for det < 0, the two
    trailing singular values are separated.

    Raises:
        DegenerateMatrix: when the nearest rotation is not unique at
            tolerance 1e-12 (rank < 2, or a reflection-ambiguous spectrum).
    """
    m = np.asarray(m, dtype=float)
    _check_mat3(m)
    single = m.ndim == 2
    M = m.reshape((-1, 3, 3))
    U, s, Vt = np.linalg.svd(M)
    d = np.linalg.det(U @ Vt)
    bad = (s[:, 1] <= _NONUNIQUE_TOL) | ((d < 0.0) & (s[:, 1] - s[:, 2] <= _NONUNIQUE_TOL))
    if np.any(bad):
        raise DegenerateMatrix("projection onto SO(3) is not unique for this input")
    Uc = U.copy()
    Uc[:, :, 2] *= np.where(d < 0.0, -1.0, 1.0)[:, None]
    R = Uc @ Vt
    return R[0] if single else R.reshape(m.shape)


def is_rotation(m: np.ndarray, tol: float = 1e-9) -> bool | np.ndarray:
    """True when m.T @ m == I (Frobenius) and det(m) == 1, both within tol."""
    m = np.asarray(m, dtype=float)
    if m.ndim < 2 or m.shape[-2:] != (3, 3):
        return False
    orth = np.linalg.norm(np.swapaxes(m, -1, -2) @ m - np.eye(3), axis=(-2, -1))
    ok = (orth <= tol) & (np.abs(np.linalg.det(m) - 1.0) <= tol)
    return bool(ok) if np.ndim(ok) == 0 else ok
