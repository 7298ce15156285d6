"""Rotation recovery between corresponding point clouds, the hard way.

A similarity-transformed, noisy, heavily outlier-contaminated copy of a
cloud is aligned back to the original by harvesting thousands of rotation
hypotheses from random 3-point samples (pre-filtered by a scale-free
triangle side-ratio test) and then robust-averaging the hypothesis set.
Correspondences are positional: point i in one cloud pairs with point i in
the other.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from rotavg import so3
from rotavg.averaging import AveragingResult, TludConfig, robust_average
from rotavg.bench import random_outlier

__all__ = [
    "TooFewPoints",
    "DegenerateTriangle",
    "CollinearPoints",
    "AttemptCapExceeded",
    "RegistrationScenario",
    "make_scenario",
    "normalize_cloud",
    "corrupt_cloud",
    "triangle_ratio_check",
    "align_three_points",
    "harvest_hypotheses",
    "register_rotation",
]

# Triangle sides shorter than this make the ratio test meaningless.
_SIDE_TOL = 1e-9

# Second singular value of the (normalized) cross-covariance below which the
# three points are treated as collinear.
_COLLINEAR_TOL = 1e-9

# Fixed tags deriving independent RNG streams from one scenario seed.
_TAG_CORRUPT = 0
_TAG_HARVEST = 1
_TAG_SCENARIO = 2
_TAG_NORMALIZE = 3


class TooFewPoints(ValueError):
    """Cloud has fewer points than the operation needs."""


class DegenerateTriangle(ValueError):
    """A triangle side is too short for the ratio test."""


class CollinearPoints(ValueError):
    """Three points do not span a plane, so no unique rotation fits them."""


class AttemptCapExceeded(RuntimeError):
    """Hypothesis harvesting ran out of attempts before filling its quota
    (usually the ratio tolerance is too strict for the data)."""


def _stream(seed: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *tags]))


def _as_cloud(points, min_points: int = 1) -> np.ndarray:
    p = np.asarray(points, dtype=float)
    if p.ndim != 2 or p.shape[1] != 3:
        raise ValueError(f"expected an (N, 3) point array, got shape {p.shape}")
    if len(p) < min_points:
        raise TooFewPoints(f"need at least {min_points} points, got {len(p)}")
    return p


@dataclass(frozen=True, eq=False)
class RegistrationScenario:
    """Corruption and harvesting parameters for one registration run.

    scale/rotation/translation may be None for runs that only harvest (the
    CLI two-file mode); corrupt_cloud requires all three.  make_scenario
    draws the missing ones from the seed.
    """

    scale: float | None
    rotation: np.ndarray | None
    translation: np.ndarray | None
    noise_sigma: float = 0.01
    outlier_fraction: float = 0.0
    n_hypotheses: int = 2000
    ratio_tolerance: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.scale is not None and not 1.0 < self.scale < 5.0:
            raise ValueError(f"scale must lie in (1, 5), got {self.scale}")
        if self.rotation is not None and not so3.is_rotation(self.rotation):
            raise ValueError("rotation must be a valid rotation matrix")
        if self.translation is not None and np.shape(self.translation) != (3,):
            raise ValueError(f"translation must be a 3-vector, got shape {np.shape(self.translation)}")
        if self.noise_sigma < 0.0:
            raise ValueError(f"noise_sigma must be non-negative, got {self.noise_sigma}")
        if not 0.0 <= self.outlier_fraction <= 0.98:
            raise ValueError(f"outlier_fraction must lie in [0, 0.98], got {self.outlier_fraction}")
        if self.n_hypotheses < 1:
            raise ValueError(f"n_hypotheses must be at least 1, got {self.n_hypotheses}")
        if self.ratio_tolerance < 0.0:
            raise ValueError(f"ratio_tolerance must be non-negative, got {self.ratio_tolerance}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit non-negative integer, got {self.seed}")


def make_scenario(
    seed: int,
    outlier_fraction: float,
    n_hypotheses: int = 2000,
    noise_sigma: float = 0.01,
    ratio_tolerance: float = 0.1,
    scale: float | None = None,
    rotation: np.ndarray | None = None,
    translation: np.ndarray | None = None,
) -> RegistrationScenario:
    """Materialize a scenario, drawing any unspecified transform from the seed.

    The drawn scale is uniform in (1, 5), the rotation uniform over SO(3),
    the translation uniform in [-1, 1]^3 (its range is immaterial: centroid
    subtraction removes it downstream).
    """
    rng = _stream(seed, _TAG_SCENARIO)
    if scale is None:
        scale = float(rng.uniform(1.0, 5.0))
        while scale <= 1.0:  # uniform(1, 5) can land exactly on 1
            scale = float(rng.uniform(1.0, 5.0))
    if rotation is None:
        rotation = random_outlier(rng)
    if translation is None:
        translation = rng.uniform(-1.0, 1.0, 3)
    return RegistrationScenario(
        scale=scale,
        rotation=np.asarray(rotation, dtype=float),
        translation=np.asarray(translation, dtype=float),
        noise_sigma=noise_sigma,
        outlier_fraction=outlier_fraction,
        n_hypotheses=n_hypotheses,
        ratio_tolerance=ratio_tolerance,
        seed=seed,
    )


def normalize_cloud(points, target_count: int, rng=None) -> np.ndarray:
    """Uniform random downsample to target_count, then fit to the unit cube.

    The fitted cloud is centered on the origin with its axis-aligned bounding
    box inside [-0.5, 0.5]^3 and the longest axis spanning exactly 1.

    Args:
        points: (N, 3) array, N >= target_count.
        target_count: points to keep.
        rng: generator, integer seed, or None for a fixed default stream.
    """
    p = _as_cloud(points)
    if target_count < 1:
        raise ValueError(f"target_count must be at least 1, got {target_count}")
    if len(p) < target_count:
        raise TooFewPoints(f"cannot downsample {len(p)} points to {target_count}")
    if rng is None or isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(0 if rng is None else int(rng))
    p = p[rng.choice(len(p), size=target_count, replace=False)]
    lo = p.min(axis=0)
    hi = p.max(axis=0)
    span = float((hi - lo).max())
    if span <= 0.0:
        raise ValueError("cloud has zero extent; cannot fit it to the unit cube")
    return (p - (lo + hi) / 2.0) / span


def corrupt_cloud(points, scen: RegistrationScenario) -> np.ndarray:
    """Similarity-transform, perturb, and outlier-contaminate a cloud.

    Applies p -> scale * R @ p + t, adds per-coordinate Gaussian noise of std
    scen.noise_sigma, then replaces a uniformly chosen (without replacement)
    round(outlier_fraction * n) subset of points with uniform samples from
    the ball of diameter sqrt(3) * scale centered on the cloud's centroid.
    All randomness comes from the scenario seed.
    """
    p = _as_cloud(points)
    if scen.scale is None or scen.rotation is None or scen.translation is None:
        raise ValueError("scenario must carry scale, rotation, and translation to corrupt a cloud")
    rng = _stream(scen.seed, _TAG_CORRUPT)
    q = scen.scale * (p @ scen.rotation.T) + scen.translation
    q = q + rng.normal(0.0, scen.noise_sigma, size=q.shape)
    n_replace = int(round(scen.outlier_fraction * len(q)))
    if n_replace:
        idx = rng.choice(len(q), size=n_replace, replace=False)
        center = q.mean(axis=0)
        radius = math.sqrt(3.0) * scen.scale / 2.0
        dirs = rng.normal(size=(n_replace, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        radii = radius * np.cbrt(rng.random(n_replace))
        q[idx] = center + radii[:, None] * dirs
    return q


def _triangle_sides(p: np.ndarray) -> np.ndarray:
    """Side lengths [|p1-p0|, |p2-p1|, |p0-p2|] for (..., 3, 3) point triples."""
    d = np.stack(
        [
            p[..., 1, :] - p[..., 0, :],
            p[..., 2, :] - p[..., 1, :],
            p[..., 0, :] - p[..., 2, :],
        ],
        axis=-2,
    )
    return np.linalg.norm(d, axis=-1)


def triangle_ratio_check(src, dst, tol: float = 0.1) -> bool:
    """True when the three per-side length ratios dst/src agree within tol.

    Agreement means max(ratios) / min(ratios) - 1 <= tol, which is invariant
    to the absolute scale of either triangle.

    Raises:
        DegenerateTriangle: when any side of either triangle is shorter
            than 1e-9.
    """
    s = np.asarray(src, dtype=float).reshape(3, 3)
    d = np.asarray(dst, dtype=float).reshape(3, 3)
    ls = _triangle_sides(s)
    ld = _triangle_sides(d)
    if float(min(ls.min(), ld.min())) < _SIDE_TOL:
        raise DegenerateTriangle("triangle has a side shorter than 1e-9")
    r = ld / ls
    return bool(float(r.max() / r.min()) - 1.0 <= tol)


def align_three_points(src, dst) -> np.ndarray:
    """Rotation best aligning three corresponding points, scale and
    translation ignored.

    Centers both triples, normalizes each by its RMS radius, and projects
    the cross-covariance sum(dst_i' @ src_i'.T) onto SO(3) (orthogonal
    Procrustes).  The result maps src directions onto dst directions.

    Raises:
        CollinearPoints: when the points span no plane (cross-covariance
            rank below 2), including coincident points.
    """
    s = np.asarray(src, dtype=float).reshape(3, 3)
    d = np.asarray(dst, dtype=float).reshape(3, 3)
    sc = s - s.mean(axis=0)
    dc = d - d.mean(axis=0)
    srms = math.sqrt(float((sc * sc).sum()) / 3.0)
    drms = math.sqrt(float((dc * dc).sum()) / 3.0)
    if srms < 1e-12 or drms < 1e-12:
        raise CollinearPoints("points coincide; no direction information")
    H = (dc / drms).T @ (sc / srms)
    sv = np.linalg.svd(H, compute_uv=False)
    if sv[1] <= _COLLINEAR_TOL:
        raise CollinearPoints("points are collinear; rotation about their axis is free")
    return so3.project_to_so3(H)


def _distinct_triples(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    """(m, 3) uniformly random index triples with three distinct entries each."""
    idx = rng.integers(0, n, size=(m, 3))
    while True:
        dup = (idx[:, 0] == idx[:, 1]) | (idx[:, 1] == idx[:, 2]) | (idx[:, 0] == idx[:, 2])
        k = int(dup.sum())
        if not k:
            return idx
        idx[dup] = rng.integers(0, n, size=(k, 3))


def _harvest_batch(
    src: np.ndarray, dst: np.ndarray, tol: float, rng: np.random.Generator, m: int
) -> np.ndarray:
    """Vectorized equivalent of m passes of {sample triple, ratio-check, align}.

    Degenerate or collinear triples count as failed checks and are dropped.
    Accepted rotations keep attempt order.
    """
    idx = _distinct_triples(rng, len(src), m)
    sp = src[idx]
    dp = dst[idx]
    ls = _triangle_sides(sp)
    ld = _triangle_sides(dp)
    ok = (ls.min(axis=1) >= _SIDE_TOL) & (ld.min(axis=1) >= _SIDE_TOL)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = ld / ls
        spread = r.max(axis=1) / r.min(axis=1) - 1.0
    ok &= spread <= tol  # NaNs from degenerate rows fail the comparison
    sp = sp[ok]
    dp = dp[ok]
    if len(sp) == 0:
        return np.empty((0, 3, 3))
    sc = sp - sp.mean(axis=1, keepdims=True)
    dc = dp - dp.mean(axis=1, keepdims=True)
    srms = np.sqrt((sc * sc).sum(axis=(1, 2)) / 3.0)
    drms = np.sqrt((dc * dc).sum(axis=(1, 2)) / 3.0)
    H = np.einsum("bif,big->bfg", dc / drms[:, None, None], sc / srms[:, None, None])
    U, sv, Vt = np.linalg.svd(H)
    keep = sv[:, 1] > _COLLINEAR_TOL
    U, Vt = U[keep], Vt[keep]
    det = np.linalg.det(U @ Vt)
    U[:, :, 2] *= np.where(det < 0.0, -1.0, 1.0)[:, None]
    return U @ Vt


def harvest_hypotheses(
    src,
    dst,
    scen: RegistrationScenario,
    attempt_cap: int = 1_000_000,
    batch_size: int = 4096,
    n_workers: int = 1,
) -> np.ndarray:
    """Collect scen.n_hypotheses rotations from ratio-filtered 3-point samples.

    Repeats {sample 3 distinct indices uniformly, ratio-check the two
    triangles, align and keep the rotation if it passes} until the quota is
    met.  Attempts are organized in fixed-size batches, each with its own
    RNG stream derived from (scenario seed, batch index), and accepted
    hypotheses concatenate in batch order: the output is identical for any
    worker count and for repeated runs.

    Raises:
        AttemptCapExceeded: when attempt_cap attempts cannot fill the quota.
    """
    s = _as_cloud(src, min_points=3)
    d = _as_cloud(dst, min_points=3)
    if len(s) != len(d):
        raise ValueError(f"clouds must correspond point-for-point, got {len(s)} vs {len(d)}")
    if attempt_cap < 1:
        raise ValueError(f"attempt_cap must be at least 1, got {attempt_cap}")
    if batch_size < 1:
        raise ValueError(f"batch_size must be at least 1, got {batch_size}")
    need = scen.n_hypotheses

    def batch_job(b: int) -> np.ndarray:
        start = b * batch_size
        m = min(batch_size, attempt_cap - start)
        return _harvest_batch(s, d, scen.ratio_tolerance, _stream(scen.seed, _TAG_HARVEST, b), m)

    chunks: list[np.ndarray] = []
    total = 0
    if n_workers <= 1:
        b = 0
        while total < need and b * batch_size < attempt_cap:
            got = batch_job(b)
            chunks.append(got)
            total += len(got)
            b += 1
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as ex:
            pending: deque = deque()
            next_b = 0

            def top_up() -> None:
                nonlocal next_b
                while len(pending) < 2 * n_workers and next_b * batch_size < attempt_cap:
                    pending.append(ex.submit(batch_job, next_b))
                    next_b += 1

            top_up()
            while pending and total < need:
                got = pending.popleft().result()  # consume strictly in batch order
                chunks.append(got)
                total += len(got)
                top_up()
            for fut in pending:
                fut.cancel()
    if total < need:
        raise AttemptCapExceeded(
            f"collected {total}/{need} hypotheses within {attempt_cap} attempts; "
            f"the ratio tolerance {scen.ratio_tolerance} may be too strict for this data"
        )
    return np.concatenate(chunks)[:need]


def register_rotation(
    src,
    dst,
    scen: RegistrationScenario,
    config: TludConfig | None = None,
    attempt_cap: int = 1_000_000,
    batch_size: int = 4096,
    n_workers: int = 1,
) -> AveragingResult:
    """Estimate the rotation between corresponding clouds.

    Harvests scen.n_hypotheses rotations from random 3-point samples and
    robust-averages them.  The returned inlier indices refer to the
    hypothesis list, not to cloud points.
    """
    hyps = harvest_hypotheses(
        src, dst, scen, attempt_cap=attempt_cap, batch_size=batch_size, n_workers=n_workers
    )
    return robust_average(hyps, config)
