"""Robust averaging of rotation samples under a truncated deviation cost.

The estimator caps each sample's deviation from a candidate average at a
threshold, so far-away samples contribute a constant and stop influencing
the answer.  The pipeline: pick the input rotation with the lowest truncated
chordal cost (cheap, pure matrix arithmetic), keep the samples within the
chordal threshold of it, seed from the projected sum of that subset, and
polish with an iteratively reweighted geodesic median over the subset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from rotavg import so3

__all__ = [
    "EmptyInput",
    "EmptySubset",
    "TludConfig",
    "AveragingResult",
    "tlud_cost_geodesic",
    "tlud_cost_chordal",
    "proxy_initialize",
    "select_inliers",
    "chordal_l2_mean",
    "weiszfeld_geodesic_l1",
    "geodesic_l1_mean",
    "robust_average",
]

_TWO_SQRT_TWO = 2.0 * math.sqrt(2.0)

# Samples closer than this to the current iterate are left out of the
# Weiszfeld weights (their inverse distance would blow up).
COINCIDENT_TOL = 1e-9


class EmptyInput(ValueError):
    """An operation that needs at least one rotation received none."""


class EmptySubset(ValueError):
    """An operation over a subset of samples received an empty index set."""


@dataclass(frozen=True)
class TludConfig:
    """Thresholds and iteration limits for robust_average.

    Attributes:
        epsilon_c: chordal inlier threshold (Frobenius units, in (0, 2*sqrt(2))).
        delta: refinement stops once the update step is shorter than this (radians).
        it_max: refinement iteration cap.
        realternate: extra select-inliers/refine rounds after the first pass.
            The default 0 runs the single pass, which is normally enough.
    """

    epsilon_c: float = 0.5
    delta: float = 0.001
    it_max: int = 10
    realternate: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon_c < _TWO_SQRT_TWO:
            raise ValueError(f"epsilon_c must lie in (0, 2*sqrt(2)), got {self.epsilon_c}")
        if self.delta <= 0.0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.it_max < 1:
            raise ValueError(f"it_max must be at least 1, got {self.it_max}")
        if self.realternate < 0:
            raise ValueError(f"realternate must be non-negative, got {self.realternate}")

    @property
    def epsilon_g(self) -> float:
        """Geodesic threshold equivalent to epsilon_c, in radians.

        A chordal ball of radius epsilon_c is exactly a geodesic ball of
        radius 2*asin(epsilon_c / (2*sqrt(2))); for the default 0.5 this is
        about 0.3554 rad (20.4 degrees).
        """
        return 2.0 * math.asin(self.epsilon_c / _TWO_SQRT_TWO)


@dataclass
class AveragingResult:
    """Estimate plus diagnostics from one averaging run.

    Attributes:
        estimate: the averaged rotation (3x3).
        inliers: sorted 0-based indices of the samples used for refinement.
        init_index: index of the input chosen by proxy initialization, or
            None when refinement was seeded some other way.
        iterations: refinement iterations executed.
        update_norms: per-iteration step length, radians; length == iterations.
        final_cost: sum of geodesic deviations over the inliers at the
            final estimate, radians.
        cost_history: that same cost before refinement and after every
            iteration; length == iterations + 1.
        guard_fired: True when some sample coincided with the iterate during
            refinement and was excluded from the weights for that iteration.
    """

    estimate: np.ndarray
    inliers: np.ndarray
    init_index: int | None
    iterations: int
    update_norms: np.ndarray
    final_cost: float
    cost_history: np.ndarray = field(default_factory=lambda: np.empty(0))
    guard_fired: bool = False


def _as_rotation_stack(samples: np.ndarray, allow_empty: bool = False) -> np.ndarray:
    a = np.asarray(samples, dtype=float)
    if a.size == 0:
        a = a.reshape(0, 3, 3)
    if a.ndim == 2 and a.shape == (3, 3):
        a = a[None]
    if a.ndim != 3 or a.shape[-2:] != (3, 3):
        raise ValueError(f"expected a stack of 3x3 rotations, got shape {np.shape(samples)}")
    if not allow_empty and len(a) == 0:
        raise EmptyInput("need at least one rotation")
    return a


def _as_index_set(subset, n: int) -> np.ndarray:
    idx = np.unique(np.asarray(subset, dtype=np.int64).reshape(-1))
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise IndexError(f"subset indices must lie in [0, {n}), got range [{idx[0]}, {idx[-1]}]")
    return idx


def tlud_cost_geodesic(center: np.ndarray, samples: np.ndarray, epsilon_g: float) -> float:
    """Sum of geodesic deviations from center, each capped at epsilon_g."""
    Rs = _as_rotation_stack(samples)
    d = so3.geodesic_distance(Rs, np.asarray(center, dtype=float))
    return float(np.minimum(d, epsilon_g).sum())


def tlud_cost_chordal(center: np.ndarray, samples: np.ndarray, epsilon_c: float) -> float:
    """Sum of chordal (Frobenius) deviations from center, each capped at epsilon_c."""
    Rs = _as_rotation_stack(samples)
    d = so3.chordal_distance(Rs, np.asarray(center, dtype=float))
    return float(np.minimum(d, epsilon_c).sum())


def proxy_initialize(
    samples: np.ndarray, epsilon_c: float = 0.5, block_size: int = 256
) -> tuple[int, np.ndarray]:
    """Index and value of the input rotation with the least truncated chordal cost.

    Evaluates all N^2 pairwise chordal distances through a blocked Gram
    product on the row-flattened matrices: for rotations,
    ||Ri - Rj||_F^2 == 6 - 2 * <Ri, Rj>.  That keeps the whole search inside
    plain matrix arithmetic and square roots, which is why it is fast enough
    to run over every candidate.  Blocks accumulate in a fixed order, so the
    result never depends on scheduling; ties resolve to the lowest index.

    Args:
        samples: (N, 3, 3) stack of rotations.
        epsilon_c: chordal truncation threshold.
        block_size: rows of the Gram product evaluated per step (memory knob).

    Returns:
        (index, rotation) of the best candidate.
    """
    Rs = _as_rotation_stack(samples)
    if epsilon_c <= 0.0:
        raise ValueError(f"epsilon_c must be positive, got {epsilon_c}")
    if block_size < 1:
        raise ValueError(f"block_size must be at least 1, got {block_size}")
    n = len(Rs)
    X = np.ascontiguousarray(Rs.reshape(n, 9))
    costs = np.zeros(n)
    for start in range(0, n, block_size):
        g = X[start : start + block_size] @ X.T
        d = np.sqrt(np.clip(6.0 - 2.0 * g, 0.0, None))
        np.minimum(d, epsilon_c, out=d)
        costs += d.sum(axis=0)
    j = int(np.argmin(costs))
    return j, Rs[j].copy()


def select_inliers(center: np.ndarray, samples: np.ndarray, epsilon_c: float = 0.5) -> np.ndarray:
    """Sorted indices of samples within chordal distance epsilon_c of center (inclusive)."""
    Rs = _as_rotation_stack(samples, allow_empty=True)
    if len(Rs) == 0:
        return np.empty(0, dtype=np.int64)
    d = so3.chordal_distance(Rs, np.asarray(center, dtype=float))
    return np.flatnonzero(d <= epsilon_c).astype(np.int64)


def chordal_l2_mean(samples: np.ndarray, subset=None) -> np.ndarray:
    """Rotation nearest (Frobenius) to the sum of the selected samples.

    This is the closed-form minimizer of sum ||Ri - Q||_F^2 over rotations Q.

    Raises:
        EmptySubset: when the subset selects nothing.
        so3.DegenerateMatrix: when the sum has no unique nearest rotation.
    """
    Rs = _as_rotation_stack(samples, allow_empty=True)
    idx = np.arange(len(Rs)) if subset is None else _as_index_set(subset, len(Rs))
    if idx.size == 0:
        raise EmptySubset("cannot average an empty subset")
    return so3.project_to_so3(Rs[idx].sum(axis=0))


def weiszfeld_geodesic_l1(
    samples: np.ndarray,
    subset,
    seed: np.ndarray,
    delta: float = 0.001,
    it_max: int = 10,
) -> AveragingResult:
    """Iteratively reweighted geodesic median of samples[subset], from seed.

    Each iteration lifts the subset into the tangent space at the current
    estimate, takes the inverse-distance-weighted mean of the lifted vectors,
    and moves along it:

        v_i = log(R_i @ R.T),  step = sum(v_i/||v_i||) / sum(1/||v_i||),
        R <- exp(step) @ R

    stopping once ||step|| < delta or after it_max iterations.  Samples
    closer than COINCIDENT_TOL to the iterate sit out that iteration's
    weights; when all of them coincide the iterate is already the median and
    the loop records a zero step and stops.
    """
    Rs = _as_rotation_stack(samples)
    idx = _as_index_set(subset, len(Rs))
    if idx.size == 0:
        raise EmptySubset("cannot refine over an empty subset")
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    if it_max < 1:
        raise ValueError(f"it_max must be at least 1, got {it_max}")
    sub = Rs[idx]
    R = np.array(seed, dtype=float)
    vi = so3.log_map(sub @ R.T)
    ni = np.linalg.norm(vi, axis=-1)
    costs = [float(ni.sum())]
    update_norms: list[float] = []
    guard = False
    iterations = 0
    for _ in range(it_max):
        iterations += 1
        active = ni >= COINCIDENT_TOL
        if not np.all(active):
            guard = True
        if not np.any(active):
            update_norms.append(0.0)
            costs.append(costs[-1])
            break
        w = 1.0 / ni[active]
        step = (vi[active] * w[:, None]).sum(axis=0) / w.sum()
        R = so3.exp_map(step) @ R
        step_norm = float(np.linalg.norm(step))
        update_norms.append(step_norm)
        vi = so3.log_map(sub @ R.T)
        ni = np.linalg.norm(vi, axis=-1)
        costs.append(float(ni.sum()))
        if step_norm < delta:
            break
    return AveragingResult(
        estimate=R,
        inliers=idx,
        init_index=None,
        iterations=iterations,
        update_norms=np.asarray(update_norms),
        final_cost=costs[-1],
        cost_history=np.asarray(costs),
        guard_fired=guard,
    )


def geodesic_l1_mean(samples: np.ndarray, delta: float = 0.001, it_max: int = 10) -> AveragingResult:
    """Plain geodesic median of all samples (no outlier handling).

    Seeds from the chordal mean of the whole stack.  Useful as a baseline:
    it is what the robust estimator degenerates to when every sample is kept.
    """
    Rs = _as_rotation_stack(samples)
    seed = chordal_l2_mean(Rs)
    return weiszfeld_geodesic_l1(Rs, np.arange(len(Rs)), seed, delta=delta, it_max=it_max)


def robust_average(samples: np.ndarray, config: TludConfig | None = None) -> AveragingResult:
    """Average a contaminated stack of rotations under the truncated cost.

    Runs proxy initialization over the inputs, keeps the samples within
    config.epsilon_c (chordal) of the winner, seeds from their chordal mean,
    and refines with the geodesic median over that subset.  With
    config.realternate > 0 the select/refine pair is repeated, stopping early
    once the inlier set stops changing.

    Args:
        samples: (N, 3, 3) stack of rotations, N >= 1.
        config: thresholds and iteration limits; defaults to TludConfig().

    Returns:
        AveragingResult with init_index set to the proxy winner.
    """
    cfg = config if config is not None else TludConfig()
    Rs = _as_rotation_stack(samples)
    init_index, init = proxy_initialize(Rs, cfg.epsilon_c)
    inliers = select_inliers(init, Rs, cfg.epsilon_c)
    # the winner is its own inlier at zero distance, so the set is never empty
    assert inliers.size > 0
    seed = chordal_l2_mean(Rs, inliers)
    result = weiszfeld_geodesic_l1(Rs, inliers, seed, cfg.delta, cfg.it_max)
    for _ in range(cfg.realternate):
        refreshed = select_inliers(result.estimate, Rs, cfg.epsilon_c)
        if refreshed.size == 0 or np.array_equal(refreshed, result.inliers):
            break
        seed = chordal_l2_mean(Rs, refreshed)
        result = weiszfeld_geodesic_l1(Rs, refreshed, seed, cfg.delta, cfg.it_max)
    return replace(result, init_index=init_index)
