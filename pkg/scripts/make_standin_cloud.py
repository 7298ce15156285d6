"""Generate the committed stand-in point cloud: a trefoil-knot tube.

The registration tests and demo want a rigid, asymmetric, fully offline
shape.  When the bunny scan is unavailable (see fetch_bunny.py), this tube
around a trefoil knot stands in: it has no rotational or mirror symmetry,
so the recovered rotation is unambiguous.

Writes data/standin_cloud.xyz (one "x y z" line per point).  Deterministic:
re-running reproduces the committed file byte for byte.
"""

from __future__ import annotations

import os

import numpy as np

N_POINTS = 2500
TUBE_RADIUS = 0.35
SEED = 1905


def trefoil(t: np.ndarray) -> np.ndarray:
    """Points of the trefoil knot curve at parameters t."""
    return np.stack(
        [
            np.sin(t) + 2.0 * np.sin(2.0 * t),
            np.cos(t) - 2.0 * np.cos(2.0 * t),
            -np.sin(3.0 * t),
        ],
        axis=-1,
    )


def main() -> None:
    rng = np.random.default_rng(SEED)
    t = rng.uniform(0.0, 2.0 * np.pi, N_POINTS)
    phi = rng.uniform(0.0, 2.0 * np.pi, N_POINTS)

    center = trefoil(t)
    # Frame the curve: unit tangent from a finite difference, then any two
    # perpendicular directions spanning the tube cross-section.
    h = 1e-4
    tangent = trefoil(t + h) - trefoil(t - h)
    tangent /= np.linalg.norm(tangent, axis=1, keepdims=True)
    helper = np.zeros_like(tangent)
    helper[:, 2] = 1.0
    side = np.cross(tangent, helper)
    side /= np.linalg.norm(side, axis=1, keepdims=True)
    up = np.cross(tangent, side)

    points = center + TUBE_RADIUS * (
        np.cos(phi)[:, None] * side + np.sin(phi)[:, None] * up
    )

    out = os.path.join(os.path.dirname(__file__), "..", "data", "standin_cloud.xyz")
    out = os.path.normpath(out)
    os.makedirs(os.path.dirname(out), exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("# trefoil-knot tube stand-in cloud (see scripts/make_standin_cloud.py)\n")
        for x, y, z in points:
            fh.write(f"{x:.17g} {y:.17g} {z:.17g}\n")
    print(f"wrote {len(points)} points to {out}")


if __name__ == "__main__":
    main()
