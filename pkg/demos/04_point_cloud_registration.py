"""Recovering a rotation between point clouds drowning in outliers.

Takes the bundled stand-in scan, applies a hidden similarity transform,
replaces 90% of the transformed points with junk, and recovers the rotation
by harvesting three-point hypotheses and robustly averaging them.

Run:  python3 demos/04_point_cloud_registration.py
"""

import os
import time

import numpy as np

from rotavg import so3
from rotavg.fileio import load_cloud
from rotavg.registration import (
    corrupt_cloud,
    harvest_hypotheses,
    make_scenario,
    normalize_cloud,
    register_rotation,
)

CLOUD = os.path.join(os.path.dirname(__file__), "..", "data", "standin_cloud.xyz")


def main() -> None:
    raw = load_cloud(CLOUD)
    rng = np.random.default_rng(0)
    src = normalize_cloud(raw, target_count=1000, rng=rng)
    print(f"loaded {len(raw)} points, downsampled to {len(src)} in the unit cube")

    scen = make_scenario(seed=0, outlier_fraction=0.9, noise_sigma=0.01, n_hypotheses=2000)
    dst = corrupt_cloud(src, scen)
    print(f"hidden transform: scale {scen.scale:.3f}, rotation "
          f"{np.degrees(np.linalg.norm(so3.log_map(scen.rotation))):.1f} deg, "
          f"{scen.outlier_fraction:.0%} of points replaced by junk")

    print("\n== harvest rotation hypotheses from similar triangles ==")
    t0 = time.perf_counter()
    hyps = harvest_hypotheses(src, dst, scen)
    dt = time.perf_counter() - t0
    errs = np.degrees(so3.geodesic_distance(hyps, scen.rotation))
    print(f"{len(hyps)} hypotheses in {dt:.2f}s")
    print(f"hypothesis errors: median {np.median(errs):.1f} deg, "
          f"{np.mean(errs < 20.0):.0%} within 20 deg")
    print("(three random corresponding points are all inliers only ~0.1% of the")
    print(" time at 90% contamination — the triangle similarity filter lifts the")
    print(" usable fraction by two orders of magnitude)")

    print("\n== robustly average the hypothesis set ==")
    res = register_rotation(src, dst, scen)
    err = np.degrees(so3.geodesic_distance(res.estimate, scen.rotation))
    print(f"recovered rotation error: {err:.3f} deg "
          f"({len(res.inliers)} of {len(hyps)} hypotheses kept)")

    print("\n== same pipeline, 96% outliers ==")
    scen96 = make_scenario(seed=1, outlier_fraction=0.96, noise_sigma=0.01, n_hypotheses=2000)
    dst96 = corrupt_cloud(src, scen96)
    res96 = register_rotation(src, dst96, scen96)
    err96 = np.degrees(so3.geodesic_distance(res96.estimate, scen96.rotation))
    print(f"recovered rotation error: {err96:.3f} deg")


if __name__ == "__main__":
    main()
