"""Generate the committed 100-rotation fixture used by the CLI tests.

One synthetic trial: 10 inliers at sigma = 0.5 degrees around a planted
rotation plus 90 uniformly oriented outliers, shuffled.  The fixture and
its planted truth are committed under tests/data/ so the CLI tests can
assert the recovered estimate lands within 0.5 degrees of the truth.

Deterministic: re-running reproduces the committed files byte for byte.
"""

from __future__ import annotations

import os

from rotavg.bench import BenchScenario, generate_trial
from rotavg.fileio import write_rotations

SCENARIO = BenchScenario(
    n_samples=100, outlier_ratio=0.9, sigma_deg=0.5, n_trials=1, seed=31
)


def main() -> None:
    samples, truth = generate_trial(SCENARIO, 0)
    here = os.path.dirname(os.path.abspath(__file__))
    data = os.path.normpath(os.path.join(here, "..", "tests", "data"))
    os.makedirs(data, exist_ok=True)
    write_rotations(
        os.path.join(data, "rotations_100.txt"),
        samples,
        header="100 rotations: 10 inliers (sigma 0.5 deg) + 90 outliers, shuffled\n"
        "regenerate with scripts/make_rotation_fixture.py",
    )
    write_rotations(
        os.path.join(data, "rotations_100_truth.txt"),
        truth,
        header="planted truth for rotations_100.txt",
    )
    print(f"wrote fixture ({len(samples)} rotations) and truth to {data}")


if __name__ == "__main__":
    main()
