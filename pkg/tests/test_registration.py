import math
import os

import numpy as np
import pytest

from rotavg import so3
from rotavg.fileio import load_cloud
from rotavg.registration import (
    AttemptCapExceeded,
    CollinearPoints,
    DegenerateTriangle,
    RegistrationScenario,
    TooFewPoints,
    align_three_points,
    corrupt_cloud,
    harvest_hypotheses,
    make_scenario,
    normalize_cloud,
    register_rotation,
    triangle_ratio_check,
)

DATA = os.path.join(os.path.dirname(__file__), "..", "data", "standin_cloud.xyz")


def blob(rng, n=500):
    return rng.normal(size=(n, 3)) * np.array([1.0, 0.7, 0.4])


# --------------------------------------------------------------------------
# scenario


def test_scenario_validation():
    make_scenario(seed=0, outlier_fraction=0.5)  # fine
    with pytest.raises(ValueError):
        make_scenario(seed=0, outlier_fraction=0.99)
    with pytest.raises(ValueError):
        make_scenario(seed=0, outlier_fraction=-0.1)
    with pytest.raises(ValueError):
        make_scenario(seed=0, outlier_fraction=0.5, scale=1.0)
    with pytest.raises(ValueError):
        make_scenario(seed=0, outlier_fraction=0.5, scale=5.0)
    with pytest.raises(ValueError):
        make_scenario(seed=0, outlier_fraction=0.5, noise_sigma=-1.0)
    with pytest.raises(ValueError):
        make_scenario(seed=0, outlier_fraction=0.5, n_hypotheses=0)
    with pytest.raises(ValueError):
        make_scenario(seed=-3, outlier_fraction=0.5)
    with pytest.raises(ValueError):
        RegistrationScenario(
            scale=2.0, rotation=np.eye(3) * 2.0, translation=np.zeros(3)
        )


def test_make_scenario_draws_are_deterministic_and_in_range():
    a = make_scenario(seed=17, outlier_fraction=0.3)
    b = make_scenario(seed=17, outlier_fraction=0.3)
    assert a.scale == b.scale
    assert np.array_equal(a.rotation, b.rotation)
    assert np.array_equal(a.translation, b.translation)
    assert 1.0 < a.scale < 5.0
    assert so3.is_rotation(a.rotation)
    assert (np.abs(a.translation) <= 1.0).all()
    c = make_scenario(seed=18, outlier_fraction=0.3)
    assert c.scale != a.scale


# --------------------------------------------------------------------------
# normalize


def test_normalize_cloud_fits_unit_cube():
    rng = np.random.default_rng(70)
    for _ in range(5):
        cloud = blob(rng) * rng.uniform(0.1, 40.0) + rng.normal(size=3) * 10.0
        out = normalize_cloud(cloud, 200, rng)
        assert out.shape == (200, 3)
        lo, hi = out.min(axis=0), out.max(axis=0)
        assert (lo >= -0.5 - 1e-12).all() and (hi <= 0.5 + 1e-12).all()
        assert abs((hi - lo).max() - 1.0) < 1e-12


def test_normalize_cloud_preserves_shape():
    # squeezed to the cube, relative geometry survives: pairwise distance
    # ratios are untouched by a similarity transform
    rng = np.random.default_rng(71)
    cloud = blob(rng, 60)
    out = normalize_cloud(cloud, 60, rng)
    # same point multiset up to scale+shift: sort both by distance from
    # their own centroid and compare ratio constancy
    d_in = np.linalg.norm(cloud - cloud.mean(axis=0), axis=1)
    d_out = np.linalg.norm(out - out.mean(axis=0), axis=1)
    ratio = np.sort(d_out)[1:] / np.sort(d_in)[1:]
    assert ratio.std() < 1e-9


def test_normalize_cloud_errors():
    rng = np.random.default_rng(72)
    with pytest.raises(TooFewPoints):
        normalize_cloud(blob(rng, 10), 11, rng)
    with pytest.raises(ValueError):
        normalize_cloud(np.zeros((5, 3)), 5, rng)  # zero extent


# --------------------------------------------------------------------------
# corrupt


def test_corrupt_cloud_pure_similarity():
    rng = np.random.default_rng(73)
    src = normalize_cloud(blob(rng), 300, rng)
    scen = make_scenario(seed=3, outlier_fraction=0.0, noise_sigma=0.0)
    dst = corrupt_cloud(src, scen)
    expected = scen.scale * (src @ scen.rotation.T) + scen.translation
    assert np.allclose(dst, expected, atol=1e-12)


def test_corrupt_cloud_replacement_count_and_ball():
    rng = np.random.default_rng(74)
    src = normalize_cloud(blob(rng, 2000), 1000, rng)
    scen = make_scenario(seed=4, outlier_fraction=0.96, noise_sigma=0.0)
    dst = corrupt_cloud(src, scen)
    expected = scen.scale * (src @ scen.rotation.T) + scen.translation
    moved = ~np.isclose(dst, expected, atol=1e-9).all(axis=1)
    assert moved.sum() == round(0.96 * 1000) == 960
    radius = math.sqrt(3.0) * scen.scale / 2.0
    center = (expected + 0.0).mean(axis=0)  # noise_sigma = 0: centroid is exact
    dist = np.linalg.norm(dst[moved] - center, axis=1)
    assert (dist <= radius + 1e-9).all()
    # the ball is actually used, not just its center
    assert dist.max() > 0.8 * radius and dist.min() < 0.4 * radius


def test_corrupt_cloud_determinism():
    rng = np.random.default_rng(75)
    src = normalize_cloud(blob(rng), 200, rng)
    scen = make_scenario(seed=5, outlier_fraction=0.5)
    assert np.array_equal(corrupt_cloud(src, scen), corrupt_cloud(src, scen))


def test_corrupt_cloud_needs_full_transform():
    scen = RegistrationScenario(scale=None, rotation=None, translation=None)
    with pytest.raises(ValueError):
        corrupt_cloud(np.zeros((4, 3)), scen)


# --------------------------------------------------------------------------
# triangle filter


def test_triangle_ratio_check_similar_and_stretched():
    rng = np.random.default_rng(76)
    src = rng.normal(size=(3, 3))
    # scaling is a similarity: ratios agree to rounding error
    assert triangle_ratio_check(src, 3.0 * src, tol=1e-12)
    R = so3.exp_map(rng.normal(size=3))
    assert triangle_ratio_check(src, src @ R.T, tol=1e-9)
    # stretch one vertex away: side ratios disagree by far more than 10%
    bad = src.copy()
    bad[0] = bad[1] + 2.0 * (bad[0] - bad[1])
    assert not triangle_ratio_check(src, bad, tol=0.1)


def test_triangle_ratio_check_degenerate():
    src = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    dst = src.copy()
    dst[1] = dst[0]  # zero-length side
    with pytest.raises(DegenerateTriangle):
        triangle_ratio_check(src, dst)
    with pytest.raises(DegenerateTriangle):
        triangle_ratio_check(dst, src)


def test_triangle_filter_accepts_inlier_triples_under_noise():
    # corresponding triangles with sides > 0.2 in a sigma = 0.01 scenario
    # pass the default tolerance almost always
    rng = np.random.default_rng(77)
    src = normalize_cloud(load_cloud(DATA), 1000, rng)
    scen = make_scenario(seed=6, outlier_fraction=0.0, noise_sigma=0.01)
    dst = corrupt_cloud(src, scen)
    accepted = tried = 0
    while tried < 500:
        idx = rng.choice(len(src), size=3, replace=False)
        sides = np.linalg.norm(src[idx] - np.roll(src[idx], 1, axis=0), axis=1)
        if sides.min() < 0.2:
            continue
        tried += 1
        accepted += triangle_ratio_check(src[idx], dst[idx], tol=0.1)
    assert accepted / tried > 0.90


# --------------------------------------------------------------------------
# three-point alignment


def test_align_three_points_exact():
    rng = np.random.default_rng(78)
    from _oracles import horn_rotation

    for _ in range(50):
        src = rng.normal(size=(3, 3))
        R = so3.exp_map(rng.normal(size=3))
        dst = src @ R.T
        est = align_three_points(src, dst)
        assert np.allclose(est, R, atol=1e-9)
        # scale and translation on either side must not matter
        est2 = align_three_points(1.7 * src - 4.0, 3.0 * dst + np.array([1.0, -2.0, 0.5]))
        assert np.allclose(est2, R, atol=1e-9)
    # oracle self-check on exact data, then the library against it
    src = rng.normal(size=(3, 3))
    R = so3.exp_map(rng.normal(size=3))
    centered = src - src.mean(axis=0)
    assert np.allclose(horn_rotation(centered, centered @ R.T), R, atol=1e-9)


def test_align_three_points_matches_horn_oracle_under_noise():
    rng = np.random.default_rng(79)
    from _oracles import horn_rotation

    for _ in range(30):
        src = rng.normal(size=(3, 3))
        R = so3.exp_map(rng.normal(size=3))
        dst = src @ R.T + rng.normal(0.0, 0.01, size=(3, 3))
        est = align_three_points(src, dst)
        # feed the oracle the same centered/RMS-normalized points the
        # library sees, so both solve the identical orientation problem
        sc = src - src.mean(axis=0)
        dc = dst - dst.mean(axis=0)
        sc /= math.sqrt((sc * sc).sum() / 3.0)
        dc /= math.sqrt((dc * dc).sum() / 3.0)
        oracle = horn_rotation(sc, dc)
        assert np.allclose(est, oracle, atol=1e-6)


def test_align_three_points_collinear():
    src = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0]])
    with pytest.raises(CollinearPoints):
        align_three_points(src, src)
    same = np.ones((3, 3))
    with pytest.raises(CollinearPoints):
        align_three_points(same, same)


# --------------------------------------------------------------------------
# harvesting


def test_harvest_clean_scenario_reproduces_truth():
    rng = np.random.default_rng(80)
    src = normalize_cloud(load_cloud(DATA), 400, rng)
    scen = make_scenario(seed=8, outlier_fraction=0.0, noise_sigma=0.0, n_hypotheses=200)
    dst = corrupt_cloud(src, scen)
    hyps = harvest_hypotheses(src, dst, scen)
    assert hyps.shape == (200, 3, 3)
    assert so3.is_rotation(hyps).all()
    # compare entries, not arccos distance: the metric bottoms out near
    # sqrt(eps) for matrices that agree to rounding error
    assert np.allclose(hyps, scen.rotation, atol=1e-9)


def test_harvest_deterministic_and_worker_invariant():
    rng = np.random.default_rng(81)
    src = normalize_cloud(load_cloud(DATA), 500, rng)
    scen = make_scenario(seed=9, outlier_fraction=0.8, n_hypotheses=300)
    dst = corrupt_cloud(src, scen)
    a = harvest_hypotheses(src, dst, scen)
    b = harvest_hypotheses(src, dst, scen)
    assert np.array_equal(a, b)
    c = harvest_hypotheses(src, dst, scen, n_workers=4)
    assert np.array_equal(a, c)
    d = harvest_hypotheses(src, dst, scen, batch_size=777)
    assert d.shape == a.shape  # different batching, same count contract


def test_harvest_attempt_cap():
    rng = np.random.default_rng(82)
    src = normalize_cloud(load_cloud(DATA), 300, rng)
    scen = make_scenario(
        seed=10, outlier_fraction=0.9, noise_sigma=0.05, n_hypotheses=500, ratio_tolerance=0.0
    )
    dst = corrupt_cloud(src, scen)
    # zero tolerance on noisy data accepts (almost) nothing
    with pytest.raises(AttemptCapExceeded):
        harvest_hypotheses(src, dst, scen, attempt_cap=20_000)


def test_harvest_filter_enriches_inliers():
    rng = np.random.default_rng(83)
    src = normalize_cloud(load_cloud(DATA), 1000, rng)
    scen = make_scenario(seed=11, outlier_fraction=0.9, n_hypotheses=400)
    dst = corrupt_cloud(src, scen)
    filtered = harvest_hypotheses(src, dst, scen)
    unfiltered_scen = make_scenario(
        seed=11, outlier_fraction=0.9, n_hypotheses=400, ratio_tolerance=math.inf
    )
    unfiltered = harvest_hypotheses(src, dst, unfiltered_scen)
    good = lambda h: float(np.mean(so3.geodesic_distance(h, scen.rotation) < 0.36))
    assert good(filtered) > good(unfiltered)
    assert good(filtered) > 0.1**3  # far above the raw all-inlier-triple rate


def test_harvest_input_validation():
    rng = np.random.default_rng(84)
    cloud = blob(rng, 50)
    scen = make_scenario(seed=12, outlier_fraction=0.0)
    with pytest.raises(ValueError):
        harvest_hypotheses(cloud, cloud[:20], scen)
    with pytest.raises(TooFewPoints):
        harvest_hypotheses(cloud[:2], cloud[:2], scen)
    with pytest.raises(ValueError):
        harvest_hypotheses(cloud, cloud, scen, attempt_cap=0)


# --------------------------------------------------------------------------
# end-to-end


def test_register_rotation_clean_is_exact():
    rng = np.random.default_rng(85)
    src = normalize_cloud(load_cloud(DATA), 400, rng)
    scen = make_scenario(seed=13, outlier_fraction=0.0, noise_sigma=0.0, n_hypotheses=200)
    dst = corrupt_cloud(src, scen)
    res = register_rotation(src, dst, scen)
    assert so3.geodesic_distance(res.estimate, scen.rotation) < 1e-6


def test_register_rotation_90pct_outliers():
    rng = np.random.default_rng(86)
    src = normalize_cloud(load_cloud(DATA), 1000, rng)
    scen = make_scenario(seed=14, outlier_fraction=0.9, n_hypotheses=2000)
    dst = corrupt_cloud(src, scen)
    res = register_rotation(src, dst, scen)
    err_deg = math.degrees(so3.geodesic_distance(res.estimate, scen.rotation))
    assert err_deg < 3.0
