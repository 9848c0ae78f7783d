import math

import pytest

from errors import DimensionError, ParameterError
from hashing.families import hash_k
from validation.generators import planted_angle_pair, planted_distance_pair, random_dense
from validation.montecarlo import (
    CollisionReport,
    empirical_collision,
    estimate_angle,
    joint_agreement,
    normality_test,
    projection_moments,
)

SHAPE = (8, 8, 8)


# --- Tests for empirical_collision ---


@pytest.mark.parametrize("kind,w", [("cp-e2lsh", 1.0), ("tt-srp", None), ("naive-e2lsh", 2.0)])
def test_self_collision_is_certain(kind, w):
    """Tests that a tensor always collides with itself."""
    x = random_dense((3, 3, 3), 1)
    report = empirical_collision(kind, x, x, 2, w, 200, 4)
    assert report.empirical_rate == 1.0
    assert report.analytic_rate == pytest.approx(1.0)
    assert report.passed


def test_srp_rate_matches_angle_law():
    """Tests CP-SRP at theta = pi/3 over 3000 trials within 5 sigma."""
    x, y = planted_angle_pair(SHAPE, math.pi / 3, 2)
    report = empirical_collision("cp-srp", x, y, 4, None, 3000, 10)
    assert report.analytic_rate == pytest.approx(2.0 / 3.0)
    assert report.deviation <= 5.0 * report.sigma
    assert not report.widened


def test_e2lsh_rate_matches_quadrature():
    """Tests TT-E2LSH at ||x - y|| = w over 3000 trials within 4 sigma."""
    x, y = planted_distance_pair(SHAPE, 1.5, 3)
    report = empirical_collision("tt-e2lsh", x, y, 3, 1.5, 3000, 11)
    assert report.analytic_rate == pytest.approx(0.3687, abs=1e-4)
    assert report.deviation <= 4.0 * report.sigma


def test_collision_rate_is_symmetric():
    """Tests that swapping x and y gives the same empirical rate."""
    x, y = planted_distance_pair((4, 4, 4), 2.0, 5)
    forward = empirical_collision("cp-e2lsh", x, y, 2, 3.0, 300, 7)
    backward = empirical_collision("cp-e2lsh", y, x, 2, 3.0, 300, 7)
    assert forward.empirical_rate == backward.empirical_rate


def test_small_trial_counts_are_flagged(caplog):
    """Tests that fewer than 1000 trials widen the band and log a warning."""
    x, y = planted_angle_pair((4, 4), 1.0, 1)
    with caplog.at_level("WARNING"):
        report = empirical_collision("tt-srp", x, y, 2, None, 50, 1)
    assert report.widened
    assert "widened" in caplog.text


def test_empirical_collision_preconditions():
    """Tests trial count, width and shape checks."""
    x = random_dense((3, 3), 1)
    with pytest.raises(ParameterError):
        empirical_collision("cp-srp", x, x, 1, None, 0, 1)
    with pytest.raises(ParameterError):
        empirical_collision("cp-e2lsh", x, x, 1, None, 10, 1)
    with pytest.raises(DimensionError):
        empirical_collision("cp-srp", x, random_dense((3, 4), 2), 1, None, 10, 1)


def test_joint_agreement():
    """Tests the combined band between two reports."""
    a = CollisionReport({}, 10000, 0.50, 0.5, 0.015)
    b = CollisionReport({}, 10000, 0.51, 0.5, 0.015)
    c = CollisionReport({}, 10000, 0.56, 0.5, 0.015)
    assert joint_agreement(a, b)
    assert not joint_agreement(a, c)


# --- Tests for moments and normality ---


@pytest.mark.parametrize("kind,rank", [("cp", 4), ("tt", 3)])
def test_projection_moments(kind, rank):
    """Tests mean 0, variance ||x||^2 and covariance <x, y> within their bands."""
    x, y = planted_angle_pair((4, 4, 4), math.pi / 4, 6, norm_x=2.0, norm_y=1.5)
    report = projection_moments(x, y, kind, rank, 6000, 13)
    assert report.check("variance").target == pytest.approx(4.0)
    assert report.check("covariance").target == pytest.approx(3.0 * math.cos(math.pi / 4))
    for name in ("mean", "variance", "covariance"):
        check = report.check(name)
        assert abs(check.estimate - check.target) <= 4.0 / 3.0 * check.band_3sigma


def test_projection_moments_requires_enough_samples():
    """Tests the minimum sample count."""
    with pytest.raises(ParameterError):
        projection_moments(random_dense((2, 2), 1), samples=999)


def test_normality_at_tiny_shape_is_flagged():
    """Tests that a 2x2 shape reports an unreached asymptotic regime."""
    report = normality_test(random_dense((2, 2), 3), "cp", 1, 10000, 5)
    assert not report.asymptotic_regime_reached
    assert "asymptotic" in report.label
    # A rank-1 Rademacher projection of 4 entries takes few values.
    assert not report.passed


@pytest.mark.slow
def test_normality_at_large_shape():
    """Tests the KS statistic at 16^4 with TT rank 3."""
    x = random_dense((16, 16, 16, 16), 8)
    report = normality_test(x, "tt", 3, 20000, 9)
    assert report.passed


def test_normality_rejects_zero_tensor():
    """Tests that a zero input cannot be standardized."""
    x = random_dense((3, 3), 1).scaled(0.0)
    with pytest.raises(ParameterError):
        normality_test(x, "cp", 1, 10000, 1)


# --- Tests for estimate_angle ---


def test_estimate_angle_from_codes():
    """Tests the SRP angle estimate on a pi/6 pair with 4096 bits."""
    x, y = planted_angle_pair((6, 6, 6), math.pi / 6, 4)
    a = hash_k("cp-srp", x.shape, 4, 4096, None, 17, x)
    b = hash_k("cp-srp", x.shape, 4, 4096, None, 17, y)
    assert estimate_angle(a, b) == pytest.approx(math.pi / 6, abs=0.07)
