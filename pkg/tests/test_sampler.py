import numpy as np
import pytest
from scipy import stats

from errors import DimensionError, ParameterError
from projections.sampler import (
    Decomposition,
    Distribution,
    SamplerConfig,
    project,
    projection_parameter_count,
    sample,
    sample_cp,
    sample_tt,
)
from tensors.formats import DenseTensor
from tensors.kernels import inner
from validation.generators import random_dense


def _cfg(**overrides):
    values = dict(shape=(2, 2, 2), rank=2, decomposition=Decomposition.CP, seed=1)
    values.update(overrides)
    return SamplerConfig(**values)


# --- Tests for scales and structure ---


@pytest.mark.parametrize("rank,scale", [(1, 1.0), (4, 0.5)])
def test_cp_scale(rank, scale):
    """Tests that CP projections carry 1/sqrt(R)."""
    assert sample_cp(_cfg(rank=rank)).scale == pytest.approx(scale)


@pytest.mark.parametrize("shape,rank,scale", [((3, 3), 1, 1.0), ((2, 2, 2), 4, 0.25)])
def test_tt_scale(shape, rank, scale):
    """Tests that TT projections carry 1/sqrt(R^(N-1))."""
    t = sample_tt(_cfg(shape=shape, rank=rank, decomposition=Decomposition.TT))
    assert t.scale == pytest.approx(scale)
    assert t.cores[0].shape[0] == 1 and t.cores[-1].shape[-1] == 1


def test_rademacher_entries_are_signs():
    """Tests that every Rademacher entry is exactly -1 or +1."""
    p = sample_cp(_cfg(shape=(5, 6, 7), rank=3))
    for factor in p.factors:
        assert set(np.unique(factor)) <= {-1.0, 1.0}


def test_wrong_decomposition_is_rejected():
    """Tests that each sampler insists on its own decomposition."""
    with pytest.raises(ParameterError):
        sample_tt(_cfg())
    with pytest.raises(ParameterError):
        sample_cp(_cfg(decomposition=Decomposition.TT))


@pytest.mark.parametrize("overrides", [{"rank": 0}, {"seed": -1}, {"component_index": -2}])
def test_invalid_config_is_rejected(overrides):
    """Tests rank, seed and component index preconditions."""
    with pytest.raises(ParameterError):
        _cfg(**overrides)


# --- Tests for determinism and independence ---


@pytest.mark.parametrize("decomposition", [Decomposition.CP, Decomposition.TT])
def test_identical_configs_reproduce_identical_tensors(decomposition):
    """Tests bit-identical tensors from identical configs."""
    cfg = _cfg(shape=(4, 3, 5), rank=3, decomposition=decomposition, seed=99, component_index=7)
    a, b = sample(cfg), sample(cfg)
    parts_a = a.factors if decomposition == Decomposition.CP else a.cores
    parts_b = b.factors if decomposition == Decomposition.CP else b.cores
    assert all(x.tobytes() == y.tobytes() for x, y in zip(parts_a, parts_b))


def test_component_indices_give_different_tensors():
    """Tests that distinct component indices draw from distinct streams."""
    cfg = _cfg(shape=(8, 8), rank=4)
    a, b = sample(cfg.for_component(0)), sample(cfg.for_component(1))
    assert not np.array_equal(a.factors[0], b.factors[0])


def test_components_are_uncorrelated():
    """Tests independence of P_0 and P_1 entries with a chi-square contingency test."""
    table = np.zeros((2, 2))
    for seed in range(5000):
        cfg = _cfg(seed=seed)
        first = sample(cfg.for_component(0)).factors[0].ravel() > 0
        second = sample(cfg.for_component(1)).factors[0].ravel() > 0
        np.add.at(table, (first.astype(int), second.astype(int)), 1)
    _, p_value, _, _ = stats.chi2_contingency(table)
    assert p_value > 0.001


def test_rademacher_entry_mean_is_zero():
    """Tests the empirical mean of Rademacher entries over many components."""
    cfg = _cfg()
    entries = np.concatenate(
        [np.concatenate([f.ravel() for f in sample(cfg.for_component(k)).factors]) for k in range(2000)]
    )
    assert abs(entries.mean()) < 0.03


def test_gaussian_entry_variance_is_one():
    """Tests the empirical variance of Gaussian TT core entries."""
    cfg = _cfg(decomposition=Decomposition.TT, distribution=Distribution.GAUSSIAN)
    entries = np.concatenate(
        [np.concatenate([g.ravel() for g in sample(cfg.for_component(k)).cores]) for k in range(2000)]
    )
    assert entries.var() == pytest.approx(1.0, abs=0.04)


# --- Tests for project ---


def test_project_zero_tensor():
    """Tests that the zero tensor projects to zeros."""
    zero = DenseTensor.from_array(np.zeros((2, 2, 2)))
    assert not np.any(project(zero, _cfg(), 5))


def test_project_single_component():
    """Tests that K=1 is exactly <P_0, x>."""
    x = random_dense((2, 2, 2), 3)
    cfg = _cfg()
    assert project(x, cfg, 1)[0] == inner(sample(cfg.for_component(0)), x)


def test_project_preserves_squared_norm_in_expectation():
    """Tests E||f(x)||^2 = ||x||^2 for a unit-norm x averaged over seeds."""
    x = random_dense((4, 4, 4), 4)
    x = x.scaled(1.0 / np.sqrt(inner(x, x)))
    norms = [np.sum(project(x, _cfg(shape=(4, 4, 4), rank=3, seed=s), 8) ** 2) for s in range(4000)]
    assert np.mean(norms) == pytest.approx(1.0, abs=0.06)


def test_project_rejects_shape_mismatch():
    """Tests the shape precondition of project."""
    with pytest.raises(DimensionError):
        project(random_dense((2, 2), 1), _cfg(), 2)


def test_projection_parameter_counts():
    """Tests stored entries for CP, TT and naive projections."""
    assert projection_parameter_count((4, 5, 6), 3, "cp") == 45
    assert projection_parameter_count((4, 5, 6), 3, "tt") == 4 * 3 + 3 * 5 * 3 + 3 * 6
    assert projection_parameter_count((4, 5, 6), 3, "naive") == 120
