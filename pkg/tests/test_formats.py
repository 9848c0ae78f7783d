import itertools

import numpy as np
import pytest

from errors import CapacityError, DimensionError
from tensors.formats import (
    CpTensor,
    DenseTensor,
    Shape,
    TtTensor,
    densify,
    densify_cp,
    densify_tt,
)

# --- Tests for Shape ---


def test_shape_reports_order_and_size():
    """Tests the derived order and element count of a shape."""
    shape = Shape((2, 3, 4))
    assert shape.order == 3
    assert shape.total_elements == 24
    assert str(shape) == "2x3x4"


@pytest.mark.parametrize("dims", [(), (0, 3), (2, -1)])
def test_shape_rejects_invalid_dims(dims):
    """Tests that empty shapes and non-positive mode sizes are refused."""
    with pytest.raises(DimensionError):
        Shape(dims)


def test_shape_rejects_unaddressable_size():
    """Tests that an element count past the platform range is a capacity error."""
    with pytest.raises(CapacityError):
        Shape((2**40, 2**40))


# --- Tests for construction invariants ---


def test_dense_rejects_non_finite_entries():
    """Tests that NaN and Inf entries fail construction."""
    with pytest.raises(DimensionError):
        DenseTensor(Shape((2,)), [1.0, np.nan])
    with pytest.raises(DimensionError):
        DenseTensor(Shape((2,)), [np.inf, 0.0])


def test_dense_values_are_read_only():
    """Tests that tensors cannot be mutated after construction."""
    x = DenseTensor.from_array([[1.0, -7.0], [3.0, 0.0]])
    assert x.max_abs == 7.0
    with pytest.raises(ValueError):
        x.values[0, 0] = 5.0


def test_cp_rejects_wrong_factor_shape():
    """Tests that a factor with the wrong number of rows fails."""
    with pytest.raises(DimensionError):
        CpTensor(Shape((2, 3)), 2, (np.ones((2, 2)), np.ones((2, 2))))


def test_tt_rejects_wrong_boundary_ranks():
    """Tests that TT cores must have unit ranks at both ends."""
    cores = (np.ones((2, 2, 2)), np.ones((2, 2, 1)))
    with pytest.raises(DimensionError):
        TtTensor(Shape((2, 2)), 2, cores)


# --- Tests for densify_cp ---


def test_densify_cp_rank_one_outer_product():
    """Tests the rank-1 outer product of [1, 1] and [1, -1]."""
    p = CpTensor(Shape((2, 2)), 1, (np.array([[1.0], [1.0]]), np.array([[1.0], [-1.0]])))
    assert np.array_equal(densify_cp(p).values, [[1.0, -1.0], [1.0, -1.0]])


def test_densify_cp_zero_scale():
    """Tests that a zero scale yields the zero tensor."""
    rng = np.random.default_rng(0)
    p = CpTensor(Shape((3, 2)), 2, (rng.normal(size=(3, 2)), rng.normal(size=(2, 2))), 0.0)
    assert not np.any(densify_cp(p).values)


def test_densify_cp_matches_elementwise_sum():
    """Tests densification against an explicit loop over r and every index tuple."""
    rng = np.random.default_rng(7)
    factors = tuple(rng.choice([-1.0, 1.0], size=(2, 2)) for _ in range(3))
    p = CpTensor(Shape((2, 2, 2)), 2, factors, 0.5)
    expected = np.zeros((2, 2, 2))
    for r, i, j, k in itertools.product(range(2), repeat=4):
        expected[i, j, k] += factors[0][i, r] * factors[1][j, r] * factors[2][k, r]
    assert np.allclose(densify_cp(p).values, 0.5 * expected, rtol=0, atol=1e-14)


def test_densify_refuses_unmaterializable_tensor():
    """Tests the capacity error for a CP tensor too large to densify."""
    dims = (2**20,) * 3
    p = CpTensor(Shape(dims), 1, tuple(np.ones((d, 1)) for d in dims))
    with pytest.raises(CapacityError):
        densify(p)


# --- Tests for densify_tt ---


def test_densify_tt_rank_one_product():
    """Tests the rank-1 TT with cores [1, 2] and [3, 4]."""
    cores = (np.array([1.0, 2.0]).reshape(1, 2, 1), np.array([3.0, 4.0]).reshape(1, 2, 1))
    t = TtTensor(Shape((2, 2)), 1, cores)
    assert np.array_equal(densify_tt(t).values, [[3.0, 4.0], [6.0, 8.0]])


def test_densify_tt_zero_scale():
    """Tests that a zero scale yields the zero tensor."""
    cores = (np.ones((1, 2, 2)), np.ones((2, 2, 1)))
    assert not np.any(densify_tt(TtTensor(Shape((2, 2)), 2, cores, 0.0)).values)


def test_densify_tt_matches_slice_chain():
    """Tests densification against a per-index matrix-chain product."""
    rng = np.random.default_rng(11)
    cores = (rng.normal(size=(1, 2, 2)), rng.normal(size=(2, 2, 2)), rng.normal(size=(2, 2, 1)))
    t = TtTensor(Shape((2, 2, 2)), 2, cores, 0.25)
    dense = densify_tt(t).values
    for idx in itertools.product(range(2), repeat=3):
        chain = cores[0][:, idx[0], :] @ cores[1][:, idx[1], :] @ cores[2][:, idx[2], :]
        assert dense[idx] == pytest.approx(0.25 * chain[0, 0], abs=1e-13)


def test_densify_passes_dense_through():
    """Tests that densify returns a dense tensor unchanged."""
    x = DenseTensor.from_array([1.0, 2.0])
    assert densify(x) is x
