"""
Tensor formats: dense arrays plus the CP and TT factored representations.

All tensors are immutable once built. Arrays are coerced to float64,
C-ordered (last index fastest) and flagged read-only, so instances can be
shared between threads without copying.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from errors import CapacityError, DimensionError

# Largest element count a single array may hold on this platform.
MAX_ELEMENTS = np.iinfo(np.intp).max


def _frozen(array, expected_shape: tuple[int, ...], what: str) -> np.ndarray:
    values = np.array(array, dtype=np.float64, order="C", copy=True)
    if values.shape != expected_shape:
        raise DimensionError(
            f"{what} has shape {values.shape}, expected {expected_shape}"
        )
    if not np.all(np.isfinite(values)):
        raise DimensionError(f"{what} contains NaN or Inf entries")
    values.setflags(write=False)
    return values


def _check_scale(scale) -> float:
    scale = float(scale)
    if not math.isfinite(scale):
        raise DimensionError(f"scale must be finite, got {scale}")
    return scale


@dataclass(frozen=True)
class Shape:
    """Mode sizes d_1..d_N of an order-N tensor."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 1:
            raise DimensionError("a tensor needs at least one mode")
        if any(d < 1 for d in dims):
            raise DimensionError(f"mode sizes must be positive, got {dims}")
        if math.prod(dims) > MAX_ELEMENTS:
            raise CapacityError(f"shape {dims} exceeds the addressable range")
        object.__setattr__(self, "dims", dims)

    @property
    def order(self) -> int:
        return len(self.dims)

    @property
    def total_elements(self) -> int:
        return math.prod(self.dims)

    def __iter__(self):
        return iter(self.dims)

    def __len__(self) -> int:
        return len(self.dims)

    def __str__(self) -> str:
        return "x".join(str(d) for d in self.dims)


def as_shape(shape: Union[Shape, tuple[int, ...], list[int]]) -> Shape:
    return shape if isinstance(shape, Shape) else Shape(tuple(shape))


@dataclass(frozen=True)
class DenseTensor:
    shape: Shape
    values: np.ndarray

    def __post_init__(self):
        shape = as_shape(self.shape)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(
            self, "values", _frozen(self.values, shape.dims, "dense values")
        )

    @classmethod
    def from_array(cls, array) -> "DenseTensor":
        array = np.asarray(array, dtype=np.float64)
        return cls(Shape(array.shape), array)

    @property
    def max_abs(self) -> float:
        """Largest absolute entry of the tensor."""
        return float(np.max(np.abs(self.values)))

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def scaled(self, alpha: float) -> "DenseTensor":
        return DenseTensor(self.shape, self.values * float(alpha))


@dataclass(frozen=True)
class CpTensor:
    """Rank-R CP tensor: scale * sum_r a1[:, r] o a2[:, r] o ... o aN[:, r]."""

    shape: Shape
    rank: int
    factors: tuple[np.ndarray, ...]
    scale: float = 1.0

    def __post_init__(self):
        shape = as_shape(self.shape)
        rank = int(self.rank)
        if rank < 1:
            raise DimensionError(f"CP rank must be at least 1, got {rank}")
        if len(self.factors) != shape.order:
            raise DimensionError(
                f"expected {shape.order} factor matrices, got {len(self.factors)}"
            )
        factors = tuple(
            _frozen(a, (d, rank), f"factor {n}")
            for n, (a, d) in enumerate(zip(self.factors, shape.dims))
        )
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "scale", _check_scale(self.scale))

    def scaled(self, alpha: float) -> "CpTensor":
        return CpTensor(self.shape, self.rank, self.factors, self.scale * float(alpha))


def tt_ranks(order: int, rank: int) -> list[tuple[int, int]]:
    """(r_left, r_right) per core: 1 at both boundaries, R in between."""
    bonds = [1] + [rank] * (order - 1) + [1]
    return [(bonds[n], bonds[n + 1]) for n in range(order)]


@dataclass(frozen=True)
class TtTensor:
    """Rank-R tensor train: scale * G1[:, i1, :] @ G2[:, i2, :] @ ... @ GN[:, iN, :]."""

    shape: Shape
    rank: int
    cores: tuple[np.ndarray, ...]
    scale: float = 1.0

    def __post_init__(self):
        shape = as_shape(self.shape)
        rank = int(self.rank)
        if rank < 1:
            raise DimensionError(f"TT rank must be at least 1, got {rank}")
        if len(self.cores) != shape.order:
            raise DimensionError(
                f"expected {shape.order} cores, got {len(self.cores)}"
            )
        cores = tuple(
            _frozen(g, (left, d, right), f"core {n}")
            for n, (g, d, (left, right)) in enumerate(
                zip(self.cores, shape.dims, tt_ranks(shape.order, rank))
            )
        )
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "cores", cores)
        object.__setattr__(self, "scale", _check_scale(self.scale))

    def scaled(self, alpha: float) -> "TtTensor":
        return TtTensor(self.shape, self.rank, self.cores, self.scale * float(alpha))


AnyTensor = Union[DenseTensor, CpTensor, TtTensor]


def _check_materializable(shape: Shape):
    # One float64 per element must fit in the addressable byte range.
    if shape.total_elements * 8 > MAX_ELEMENTS:
        raise CapacityError(f"cannot materialize a dense tensor of shape {shape}")


def densify_cp(t: CpTensor) -> DenseTensor:
    _check_materializable(t.shape)
    # Build the (R, d1, ..., dn) partial products, then sum over r.
    partial = t.factors[0].T
    for factor in t.factors[1:]:
        partial = partial[..., np.newaxis] * factor.T.reshape(
            (t.rank,) + (1,) * (partial.ndim - 1) + (factor.shape[0],)
        )
    return DenseTensor(t.shape, t.scale * partial.sum(axis=0))


def densify_tt(t: TtTensor) -> DenseTensor:
    _check_materializable(t.shape)
    chain = t.cores[0].reshape(t.shape.dims[0], -1)
    for core in t.cores[1:]:
        left, d, right = core.shape
        chain = (chain @ core.reshape(left, d * right)).reshape(-1, right)
    return DenseTensor(t.shape, t.scale * chain.reshape(t.shape.dims))


def densify(t: AnyTensor) -> DenseTensor:
    if isinstance(t, DenseTensor):
        return t
    if isinstance(t, CpTensor):
        return densify_cp(t)
    if isinstance(t, TtTensor):
        return densify_tt(t)
    raise TypeError(f"not a tensor: {type(t).__name__}")
