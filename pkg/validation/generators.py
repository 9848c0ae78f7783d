"""Test tensors: i.i.d. dense, random CP/TT, planted-angle and planted-distance pairs."""

import math
from typing import Sequence, Union

import numpy as np

from errors import ParameterError
from tensors.formats import CpTensor, DenseTensor, TtTensor, as_shape, tt_ranks

# Anything np.random.default_rng accepts as a seed.
SeedLike = Union[int, Sequence[int]]


def random_dense(shape, seed: SeedLike) -> DenseTensor:
    shape = as_shape(shape)
    rng = np.random.default_rng(seed)
    return DenseTensor(shape, rng.standard_normal(shape.dims))


def random_cp(shape, rank: int, seed: SeedLike, scale: float = 1.0) -> CpTensor:
    shape = as_shape(shape)
    rng = np.random.default_rng(seed)
    factors = tuple(rng.standard_normal((d, rank)) for d in shape.dims)
    return CpTensor(shape, rank, factors, scale)


def random_tt(shape, rank: int, seed: SeedLike, scale: float = 1.0) -> TtTensor:
    shape = as_shape(shape)
    rng = np.random.default_rng(seed)
    cores = tuple(
        rng.standard_normal((left, d, right))
        for d, (left, right) in zip(shape.dims, tt_ranks(shape.order, rank))
    )
    return TtTensor(shape, rank, cores, scale)


def _unit_pair(size: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Two orthonormal vectors via Gram-Schmidt on Gaussian draws."""
    if size < 2:
        raise ParameterError("planted pairs need at least two elements")
    u = rng.standard_normal(size)
    u /= np.linalg.norm(u)
    v = rng.standard_normal(size)
    v -= np.dot(u, v) * u
    v /= np.linalg.norm(v)
    return u, v


def planted_angle_pair(
    shape, theta: float, seed: SeedLike, norm_x: float = 1.0, norm_y: float = 1.0
) -> tuple[DenseTensor, DenseTensor]:
    """Dense pair whose flattened angle is exactly theta (up to rounding)."""
    if not 0.0 <= theta <= math.pi:
        raise ParameterError(f"theta must lie in [0, pi], got {theta}")
    shape = as_shape(shape)
    u, v = _unit_pair(shape.total_elements, np.random.default_rng(seed))
    x = norm_x * u
    y = norm_y * (math.cos(theta) * u + math.sin(theta) * v)
    return DenseTensor(shape, x.reshape(shape.dims)), DenseTensor(shape, y.reshape(shape.dims))


def planted_distance_pair(
    shape, distance: float, seed: SeedLike, norm_x: float = 1.0
) -> tuple[DenseTensor, DenseTensor]:
    """Dense pair with ||x - y||_F equal to distance."""
    if distance < 0:
        raise ParameterError(f"distance must be non-negative, got {distance}")
    shape = as_shape(shape)
    u, v = _unit_pair(shape.total_elements, np.random.default_rng(seed))
    x = norm_x * u
    y = x + distance * v
    return DenseTensor(shape, x.reshape(shape.dims)), DenseTensor(shape, y.reshape(shape.dims))
