"""
Seeded samplers for CP/TT projection tensors and the K-component projection map.

Every random draw comes from a Philox (counter-based) stream keyed by
(seed, component index, stream tag, mode). Entry n of a mode is the n-th
draw of its stream, so a projection tensor depends only on its config,
never on what else was sampled before it or on which thread sampled it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from errors import ParameterError
from tensors.formats import AnyTensor, CpTensor, DenseTensor, Shape, TtTensor, as_shape, tt_ranks
from tensors.kernels import inner

# Stream tags; the second element of every spawn key.
PROJECTION_STREAM = 0
OFFSET_STREAM = 1
NAIVE_STREAM = 2

MAX_SEED = 2**64 - 1


class Distribution(str, enum.Enum):
    RADEMACHER = "rademacher"
    GAUSSIAN = "gaussian"


class Decomposition(str, enum.Enum):
    CP = "cp"
    TT = "tt"


def check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ParameterError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ParameterError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def stream(seed: int, component_index: int, tag: int, *key: int) -> np.random.Generator:
    """Independent generator for one (seed, component, tag, ...) key."""
    sequence = np.random.SeedSequence(
        check_seed(seed), spawn_key=(int(component_index), int(tag), *key)
    )
    return np.random.Generator(np.random.Philox(sequence))


def draw_entries(
    generator: np.random.Generator, size: int, distribution: Distribution
) -> np.ndarray:
    if distribution == Distribution.RADEMACHER:
        bits = generator.integers(0, 2, size=size, dtype=np.int8)
        return (2 * bits - 1).astype(np.float64)
    return generator.standard_normal(size)


@dataclass(frozen=True)
class SamplerConfig:
    shape: Shape
    rank: int
    distribution: Distribution = Distribution.RADEMACHER
    decomposition: Decomposition = Decomposition.CP
    seed: int = 0
    component_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "shape", as_shape(self.shape))
        object.__setattr__(self, "distribution", Distribution(self.distribution))
        object.__setattr__(self, "decomposition", Decomposition(self.decomposition))
        object.__setattr__(self, "seed", check_seed(self.seed))
        if int(self.rank) < 1:
            raise ParameterError(f"rank must be at least 1, got {self.rank}")
        if int(self.component_index) < 0:
            raise ParameterError(
                f"component_index must be non-negative, got {self.component_index}"
            )
        object.__setattr__(self, "rank", int(self.rank))
        object.__setattr__(self, "component_index", int(self.component_index))

    def for_component(self, k: int) -> "SamplerConfig":
        return replace(self, component_index=k)


def _mode_entries(cfg: SamplerConfig, mode: int, shape: tuple[int, ...]) -> np.ndarray:
    generator = stream(cfg.seed, cfg.component_index, PROJECTION_STREAM, mode)
    return draw_entries(generator, math.prod(shape), cfg.distribution).reshape(shape)


def sample_cp(cfg: SamplerConfig) -> CpTensor:
    if cfg.decomposition != Decomposition.CP:
        raise ParameterError("sample_cp needs a CP sampler config")
    factors = tuple(
        _mode_entries(cfg, n, (d, cfg.rank)) for n, d in enumerate(cfg.shape.dims)
    )
    return CpTensor(cfg.shape, cfg.rank, factors, 1.0 / math.sqrt(cfg.rank))


def sample_tt(cfg: SamplerConfig) -> TtTensor:
    if cfg.decomposition != Decomposition.TT:
        raise ParameterError("sample_tt needs a TT sampler config")
    order = cfg.shape.order
    cores = tuple(
        _mode_entries(cfg, n, (left, d, right))
        for n, (d, (left, right)) in enumerate(
            zip(cfg.shape.dims, tt_ranks(order, cfg.rank))
        )
    )
    scale = 1.0 / math.sqrt(float(cfg.rank) ** (order - 1))
    return TtTensor(cfg.shape, cfg.rank, cores, scale)


def sample(cfg: SamplerConfig):
    if cfg.decomposition == Decomposition.CP:
        return sample_cp(cfg)
    return sample_tt(cfg)


def sample_gaussian_dense(shape: Shape, seed: int, component_index: int) -> DenseTensor:
    """Dense i.i.d. N(0, 1) projection, the reshape-then-project baseline."""
    shape = as_shape(shape)
    generator = stream(seed, component_index, NAIVE_STREAM)
    values = generator.standard_normal(shape.total_elements).reshape(shape.dims)
    return DenseTensor(shape, values)


def project(x: AnyTensor, cfg: SamplerConfig, K: int) -> np.ndarray:
    """Component k is <P_k, x> / sqrt(K), P_k sampled at component index k."""
    if K < 1:
        raise ParameterError(f"K must be positive, got {K}")
    norm = 1.0 / math.sqrt(K)
    return np.array(
        [norm * inner(sample(cfg.for_component(k)), x) for k in range(K)]
    )


def projection_parameter_count(shape, rank: int, kind: str) -> int:
    """Stored entries of one projection tensor: 'cp', 'tt' or 'naive'."""
    shape = as_shape(shape)
    if kind == "cp":
        return rank * sum(shape.dims)
    if kind == "tt":
        return sum(
            left * d * right
            for d, (left, right) in zip(shape.dims, tt_ranks(shape.order, rank))
        )
    if kind == "naive":
        return shape.total_elements
    raise ParameterError(f"unknown projection kind {kind!r}")
