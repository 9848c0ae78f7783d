"""
CP/TT E2LSH and SRP hash families, plus the reshape-and-project baselines.

    E2LSH: g(X) = floor((<P, X> + b) / w)
    SRP:   h(X) = 1 if <P, X> > 0 else 0

P is a CP or TT projection tensor (Rademacher by default) or, for the naive
baselines, a dense Gaussian tensor. A K-sized hash code uses K independent
families at component indices 0..K-1 of one seed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from errors import DimensionError, ParameterError
from projections.sampler import (
    OFFSET_STREAM,
    Decomposition,
    Distribution,
    SamplerConfig,
    check_seed,
    sample,
    sample_gaussian_dense,
    stream,
)
from tensors.formats import AnyTensor, DenseTensor, as_shape
from tensors.kernels import inner


class FamilyKind(str, enum.Enum):
    CP_E2LSH = "cp-e2lsh"
    TT_E2LSH = "tt-e2lsh"
    CP_SRP = "cp-srp"
    TT_SRP = "tt-srp"
    NAIVE_E2LSH = "naive-e2lsh"
    NAIVE_SRP = "naive-srp"

    @property
    def is_e2lsh(self) -> bool:
        return self.value.endswith("e2lsh")

    @property
    def is_naive(self) -> bool:
        return self.value.startswith("naive")

    @property
    def decomposition(self) -> Optional[Decomposition]:
        if self.is_naive:
            return None
        return Decomposition(self.value.split("-")[0])


@dataclass(frozen=True)
class E2lshFamily:
    projection: AnyTensor
    w: float
    b: float
    seed: int

    def __post_init__(self):
        if not self.w > 0:
            raise ParameterError(f"quantization width must be positive, got {self.w}")
        if not 0 <= self.b < self.w:
            raise ParameterError(f"offset b={self.b} is outside [0, {self.w})")


@dataclass(frozen=True)
class SrpFamily:
    projection: AnyTensor
    seed: int


HashFamily = Union[E2lshFamily, SrpFamily]


@dataclass(frozen=True)
class HashVector:
    codes: tuple[int, ...]
    family_kind: FamilyKind

    def __post_init__(self):
        object.__setattr__(self, "codes", tuple(int(c) for c in self.codes))
        object.__setattr__(self, "family_kind", FamilyKind(self.family_kind))
        if len(self.codes) < 1:
            raise ParameterError("a hash vector holds at least one code")

    def __len__(self) -> int:
        return len(self.codes)

    def hamming_fraction(self, other: "HashVector") -> float:
        """Fraction of positions where the two codes disagree."""
        if len(self) != len(other):
            raise DimensionError(
                f"hash vectors differ in length: {len(self)} vs {len(other)}"
            )
        disagree = sum(a != b for a, b in zip(self.codes, other.codes))
        return disagree / len(self)


def _check_shape(family: HashFamily, x: AnyTensor):
    if family.projection.shape != x.shape:
        raise DimensionError(
            f"input shape {x.shape} does not match family shape {family.projection.shape}"
        )


def e2lsh_hash(f: E2lshFamily, x: AnyTensor) -> int:
    _check_shape(f, x)
    return math.floor((inner(f.projection, x) + f.b) / f.w)


def srp_hash(f: SrpFamily, x: AnyTensor) -> int:
    _check_shape(f, x)
    # A zero projection hashes to 0.
    return 1 if inner(f.projection, x) > 0 else 0


def apply_family(f: HashFamily, x: AnyTensor) -> int:
    if isinstance(f, E2lshFamily):
        return e2lsh_hash(f, x)
    return srp_hash(f, x)


def draw_offset(w: float, seed: int, component_index: int) -> float:
    b = stream(seed, component_index, OFFSET_STREAM).uniform(0.0, w)
    # uniform() can round up to w itself for some w.
    return min(b, math.nextafter(w, 0.0))


def make_family(
    kind: FamilyKind,
    shape,
    rank: int,
    w: Optional[float],
    seed: int,
    component_index: int = 0,
    distribution: Distribution = Distribution.RADEMACHER,
) -> HashFamily:
    """Instantiates the family at one component index of `seed`."""
    kind = FamilyKind(kind)
    seed = check_seed(seed)
    shape = as_shape(shape)
    if kind.is_naive:
        projection = sample_gaussian_dense(shape, seed, component_index)
    else:
        cfg = SamplerConfig(
            shape=shape,
            rank=rank,
            distribution=distribution,
            decomposition=kind.decomposition,
            seed=seed,
            component_index=component_index,
        )
        projection = sample(cfg)
    if kind.is_e2lsh:
        if w is None:
            raise ParameterError(f"{kind.value} needs a quantization width w")
        if not w > 0:
            raise ParameterError(f"quantization width must be positive, got {w}")
        return E2lshFamily(projection, float(w), draw_offset(w, seed, component_index), seed)
    return SrpFamily(projection, seed)


def make_families(
    kind: FamilyKind,
    shape,
    rank: int,
    K: int,
    w: Optional[float],
    seed: int,
    distribution: Distribution = Distribution.RADEMACHER,
    first_component: int = 0,
) -> list[HashFamily]:
    if K < 1:
        raise ParameterError(f"K must be positive, got {K}")
    return [
        make_family(kind, shape, rank, w, seed, first_component + k, distribution)
        for k in range(K)
    ]


def hash_with(families: Sequence[HashFamily], kind: FamilyKind, x: AnyTensor) -> HashVector:
    return HashVector(tuple(apply_family(f, x) for f in families), kind)


def _check_request(kind: FamilyKind, shape, K: int, w: Optional[float], x: AnyTensor):
    if K < 1:
        raise ParameterError(f"K must be positive, got {K}")
    if kind.is_e2lsh and w is None:
        raise ParameterError(f"{kind.value} needs a quantization width w")
    if as_shape(shape) != x.shape:
        raise DimensionError(f"input shape {x.shape} does not match {as_shape(shape)}")


def hash_k(
    kind: FamilyKind,
    shape,
    rank: int,
    K: int,
    w: Optional[float],
    seed: int,
    x: AnyTensor,
    distribution: Distribution = Distribution.RADEMACHER,
) -> HashVector:
    """K-sized hash code of x; deterministic in seed."""
    kind = FamilyKind(kind)
    _check_request(kind, shape, K, w, x)
    if kind.is_naive:
        return naive_hash(kind, x, K, w, seed)
    families = make_families(kind, shape, rank, K, w, seed, distribution)
    return hash_with(families, kind, x)


def naive_hash(
    kind: FamilyKind, x: DenseTensor, K: int, w: Optional[float], seed: int
) -> HashVector:
    """Reshape x to a vector and hash it with dense Gaussian projections."""
    kind = FamilyKind(kind)
    if not kind.is_naive:
        raise ParameterError(f"{kind.value} is not a naive family")
    if not isinstance(x, DenseTensor):
        raise ParameterError(
            f"naive families hash dense tensors only, got {type(x).__name__}"
        )
    _check_request(kind, x.shape, K, w, x)
    # Flattening is implicit: the dense dot product runs over the raveled values.
    families = make_families(kind, x.shape, 1, K, w, seed)
    return hash_with(families, kind, x)
