import json
from dataclasses import asdict, dataclass
from typing import Optional

from errors import ParameterError
from hashing.families import FamilyKind, HashVector, hash_k
from projections.sampler import Distribution, check_seed
from tensors.formats import AnyTensor, Shape


@dataclass(frozen=True)
class FamilyRecord:
    """Everything needed to regenerate a K-sized hash; projections are never stored."""

    kind: FamilyKind
    shape: tuple[int, ...]
    rank: int
    K: int
    w: Optional[float]
    seed: int
    distribution: Distribution = Distribution.RADEMACHER

    def __post_init__(self):
        object.__setattr__(self, "kind", FamilyKind(self.kind))
        object.__setattr__(self, "shape", Shape(tuple(self.shape)).dims)
        object.__setattr__(self, "distribution", Distribution(self.distribution))
        object.__setattr__(self, "seed", check_seed(self.seed))
        if self.K < 1:
            raise ParameterError(f"K must be positive, got {self.K}")
        if self.rank < 1:
            raise ParameterError(f"rank must be at least 1, got {self.rank}")
        if self.kind.is_e2lsh and self.w is None:
            raise ParameterError(f"{self.kind.value} needs a quantization width w")

    def hash(self, x: AnyTensor) -> HashVector:
        return hash_k(
            self.kind, self.shape, self.rank, self.K, self.w, self.seed, x, self.distribution
        )

    def to_json(self) -> str:
        data = asdict(self)
        data["kind"] = self.kind.value
        data["distribution"] = self.distribution.value
        data["shape"] = list(self.shape)
        return json.dumps(data, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FamilyRecord":
        try:
            data = json.loads(text)
            return cls(**data)
        except (TypeError, ValueError) as e:
            raise ParameterError(f"invalid family record: {e}") from e
