"""
AND/OR-amplified LSH bucket index over a collection of tensors.

Band b concatenates the codes of families b*K .. b*K + K - 1 (AND); an item
is a candidate when it shares a bucket with the query in any band (OR).
Band keys are 64-bit BLAKE2b digests of the K codes, so two different code
tuples can occasionally share a bucket; re-ranking removes that noise from
the top of the result.

An index attached to a directory writes each insert through to it: the
item as a tensor file, then the manifest.

Single writer, many readers: `insert` serializes on a lock, `query` does not
lock and is safe while no insert is in flight.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from collections import defaultdict
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from errors import DimensionError, ParameterError, TensorFormatError
from hashing.families import FamilyKind, apply_family, make_families
from projections.sampler import Distribution, check_seed
from tensors.formats import AnyTensor, Shape, as_shape
from tensors.kernels import cosine_similarity, frobenius_distance
from tensors.tensor_io import FILE_SUFFIX, read_tensor, write_tensor

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class IndexParams:
    family_kind: FamilyKind
    shape: Shape
    rank: int
    K_per_band: int
    L_bands: int
    w: Optional[float]
    seed: int
    distribution: Distribution = Distribution.RADEMACHER
    rerank: bool = True

    def __post_init__(self):
        object.__setattr__(self, "family_kind", FamilyKind(self.family_kind))
        object.__setattr__(self, "shape", as_shape(self.shape))
        object.__setattr__(self, "distribution", Distribution(self.distribution))
        object.__setattr__(self, "seed", check_seed(self.seed))
        if self.K_per_band < 1 or self.L_bands < 1:
            raise ParameterError(
                f"K_per_band and L_bands must be positive, got "
                f"{self.K_per_band} and {self.L_bands}"
            )
        if self.family_kind.is_e2lsh and self.w is None:
            raise ParameterError(f"{self.family_kind.value} needs a quantization width w")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["family_kind"] = self.family_kind.value
        data["shape"] = list(self.shape.dims)
        data["distribution"] = self.distribution.value
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "IndexParams":
        data = dict(data)
        data["shape"] = Shape(tuple(data["shape"]))
        return cls(**data)


def band_key(codes) -> int:
    """64-bit key of one band's code tuple."""
    raw = np.asarray(codes, dtype="<i8").tobytes()
    return int.from_bytes(hashlib.blake2b(raw, digest_size=8).digest(), "little")


def _item_filename(item_id: int) -> str:
    return f"item_{item_id}{FILE_SUFFIX}"


class LshIndex:
    def __init__(self, params: IndexParams, directory=None):
        self.params = params
        self.families = make_families(
            params.family_kind,
            params.shape,
            params.rank,
            params.K_per_band * params.L_bands,
            params.w,
            params.seed,
            params.distribution,
        )
        self.tables: list[defaultdict[int, list[int]]] = [
            defaultdict(list) for _ in range(params.L_bands)
        ]
        self.catalog: dict[int, AnyTensor] = {}
        self._placements: dict[int, list[int]] = {}
        self._lock = threading.Lock()
        self.directory: Optional[Path] = None
        if directory is not None:
            self.attach(directory)

    def __len__(self) -> int:
        return len(self.catalog)

    def _check_shape(self, x: AnyTensor):
        if x.shape != self.params.shape:
            raise DimensionError(
                f"tensor shape {x.shape} does not match index shape {self.params.shape}"
            )

    def band_keys(self, x: AnyTensor) -> list[int]:
        self._check_shape(x)
        K = self.params.K_per_band
        codes = [apply_family(f, x) for f in self.families]
        return [band_key(codes[b * K : (b + 1) * K]) for b in range(self.params.L_bands)]

    def insert(self, item_id: int, x: AnyTensor):
        """Places item_id in one bucket per band; re-inserting replaces the old placement."""
        keys = self.band_keys(x)
        with self._lock:
            if item_id in self._placements:
                for table, old_key in zip(self.tables, self._placements[item_id]):
                    bucket = table[old_key]
                    bucket.remove(item_id)
                    if not bucket:
                        del table[old_key]
            for table, key in zip(self.tables, keys):
                table[key].append(item_id)
            self._placements[item_id] = keys
            self.catalog[item_id] = x
            if self.directory is not None:
                self._write_item(item_id)
                self._write_manifest()

    def candidates(self, x: AnyTensor) -> list[int]:
        """Deduplicated union of the query's buckets, in band order."""
        seen: dict[int, None] = {}
        for table, key in zip(self.tables, self.band_keys(x)):
            for item_id in table.get(key, ()):
                seen.setdefault(item_id, None)
        return list(seen)

    def query(
        self,
        x: AnyTensor,
        max_candidates: Optional[int] = None,
        rerank: Optional[bool] = None,
    ) -> list[int]:
        if max_candidates is not None and max_candidates < 0:
            raise ParameterError(f"max_candidates must be non-negative, got {max_candidates}")
        if not self.catalog:
            self._check_shape(x)
            return []
        found = self.candidates(x)
        if self.params.rerank if rerank is None else rerank:
            found = self._rerank(x, found)
        return found if max_candidates is None else found[:max_candidates]

    def _rerank(self, x: AnyTensor, ids: list[int]) -> list[int]:
        if self.params.family_kind.is_e2lsh:
            score = {i: frobenius_distance(x, self.catalog[i]) for i in ids}
        else:
            score = {i: -cosine_similarity(x, self.catalog[i]) for i in ids}
        return sorted(ids, key=lambda i: (score[i], i))

    def _write_item(self, item_id: int):
        write_tensor(self.directory / _item_filename(item_id), self.catalog[item_id])

    def _write_manifest(self) -> Path:
        items = [[item_id, _item_filename(item_id)] for item_id in self.catalog]
        manifest = {"params": self.params.to_dict(), "items": items}
        path = self.directory / MANIFEST_NAME
        path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
        return path

    def attach(self, directory) -> Path:
        """Writes the index to `directory` and writes every later insert through to it."""
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        with self._lock:
            for item_id in self.catalog:
                self._write_item(item_id)
            path = self._write_manifest()
        logger.info(f"Index with {len(self)} items persisted to {self.directory}")
        return path

    def save(self, directory) -> Path:
        """Writes every item as a tensor file plus a manifest; buckets are not stored."""
        return self.attach(directory)

    @classmethod
    def load(cls, directory) -> "LshIndex":
        """Rebuilds the buckets from the manifest; later inserts write through to `directory`."""
        directory = Path(directory)
        path = directory / MANIFEST_NAME
        try:
            manifest = json.loads(path.read_text(encoding="utf-8"))
            params = IndexParams.from_dict(manifest["params"])
            items = [(int(item_id), str(filename)) for item_id, filename in manifest["items"]]
        except (KeyError, TypeError, ValueError) as e:
            raise TensorFormatError(f"{path}: corrupt index manifest: {e}") from e
        index = cls(params)
        for item_id, filename in items:
            index.insert(item_id, read_tensor(directory / filename))
        index.directory = directory
        logger.info(f"Loaded index with {len(index)} items from {directory}")
        return index
