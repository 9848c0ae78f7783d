"""
Binary tensor files (little-endian).

    magic "TLSH" | tag u8 (0 dense, 1 CP, 2 TT) | order N u8 | N x u32 mode sizes
    dense: prod(d) f64, last index fastest
    CP:    rank u32 | scale f64 | N factors, element [i, r] at i*R + r
    TT:    rank u32 | scale f64 | N cores, element [a, i, b] at (a*d + i)*r_right + b
"""

import logging
import struct
from pathlib import Path

import numpy as np

from errors import CapacityError, DimensionError, TensorFormatError
from tensors.formats import AnyTensor, CpTensor, DenseTensor, Shape, TtTensor, tt_ranks

logger = logging.getLogger(__name__)

MAGIC = b"TLSH"
TAG_DENSE, TAG_CP, TAG_TT = 0, 1, 2
FILE_SUFFIX = ".tlsh"
_F64 = np.dtype("<f8")
MAX_U32 = 2**32 - 1


def _header(tag: int, shape: Shape) -> bytes:
    if shape.order > 255:
        raise TensorFormatError(f"order {shape.order} does not fit in one byte")
    if max(shape.dims) > MAX_U32:
        raise TensorFormatError(f"mode sizes {shape.dims} do not fit in 32 bits")
    return MAGIC + struct.pack(f"<BB{shape.order}I", tag, shape.order, *shape.dims)


def _f64_bytes(array: np.ndarray) -> bytes:
    return np.ascontiguousarray(array, dtype=_F64).tobytes()


def tensor_to_bytes(t: AnyTensor) -> bytes:
    if isinstance(t, DenseTensor):
        return _header(TAG_DENSE, t.shape) + _f64_bytes(t.values)
    if isinstance(t, (CpTensor, TtTensor)) and t.rank > MAX_U32:
        raise TensorFormatError(f"rank {t.rank} does not fit in 32 bits")
    if isinstance(t, CpTensor):
        body = struct.pack("<Id", t.rank, t.scale)
        return _header(TAG_CP, t.shape) + body + b"".join(map(_f64_bytes, t.factors))
    if isinstance(t, TtTensor):
        body = struct.pack("<Id", t.rank, t.scale)
        return _header(TAG_TT, t.shape) + body + b"".join(map(_f64_bytes, t.cores))
    raise TypeError(f"cannot serialize {type(t).__name__}")


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise TensorFormatError(
                f"truncated tensor data: wanted {size} bytes at offset {self.offset}"
            )
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def array(self, shape: tuple[int, ...]) -> np.ndarray:
        count = int(np.prod(shape))
        raw = np.frombuffer(self.take(count * _F64.itemsize), dtype=_F64)
        return raw.astype(np.float64).reshape(shape)


def tensor_from_bytes(data: bytes) -> AnyTensor:
    try:
        return _parse(_Reader(data))
    except (DimensionError, CapacityError) as e:
        # Well-framed bytes can still describe an invalid tensor.
        raise TensorFormatError(f"invalid tensor data: {e}") from e


def _parse(reader: _Reader) -> AnyTensor:
    data = reader.data
    if reader.take(4) != MAGIC:
        raise TensorFormatError("not a tensor file (bad magic)")
    tag, order = reader.unpack("<BB")
    if order < 1:
        raise TensorFormatError("tensor order must be at least 1")
    shape = Shape(reader.unpack(f"<{order}I"))

    if tag == TAG_DENSE:
        tensor = DenseTensor(shape, reader.array(shape.dims))
    elif tag == TAG_CP:
        rank, scale = reader.unpack("<Id")
        factors = tuple(reader.array((d, rank)) for d in shape.dims)
        tensor = CpTensor(shape, rank, factors, scale)
    elif tag == TAG_TT:
        rank, scale = reader.unpack("<Id")
        cores = tuple(
            reader.array((left, d, right))
            for d, (left, right) in zip(shape.dims, tt_ranks(order, rank))
        )
        tensor = TtTensor(shape, rank, cores, scale)
    else:
        raise TensorFormatError(f"unknown format tag {tag}")

    if reader.offset != len(data):
        raise TensorFormatError(
            f"{len(data) - reader.offset} trailing bytes after tensor data"
        )
    return tensor


def write_tensor(path, t: AnyTensor) -> Path:
    path = Path(path)
    path.write_bytes(tensor_to_bytes(t))
    logger.debug(f"Wrote {type(t).__name__} {t.shape} to {path}")
    return path


def read_tensor(path) -> AnyTensor:
    path = Path(path)
    try:
        return tensor_from_bytes(path.read_bytes())
    except TensorFormatError as e:
        raise TensorFormatError(f"{path}: {e}") from e
