"""
Inner products and norms between dense, CP and TT tensors.

Factored operands are never densified: CP pairs go through per-mode Gram
matrices, anything involving a TT goes through a left-to-right boundary
sweep, and factored-against-dense contracts the dense array one mode at a
time.
"""

import math

import numpy as np

from errors import DimensionError
from tensors.formats import AnyTensor, CpTensor, DenseTensor, TtTensor


def _require_same_shape(a: AnyTensor, b: AnyTensor):
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")


def inner_dense_dense(x: DenseTensor, y: DenseTensor) -> float:
    _require_same_shape(x, y)
    return float(np.dot(x.flat(), y.flat()))


def inner_cp_dense(p: CpTensor, x: DenseTensor) -> float:
    """Contract every CP column against x mode by mode, all R columns at once."""
    _require_same_shape(p, x)
    if p.scale == 0.0:
        return 0.0
    # (R, d2, ..., dN) after the first mode, then keep r diagonal.
    partial = np.tensordot(p.factors[0].T, x.values, axes=(1, 0))
    for factor in p.factors[1:]:
        partial = np.einsum("ri...,ir->r...", partial, factor)
    return p.scale * float(partial.sum())


def inner_tt_dense(t: TtTensor, x: DenseTensor) -> float:
    _require_same_shape(t, x)
    if t.scale == 0.0:
        return 0.0
    # Leading axis is the open bond index; it starts at width 1.
    partial = x.values[np.newaxis]
    for core in t.cores:
        partial = np.tensordot(core, partial, axes=([0, 1], [0, 1]))
    return t.scale * float(partial.reshape(-1)[0])


def inner_cp_cp(p: CpTensor, q: CpTensor) -> float:
    """Hadamard product of per-mode Gram matrices, summed; O(N d R R')."""
    _require_same_shape(p, q)
    gram = np.ones((p.rank, q.rank))
    for a, b in zip(p.factors, q.factors):
        gram = gram * (a.T @ b)
    return p.scale * q.scale * float(gram.sum())


def inner_tt_tt(t: TtTensor, u: TtTensor) -> float:
    """Transfer-matrix sweep; the boundary is (r_t x r_u), O(N d max(R)^3)."""
    _require_same_shape(t, u)
    boundary = np.ones((1, 1))
    for g, h in zip(t.cores, u.cores):
        step = np.tensordot(boundary, g, axes=(0, 0))
        boundary = np.tensordot(step, h, axes=([0, 1], [0, 1]))
    return t.scale * u.scale * float(boundary[0, 0])


def inner_cp_tt(p: CpTensor, t: TtTensor) -> float:
    """Boundary sweep with one row per CP term (R x r_t), no CP->TT conversion."""
    _require_same_shape(p, t)
    boundary = np.ones((p.rank, 1))
    for factor, core in zip(p.factors, t.cores):
        step = np.tensordot(boundary, core, axes=(1, 0))
        boundary = np.einsum("ric,ir->rc", step, factor)
    return p.scale * t.scale * float(boundary.sum())


def inner(a: AnyTensor, b: AnyTensor) -> float:
    """Dispatches to the kernel matching the format pair."""
    if isinstance(a, DenseTensor):
        if isinstance(b, DenseTensor):
            return inner_dense_dense(a, b)
        return inner(b, a)
    if isinstance(a, CpTensor):
        if isinstance(b, DenseTensor):
            return inner_cp_dense(a, b)
        if isinstance(b, CpTensor):
            return inner_cp_cp(a, b)
        if isinstance(b, TtTensor):
            return inner_cp_tt(a, b)
    if isinstance(a, TtTensor):
        if isinstance(b, DenseTensor):
            return inner_tt_dense(a, b)
        if isinstance(b, CpTensor):
            return inner_cp_tt(b, a)
        if isinstance(b, TtTensor):
            return inner_tt_tt(a, b)
    raise TypeError(
        f"no inner product between {type(a).__name__} and {type(b).__name__}"
    )


def frobenius_norm(x: AnyTensor) -> float:
    # Rounding can push a factored self-product a hair below zero.
    return math.sqrt(max(inner(x, x), 0.0))


def frobenius_distance(x: AnyTensor, y: AnyTensor) -> float:
    """||x - y||_F from three inner products, valid across formats."""
    squared = inner(x, x) + inner(y, y) - 2.0 * inner(x, y)
    return math.sqrt(max(squared, 0.0))


def cosine_similarity(x: AnyTensor, y: AnyTensor) -> float:
    norms = frobenius_norm(x) * frobenius_norm(y)
    if norms == 0.0:
        return 0.0
    return max(-1.0, min(1.0, inner(x, y) / norms))


def angle_between(x: AnyTensor, y: AnyTensor) -> float:
    return math.acos(cosine_similarity(x, y))
