"""
Wall-clock medians of K-code hash contractions across a (kind, N, d, R, R_hat) grid.

Projection tensors and inputs are built before timing starts; one repetition
is the K inner products that produce a K-sized code.
"""

import logging
import time
from dataclasses import dataclass
from statistics import median

import pandas as pd

import config
from errors import ParameterError
from projections.sampler import (
    Decomposition,
    SamplerConfig,
    projection_parameter_count,
    sample,
    sample_gaussian_dense,
)
from tensors.kernels import inner
from validation.generators import random_cp, random_dense, random_tt

logger = logging.getLogger(__name__)

BENCH_COLUMNS = ["kind", "N", "d", "R", "R_hat", "K", "median_ns", "params"]

# projection format, input format
KINDS = {
    "cp-cp": ("cp", "cp"),
    "tt-tt": ("tt", "tt"),
    "cp-tt": ("cp", "tt"),
    "cp-dense": ("cp", "dense"),
    "tt-dense": ("tt", "dense"),
    "naive-dense": ("naive", "dense"),
}


@dataclass(frozen=True)
class BenchPoint:
    kind: str
    N: int
    d: int
    R: int
    R_hat: int
    K: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown benchmark kind {self.kind!r}")
        if min(self.N, self.d, self.K) < 1:
            raise ParameterError(f"N, d and K must be positive in {self}")


def default_grid() -> list[BenchPoint]:
    grid = []
    for d in (64, 128, 256, 512):
        grid.append(BenchPoint("cp-cp", 3, d, 4, 4))
        grid.append(BenchPoint("tt-tt", 3, d, 3, 3))
        grid.append(BenchPoint("cp-tt", 3, d, 3, 3))
    for d in (32, 64):
        grid.append(BenchPoint("cp-cp", 4, d, 4, 4))
        grid.append(BenchPoint("tt-tt", 4, d, 3, 3))
    for d in (16, 32, 64):
        grid.append(BenchPoint("cp-dense", 3, d, 4, 0))
        grid.append(BenchPoint("tt-dense", 3, d, 3, 0))
        grid.append(BenchPoint("naive-dense", 3, d, 0, 0))
    return grid


def _operands(point: BenchPoint, seed: int):
    projection_format, input_format = KINDS[point.kind]
    shape = (point.d,) * point.N
    if projection_format == "naive":
        projections = [sample_gaussian_dense(shape, seed, k) for k in range(point.K)]
    else:
        cfg = SamplerConfig(
            shape=shape,
            rank=point.R,
            decomposition=Decomposition(projection_format),
            seed=seed,
        )
        projections = [sample(cfg.for_component(k)) for k in range(point.K)]
    if input_format == "cp":
        x = random_cp(shape, point.R_hat, seed)
    elif input_format == "tt":
        x = random_tt(shape, point.R_hat, seed)
    else:
        x = random_dense(shape, seed)
    return projections, x


def time_point(point: BenchPoint, repeats: int, seed: int) -> int:
    """Median nanoseconds for one K-code hash at this grid point."""
    projections, x = _operands(point, seed)
    timings = []
    for _ in range(repeats):
        start = time.perf_counter_ns()
        for p in projections:
            inner(p, x)
        timings.append(time.perf_counter_ns() - start)
    return int(median(timings))


def run_grid(grid=None, repeats: int = None, seed: int = None) -> pd.DataFrame:
    grid = default_grid() if grid is None else list(grid)
    repeats = config.BENCH_REPEATS if repeats is None else repeats
    seed = config.DEFAULT_SEED if seed is None else seed
    if repeats < 1:
        raise ParameterError(f"repeats must be positive, got {repeats}")

    rows = []
    for point in grid:
        median_ns = time_point(point, repeats, seed)
        projection_format = KINDS[point.kind][0]
        rows.append(
            {
                "kind": point.kind,
                "N": point.N,
                "d": point.d,
                "R": point.R,
                "R_hat": point.R_hat,
                "K": point.K,
                "median_ns": median_ns,
                "params": projection_parameter_count(
                    (point.d,) * point.N, max(point.R, 1), projection_format
                ),
            }
        )
        logger.info(f"Bench {point.kind} N={point.N} d={point.d}: {median_ns} ns")
    frame = pd.DataFrame(rows, columns=BENCH_COLUMNS)
    return frame.sort_values(["kind", "N", "d", "R", "R_hat", "K"], kind="stable").reset_index(
        drop=True
    )


def scaling_ratio(
    frame: pd.DataFrame, kind: str, d_small: int, d_large: int, N: int = 3
) -> float:
    """median_ns(d_large) / median_ns(d_small) for one kind at order N."""
    rows = frame[(frame["kind"] == kind) & (frame["N"] == N)].set_index("d")["median_ns"]
    return float(rows.loc[d_large]) / float(rows.loc[d_small])
