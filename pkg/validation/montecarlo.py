"""
Monte Carlo estimators for collision rates and projection moments.

Trial t always uses component index t of the run seed, so a report depends
only on its inputs and never on how trials are scheduled.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from errors import DimensionError, ParameterError
from hashing.diagnostics import RankConditionReport, rank_condition_check
from hashing.families import FamilyKind, HashVector, apply_family, make_family
from projections.sampler import Decomposition, Distribution, SamplerConfig, sample
from tensors.formats import AnyTensor
from tensors.kernels import angle_between, frobenius_distance, frobenius_norm, inner
from validation.oracles import (
    angle_estimator,
    binomial_band,
    e2lsh_collision_oracle,
    srp_collision_oracle,
)

logger = logging.getLogger(__name__)

# Below this many trials a report is flagged as having widened bands.
WELL_POWERED_TRIALS = 1000
KS_ALPHA = 0.001
ASYMPTOTIC_LABEL = (
    "asymptotic guarantee: normality holds as prod(d_n) grows; "
    "deviations at small shapes are expected"
)


@dataclass(frozen=True)
class CollisionReport:
    setting: dict
    trials: int
    empirical_rate: float
    analytic_rate: float
    band_3sigma: float

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError(f"trials must be positive, got {self.trials}")
        if not 0.0 <= self.empirical_rate <= 1.0:
            raise ParameterError(f"empirical rate {self.empirical_rate} outside [0, 1]")

    @property
    def sigma(self) -> float:
        return self.band_3sigma / 3.0

    @property
    def deviation(self) -> float:
        return abs(self.empirical_rate - self.analytic_rate)

    @property
    def passed(self) -> bool:
        # A degenerate p (0 or 1) has a zero band; allow rounding only.
        return self.deviation <= max(self.band_3sigma, 1e-12)

    @property
    def widened(self) -> bool:
        return self.trials < WELL_POWERED_TRIALS


def analytic_collision_rate(
    kind: FamilyKind, x: AnyTensor, y: AnyTensor, w: Optional[float]
) -> float:
    if kind.is_e2lsh:
        r = frobenius_distance(x, y)
        return 1.0 if r == 0.0 else e2lsh_collision_oracle(r, w)
    return srp_collision_oracle(angle_between(x, y))


def empirical_collision(
    family_kind,
    x: AnyTensor,
    y: AnyTensor,
    rank: int,
    w: Optional[float],
    trials: int,
    seed: int,
    distribution: Distribution = Distribution.RADEMACHER,
) -> CollisionReport:
    """Hashes x and y with `trials` independent families and counts equal codes."""
    kind = FamilyKind(family_kind)
    if x.shape != y.shape:
        raise DimensionError(f"shape mismatch: {x.shape} vs {y.shape}")
    if trials < 1:
        raise ParameterError(f"trials must be positive, got {trials}")
    if kind.is_e2lsh and w is None:
        raise ParameterError(f"{kind.value} needs a quantization width w")

    collisions = 0
    for t in range(trials):
        family = make_family(kind, x.shape, rank, w, seed, t, distribution)
        collisions += apply_family(family, x) == apply_family(family, y)

    analytic = analytic_collision_rate(kind, x, y, w)
    setting = {
        "family": kind.value,
        "shape": str(x.shape),
        "rank": rank,
        "w": w,
        "distance": frobenius_distance(x, y),
        "angle": angle_between(x, y),
    }
    report = CollisionReport(
        setting=setting,
        trials=trials,
        empirical_rate=collisions / trials,
        analytic_rate=analytic,
        band_3sigma=binomial_band(analytic, trials),
    )
    if report.widened:
        logger.warning(
            f"{kind.value}: only {trials} trials, acceptance band widened to "
            f"+/-{report.band_3sigma:.4f}"
        )
    logger.debug(
        f"{kind.value} collision: empirical {report.empirical_rate:.4f} vs "
        f"analytic {analytic:.4f} (+/-{report.band_3sigma:.4f})"
    )
    return report


def joint_agreement(a: CollisionReport, b: CollisionReport, sigmas: float = 3.0) -> bool:
    """Whether two empirical rates agree within their combined binomial band."""
    variance = (
        a.analytic_rate * (1.0 - a.analytic_rate) / a.trials
        + b.analytic_rate * (1.0 - b.analytic_rate) / b.trials
    )
    return abs(a.empirical_rate - b.empirical_rate) <= max(
        sigmas * math.sqrt(variance), 1e-12
    )


def projection_samples(
    x: AnyTensor,
    y: Optional[AnyTensor],
    kind,
    rank: int,
    samples: int,
    seed: int,
    distribution: Distribution = Distribution.RADEMACHER,
) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """<P_s, x> (and <P_s, y>) for s = 0..samples-1."""
    if y is not None and y.shape != x.shape:
        raise DimensionError(f"shape mismatch: {x.shape} vs {y.shape}")
    cfg = SamplerConfig(
        shape=x.shape,
        rank=rank,
        distribution=distribution,
        decomposition=Decomposition(kind),
        seed=seed,
    )
    u = np.empty(samples)
    v = np.empty(samples) if y is not None else None
    for s in range(samples):
        projection = sample(cfg.for_component(s))
        u[s] = inner(projection, x)
        if v is not None:
            v[s] = inner(projection, y)
    return u, v


@dataclass(frozen=True)
class MomentCheck:
    name: str
    estimate: float
    target: float
    band_3sigma: float

    @property
    def passed(self) -> bool:
        return abs(self.estimate - self.target) <= self.band_3sigma


@dataclass(frozen=True)
class MomentReport:
    kind: str
    rank: int
    samples: int
    checks: list[MomentCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> MomentCheck:
        return next(c for c in self.checks if c.name == name)


def projection_moments(
    x: AnyTensor,
    y: Optional[AnyTensor] = None,
    kind="cp",
    rank: int = 1,
    samples: int = 20000,
    seed: int = 0,
    distribution: Distribution = Distribution.RADEMACHER,
) -> MomentReport:
    """Sample mean/variance of <P, x> and covariance with <P, y> against 0, ||x||^2, <x, y>."""
    if samples < 1000:
        raise ParameterError(f"moment estimates need at least 1000 samples, got {samples}")
    u, v = projection_samples(x, y, kind, rank, samples, seed, distribution)
    variance_target = inner(x, x)

    centered = u - u.mean()
    fourth = float(np.mean(centered**4))
    sample_variance = float(np.var(u, ddof=1))
    checks = [
        MomentCheck(
            "mean",
            float(u.mean()),
            0.0,
            3.0 * math.sqrt(variance_target / samples),
        ),
        MomentCheck(
            "variance",
            sample_variance,
            variance_target,
            3.0 * math.sqrt(max(fourth - sample_variance**2, 0.0) / samples),
        ),
    ]
    if v is not None:
        products = centered * (v - v.mean())
        checks.append(
            MomentCheck(
                "covariance",
                float(products.sum() / (samples - 1)),
                inner(x, y),
                3.0 * float(np.std(products, ddof=1)) / math.sqrt(samples),
            )
        )
    report = MomentReport(Decomposition(kind).value, rank, samples, checks)
    for c in checks:
        logger.debug(
            f"{report.kind} moment {c.name}: {c.estimate:.5f} vs {c.target:.5f} "
            f"(+/-{c.band_3sigma:.5f})"
        )
    return report


@dataclass(frozen=True)
class NormalityReport:
    kind: str
    rank: int
    statistic: float
    critical_value: float
    p_value: float
    samples: int
    rank_condition: RankConditionReport
    label: str = ASYMPTOTIC_LABEL

    @property
    def passed(self) -> bool:
        return self.statistic < self.critical_value

    @property
    def asymptotic_regime_reached(self) -> bool:
        return not self.rank_condition.exceeded


def normality_test(
    x: AnyTensor,
    kind="cp",
    rank: int = 1,
    samples: int = 50000,
    seed: int = 0,
    distribution: Distribution = Distribution.RADEMACHER,
) -> NormalityReport:
    """KS test of <P, x> / ||x||_F against N(0, 1) at alpha = 0.001."""
    if samples < 10000:
        raise ParameterError(f"the KS test needs at least 10000 samples, got {samples}")
    norm = frobenius_norm(x)
    if norm == 0.0:
        raise ParameterError("cannot standardize projections of a zero tensor")
    u, _ = projection_samples(x, None, kind, rank, samples, seed, distribution)
    result = stats.kstest(u / norm, "norm")
    condition = rank_condition_check(x.shape, rank, kind)
    report = NormalityReport(
        kind=Decomposition(kind).value,
        rank=rank,
        statistic=float(result.statistic),
        critical_value=float(stats.kstwo.ppf(1.0 - KS_ALPHA, samples)),
        p_value=float(result.pvalue),
        samples=samples,
        rank_condition=condition,
    )
    if not report.asymptotic_regime_reached:
        logger.warning(
            f"Normality test at shape {x.shape}, R={rank}: {condition.summary()}"
        )
    return report


def estimate_angle(a: HashVector, b: HashVector) -> float:
    """Angle between two tensors from their SRP codes."""
    return angle_estimator(a.hamming_fraction(b))
