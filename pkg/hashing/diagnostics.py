import logging
import math
from dataclasses import dataclass

from errors import ParameterError
from projections.sampler import Decomposition
from tensors.formats import as_shape

logger = logging.getLogger(__name__)

HEURISTIC_LABEL = (
    "heuristic: the rank condition is asymptotic in prod(d_n); "
    "this compares magnitudes at a finite shape"
)


@dataclass(frozen=True)
class RankConditionReport:
    lhs: float
    rhs: float
    ratio: float
    satisfied_margin: float
    unsatisfiable_order: bool
    label: str = HEURISTIC_LABEL

    @property
    def exceeded(self) -> bool:
        """True when lhs is not below rhs, i.e. the regime is not reached."""
        return self.unsatisfiable_order or self.ratio > 1.0

    def summary(self) -> str:
        if self.unsatisfiable_order:
            return "asymptotic condition unsatisfiable at this order"
        if self.ratio > 1.0:
            return f"asymptotic regime not reached (lhs/rhs = {self.ratio:.3f})"
        return f"rank condition holds in magnitude (lhs/rhs = {self.ratio:.3f})"


def rank_condition_check(shape, rank: int, kind) -> RankConditionReport:
    """
    Compares sqrt(R) N^(4/5) (CP) or sqrt(R^(N-1)) N^(4/5) (TT) with
    (prod d_n)^((3N-8)/(10N)). The exponent is negative for N <= 2, where
    the right-hand side shrinks with size and the condition can never hold.
    """
    shape = as_shape(shape)
    if rank < 1:
        raise ParameterError(f"rank must be at least 1, got {rank}")
    kind = Decomposition(kind)
    order = shape.order

    rank_term = rank if kind == Decomposition.CP else float(rank) ** (order - 1)
    lhs = math.sqrt(rank_term) * order ** 0.8
    exponent = (3 * order - 8) / (10 * order)
    log_size = sum(math.log(d) for d in shape.dims)
    rhs = math.exp(exponent * log_size)
    ratio = lhs / rhs

    report = RankConditionReport(
        lhs=lhs,
        rhs=rhs,
        ratio=ratio,
        satisfied_margin=1.0 - ratio,
        unsatisfiable_order=3 * order - 8 <= 0,
    )
    logger.debug(f"Rank condition {kind.value} R={rank} shape={shape}: {report.summary()}")
    return report
