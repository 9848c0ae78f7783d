"""Analytic collision probabilities and their inverses."""

import math

from scipy import integrate, special, stats

from errors import ParameterError

QUADRATURE_TOLERANCE = 1e-10
NEGLIGIBLE_TAIL = 40.0


def e2lsh_collision_oracle(r: float, w: float) -> float:
    """
    Pr[g(X) = g(Y)] for ||X - Y|| = r: the integral over [0, w] of
    (1/r) f(t/r) (1 - t/w), f the density of |N(0, 1)|.
    """
    if not (r > 0 and w > 0):
        raise ParameterError(f"r and w must be positive, got r={r}, w={w}")
    # Substituting s = t/r leaves a function of c = w/r only.
    c = w / r

    def integrand(s):
        return 2.0 * stats.norm.pdf(s) * (1.0 - s / c)

    # The half-normal density is below 1e-300 past s = 40.
    value, _ = integrate.quad(
        integrand, 0.0, min(c, NEGLIGIBLE_TAIL), epsabs=QUADRATURE_TOLERANCE, epsrel=0.0, limit=200
    )
    return min(1.0, max(0.0, value))


def e2lsh_collision_closed_form(r: float, w: float) -> float:
    if not (r > 0 and w > 0):
        raise ParameterError(f"r and w must be positive, got r={r}, w={w}")
    c = w / r
    return (
        1.0
        - 2.0 * special.ndtr(-c)
        - (2.0 / (math.sqrt(2.0 * math.pi) * c)) * -math.expm1(-c * c / 2.0)
    )


def srp_collision_oracle(theta: float) -> float:
    if not 0.0 <= theta <= math.pi:
        raise ParameterError(f"theta must lie in [0, pi], got {theta}")
    return 1.0 - theta / math.pi


def angle_estimator(hamming_fraction: float) -> float:
    """Angle from the SRP disagreement rate; inverse of srp_collision_oracle."""
    if not 0.0 <= hamming_fraction <= 1.0:
        raise ParameterError(
            f"hamming fraction must lie in [0, 1], got {hamming_fraction}"
        )
    return math.pi * hamming_fraction


def amplified_probability(p: float, K: int, L: int) -> float:
    """Retrieval probability of a pair under K-way AND, L-way OR banding."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    if K < 1 or L < 1:
        raise ParameterError(f"K and L must be positive, got K={K}, L={L}")
    return 1.0 - (1.0 - p**K) ** L


def binomial_band(p: float, trials: int, sigmas: float = 3.0) -> float:
    if trials < 1:
        raise ParameterError(f"trials must be positive, got {trials}")
    return sigmas * math.sqrt(p * (1.0 - p) / trials)
