# qdsig/utils/stats.py
import math
from typing import Tuple


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion"""
    if trials == 0:
        return (0.0, 0.0)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z * math.sqrt((phat * (1 - phat) / trials) + (z * z / (4 * trials * trials)))) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def binomial_sigma(p: float, trials: int) -> float:
    """Standard deviation of the empirical rate of `trials` Bernoulli(p) draws"""
    if trials <= 0:
        return 0.0
    return math.sqrt(max(p * (1.0 - p), 0.0) / trials)


def within_sigma(rate: float, expected: float, trials: int, k: float = 3.0) -> bool:
    return abs(rate - expected) <= k * binomial_sigma(expected, trials) + 1e-12
