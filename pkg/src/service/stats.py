import math

from scipy.stats import norm


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """
    Two-sided Wilson score interval for a binomial proportion.

    Examples:
        >>> low, high = wilson_interval(5, 10)
        >>> round(low, 4), round(high, 4)
        (0.2366, 0.7634)
    """
    if trials <= 0:
        return 0.0, 1.0
    z = float(norm.ppf(0.5 + confidence / 2))
    p = successes / trials
    z2 = z * z
    denominator = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denominator
    margin = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denominator
    low = 0.0 if successes == 0 else max(0.0, center - margin)
    high = 1.0 if successes == trials else min(1.0, center + margin)
    return low, high


def pooled_standard_error(successes_a: int, trials_a: int, successes_b: int, trials_b: int) -> float:
    """Standard error of the difference of two proportions under a pooled rate."""
    pooled = (successes_a + successes_b) / (trials_a + trials_b)
    return math.sqrt(pooled * (1 - pooled) * (1 / trials_a + 1 / trials_b))
