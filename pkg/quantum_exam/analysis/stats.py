import dataclasses
from typing import Sequence, Tuple

import numpy as np
from scipy import stats

from ..core import InvalidArgumentError
from ..util import RandomSource


SIGNIFICANCE = 0.01


def wilson_interval(
    successes: int, trials: int, confidence: float = 0.95
) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return (0.0, 1.0)
    if not 0 <= successes <= trials:
        raise InvalidArgumentError(f"{successes} successes out of {trials} trials")
    p_hat = successes / trials
    z = stats.norm.ppf((1 + confidence) / 2)
    denominator = 1 + z**2 / trials
    centre = (p_hat + z**2 / (2 * trials)) / denominator
    spread = z * np.sqrt((p_hat * (1 - p_hat) + z**2 / (4 * trials)) / trials) / denominator
    return (max(0.0, float(centre - spread)), min(1.0, float(centre + spread)))


def interval_coverage(
    p: float,
    trials: int,
    repetitions: int,
    rng: RandomSource,
    confidence: float = 0.95,
) -> float:
    """Share of Wilson intervals, over binomial draws with known ``p``, that
    contain ``p``."""
    draws = rng.binomial(trials, p, size=repetitions)
    hits = 0
    for successes in draws:
        low, high = wilson_interval(int(successes), trials, confidence)
        hits += low <= p <= high
    return hits / repetitions


@dataclasses.dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    p_value: float
    dof: int

    @property
    def passed(self) -> bool:
        return self.p_value > SIGNIFICANCE


def uniformity(counts: Sequence[int]) -> ChiSquareResult:
    """Goodness of fit of ``counts`` against equal expected frequencies."""
    result = stats.chisquare(np.asarray(counts, dtype=float))
    return ChiSquareResult(
        statistic=float(result.statistic),
        p_value=float(result.pvalue),
        dof=len(counts) - 1,
    )


def independence(table: Sequence[Sequence[int]]) -> ChiSquareResult:
    """Chi-square test of independence on a contingency table."""
    statistic, p_value, dof, _ = stats.chi2_contingency(
        np.asarray(table, dtype=float), correction=False
    )
    return ChiSquareResult(statistic=float(statistic), p_value=float(p_value), dof=int(dof))
