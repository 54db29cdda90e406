"""Independent Monte Carlo checks of a fitted cover: fresh-sample coverage
and an empirical quantile of the safety-level distribution.

These draw from the validation stream, which is disjoint from the
assessment stream for any base seed, so the checks never reuse fitting
data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import beta

from .distributions import STREAM_VALIDATION, sample
from .geometry import contains
from .safeset import safety_level


@dataclass(frozen=True)
class CoverageEstimate:
    p_hat: float
    ci_low: float
    n_samples: int

    def to_dict(self) -> dict:
        return {
            "p_hat": float(self.p_hat),
            "ci_low": float(self.ci_low),
            "M": int(self.n_samples),
        }


def clopper_pearson_lower(successes: int, n: int, confidence: float = 0.99) -> float:
    """One-sided lower confidence bound for a binomial proportion."""
    if not 0 <= successes <= n:
        raise ValueError("need 0 <= successes <= n")
    if successes == 0:
        return 0.0
    return float(beta.ppf(1.0 - confidence, successes, n - successes + 1))


def estimate_coverage(model, dist, theta, row, n_samples: int, seed: int) -> CoverageEstimate:
    """Fraction of fresh outputs inside the cover, with a 99% lower bound."""
    if n_samples < 1:
        raise ValueError("need at least one validation sample")
    x = sample(dist, n_samples, seed, stream=STREAM_VALIDATION)
    y = model.evaluate(x)
    inside = contains(theta, row, y)
    k = int(np.count_nonzero(inside))
    return CoverageEstimate(
        p_hat=k / n_samples,
        ci_low=clopper_pearson_lower(k, n_samples),
        n_samples=n_samples,
    )


def quantile_lower(values: np.ndarray, eps: float) -> float:
    """Lower-biased empirical eps-quantile: the (floor(eps*M)+1)-th smallest
    value. For eps -> 0 this is the sample minimum."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    if v.ndim != 1 or v.size == 0:
        raise ValueError("need a non-empty 1-D value array")
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    # guard decimal-exact products against float round-down
    idx = int(math.floor(eps * v.size + 1e-9))
    return float(v[min(idx, v.size - 1)])


def estimate_prl(model, dist, row, eps: float, n_samples: int, seed: int) -> float:
    """Plug-in estimate of the probabilistic robustness level: the empirical
    eps-quantile of fresh safety levels, lower-biased by convention."""
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    if n_samples < 100.0 / eps:
        raise ValueError(
            f"need at least 100/eps = {math.ceil(100.0 / eps)} samples for "
            f"a usable tail estimate, got {n_samples}"
        )
    x = sample(dist, n_samples, seed, stream=STREAM_VALIDATION)
    levels = safety_level(row, model.evaluate(x))
    return quantile_lower(levels, eps)


def empirical_min_safety(model, dist, row, n_samples: int, seed: int) -> float:
    """Minimum safety level over fresh samples; an upper bound on the true
    worst case that only tightens as the sample grows."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    x = sample(dist, n_samples, seed, stream=STREAM_VALIDATION)
    levels = safety_level(row, model.evaluate(x))
    return float(np.min(levels))
