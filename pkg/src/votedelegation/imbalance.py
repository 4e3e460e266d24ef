"""Imbalance indices of a weight vector and Pearson correlation.

The Theil index here is ``mean(w * ln(w / mu))``, i.e. without dividing
``w`` by the mean first, so it is not scale invariant.  Pass
``standardized_theil=True`` for the textbook ``mean((w/mu) * ln(w/mu))``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import UndefinedCorrelationError, ValidationError


@dataclass(frozen=True)
class ImbalanceMeasures:
    gini: float
    variance: float
    theil: float
    hoover: float

    def to_dict(self) -> dict:
        return asdict(self)


def _as_real_weights(values) -> np.ndarray:
    w = np.asarray(values, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValidationError("weights must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValidationError("weights must be finite and non-negative")
    if not w.sum() > 0:
        raise ValidationError("imbalance indices need a positive total weight")
    return w


def gini(values) -> float:
    """Gini coefficient from ascending cumulative shares.

    ``(n + 1 - 2 * sum(cum_i / cum_n)) / n``; 0 for perfect equality and
    ``(n - 1) / n`` when a single holder owns everything.
    """
    w = np.sort(_as_real_weights(values))
    cum = np.cumsum(w)
    n = w.size
    return (n + 1 - 2 * math.fsum(cum / cum[-1])) / n


def variance(values) -> float:
    w = _as_real_weights(values)
    return float(np.mean((w - w.mean()) ** 2))


def theil(values, standardized: bool = False) -> float:
    w = _as_real_weights(values)
    ratio = w / w.mean()
    # 0 * ln(0) is taken as 0.
    logs = np.log(ratio, out=np.zeros_like(ratio), where=ratio > 0)
    scale = ratio if standardized else w
    return float(np.mean(scale * logs))


def hoover(values) -> float:
    w = _as_real_weights(values)
    return float(0.5 * np.abs(w - w.mean()).sum() / w.sum())


def imbalance_measures(values, standardized_theil: bool = False) -> ImbalanceMeasures:
    return ImbalanceMeasures(
        gini=gini(values),
        variance=variance(values),
        theil=theil(values, standardized=standardized_theil),
        hoover=hoover(values),
    )


def pearson(xs, ys) -> float:
    """Product-moment correlation; raises for constant or too-short input."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("pearson needs two 1-d sequences of equal length")
    if x.size < 2:
        raise UndefinedCorrelationError("undefined correlation: need at least 2 points")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedCorrelationError("undefined correlation: constant input")
    dx = x - x.mean()
    dy = y - y.mean()
    sx, sy = np.abs(dx).max(), np.abs(dy).max()
    if sx == 0 or sy == 0:
        raise UndefinedCorrelationError("undefined correlation: constant input")
    # Rescale deviations to unit max so tiny or huge spreads neither underflow nor overflow.
    dx, dy = dx / sx, dy / sy
    r = float(dx @ dy) / math.sqrt(float(dx @ dx) * float(dy @ dy))
    return max(-1.0, min(1.0, r))
