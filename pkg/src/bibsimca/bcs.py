"""Deterministic Bibliometric Composite Score (BCS)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AbsentPositiveMeanError, InputError
from .indicators import INDICATOR_NAMES

DEFAULT_WEIGHTS = (0.50, 0.20, 0.10, 0.10, 0.10)


@dataclass(frozen=True)
class BcsConfig:
    weights: tuple[float, ...] = DEFAULT_WEIGHTS

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        object.__setattr__(self, "weights", w)
        if any(v < 0 for v in w):
            raise InputError(f"BCS weights must be non-negative: {w}")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise InputError(f"BCS weights must sum to 1, got {math.fsum(w)!r}")


@dataclass(frozen=True)
class StandardizationContext:
    """Mean of each indicator over researchers with a value above 0.

    ``None`` marks an indicator that is zero for everyone.
    """

    positive_means: tuple[float | None, ...]

    @classmethod
    def from_population(cls, matrix):
        x = np.asarray(matrix, dtype=float)
        means = []
        for j in range(x.shape[1]):
            pos = x[x[:, j] > 0, j]
            means.append(math.fsum(pos) / pos.size if pos.size else None)
        return cls(tuple(means))

    @property
    def absent(self):
        return [j for j, m in enumerate(self.positive_means) if m is None]

    def standardize(self, matrix, drop_absent=False):
        x = np.asarray(matrix, dtype=float)
        out = np.zeros_like(x)
        for j, mu in enumerate(self.positive_means):
            if mu is None:
                if not drop_absent:
                    raise AbsentPositiveMeanError(INDICATOR_NAMES[j] if j < len(INDICATOR_NAMES) else j)
                continue
            out[..., j] = x[..., j] / mu
        return out


def positive_mean_standardize(column):
    """Divide a non-negative column by the mean of its positive entries."""
    x = np.asarray(column, dtype=float)
    if x.size == 0:
        raise InputError("cannot standardize an empty column")
    if np.any(x < 0):
        raise InputError("indicator values must be non-negative")
    pos = x[x > 0]
    if pos.size == 0:
        raise AbsentPositiveMeanError()
    mu = math.fsum(pos) / pos.size
    return x / mu, mu


def bcs(standardized, config=BcsConfig()):
    """Weighted sum of one researcher's standardized indicators."""
    s = np.asarray(standardized, dtype=float)
    if s.shape != (len(config.weights),):
        raise InputError(f"expected {len(config.weights)} standardized values, got shape {s.shape}")
    return math.fsum(w * v for w, v in zip(config.weights, s))


def bcs_scores(matrix, config=BcsConfig(), context=None, drop_absent=False):
    """BCS of every row; the context defaults to the matrix's own positive means.

    Indicators without positive values contribute nothing when ``drop_absent``.
    """
    x = np.asarray(matrix, dtype=float)
    ctx = context or StandardizationContext.from_population(x)
    z = ctx.standardize(x, drop_absent=drop_absent)
    return np.array([bcs(row, config) for row in z]), ctx
