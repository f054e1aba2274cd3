"""Empirical quantiles on small integer-valued samples."""
import math
from fractions import Fraction

import numpy as np

from .errors import InputError


def nearest_rank(values, p):
    """Smallest sample value whose cumulative frequency reaches ``p`` percent.

    ``p`` is parsed through its decimal string so that levels such as 97.5
    produce exact ranks (``ceil(0.975 * 100) == 98``).
    """
    x = np.sort(np.asarray(values, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise InputError("nearest_rank of an empty sample")
    frac = Fraction(str(p)) / 100
    if not 0 < frac <= 1:
        raise InputError(f"percentile level must be in (0, 100], got {p}")
    k = max(1, math.ceil(frac * n))
    return float(x[k - 1])


def percentile_rank(value, sorted_values):
    """Percentage of the sample at or below ``value`` (empirical CDF x 100)."""
    n = len(sorted_values)
    if n == 0:
        raise InputError("percentile_rank against an empty sample")
    below = np.searchsorted(sorted_values, value, side="right")
    return 100.0 * below / n
