"""Comparison of SIMCA and BCS rankings, and checks on published tables."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import InputError, RankDeficiencyError, UndefinedCorrelationError

HISTOGRAM_GROUPS = ("Artif75%", "Artif25%", "Best50", "Other")


def natural_key(rid):
    """Sort key putting R_2 before R_10."""
    return tuple(int(t) if t.isdigit() else t for t in re.split(r"(\d+)", str(rid)))


def average_ranks(values):
    """1-based ranks with ties sharing their mean rank."""
    x = np.asarray(values, dtype=float)
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    ranks = np.empty(x.size)
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and xs[j + 1] == xs[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise InputError("spearman needs two 1-D sequences of equal length")
    if a.size < 2:
        raise InputError("spearman needs at least 2 observations")
    ra, rb = average_ranks(a), average_ranks(b)
    ra -= ra.mean()
    rb -= rb.mean()
    den = math.sqrt(float(ra @ ra) * float(rb @ rb))
    if den == 0:
        raise UndefinedCorrelationError("rank variance is zero; Spearman correlation undefined")
    return max(-1.0, min(1.0, float(ra @ rb) / den))


def top_k_overlap(rank_a, rank_b, k):
    """Size of the intersection of the two top-k sets.

    Rankings are mappings from researcher id to rank (1 = best).
    """
    if k > len(rank_a) or k > len(rank_b):
        raise InputError(f"k={k} exceeds the number of ranked researchers")
    top_a = {rid for rid, r in rank_a.items() if r <= k}
    top_b = {rid for rid, r in rank_b.items() if r <= k}
    return len(top_a & top_b)


def fit_standardization_oracle(indicators, bcs_values, weights):
    """Least-squares fit of 1/mu in bcs = sum_k w_k * x_k / mu_k.

    Returns the fitted positive means and the residual RMS.
    """
    x = np.asarray(indicators, dtype=float)
    y = np.asarray(bcs_values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if x.ndim != 2 or x.shape[0] != y.size or x.shape[1] != w.size:
        raise InputError("indicator matrix, BCS values and weights do not align")
    if x.shape[0] < x.shape[1]:
        raise InputError(f"need at least {x.shape[1]} rows to fit, got {x.shape[0]}")
    design = x * w
    recip, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise RankDeficiencyError(f"design has rank {rank} < {design.shape[1]}")
    if np.any(recip <= 0):
        raise RankDeficiencyError(f"fitted reciprocals are not all positive: {recip}")
    resid = y - design @ recip
    return 1.0 / recip, float(np.sqrt(np.mean(resid ** 2)))


@dataclass(frozen=True)
class RankRow:
    researcher_id: str
    bcs: float
    bcs_rank: int
    translated_log: float
    simca_rank: int
    accepted: bool | None = None
    band: str = ""
    indicators: tuple[float, ...] | None = None


def _ranks(ids, values, descending):
    key = (lambda i: (-values[i], natural_key(ids[i]))) if descending else \
        (lambda i: (values[i], natural_key(ids[i])))
    order = sorted(range(len(ids)), key=key)
    ranks = [0] * len(ids)
    for r, i in enumerate(order, start=1):
        ranks[i] = r
    return ranks


def band_label(simca_rank, bands_k=10, limit=50):
    if simca_rank > limit:
        return ""
    return f"Best {math.ceil(simca_rank / bands_k) * bands_k}"


def rank_report(ids, bcs_values, translated_logs, accepted=None, indicators=None,
                bands_k=10, band_limit=50):
    """Rows sorted by BCS rank, with SIMCA rank and band.

    BCS ranks descend in score, SIMCA ranks ascend in translated log. Ties
    resolve to the lowest researcher id.
    """
    ids = [str(i) for i in ids]
    n = len(ids)
    if not (len(bcs_values) == len(translated_logs) == n):
        raise InputError("ids, BCS and SIMCA scores must be aligned")
    if len(set(ids)) != n:
        raise InputError("duplicate researcher ids")
    b = [float(v) for v in bcs_values]
    t = [float(v) for v in translated_logs]
    br = _ranks(ids, b, descending=True)
    sr = _ranks(ids, t, descending=False)
    rows = [
        RankRow(
            researcher_id=ids[i], bcs=b[i], bcs_rank=br[i], translated_log=t[i],
            simca_rank=sr[i],
            accepted=None if accepted is None else bool(accepted[i]),
            band=band_label(sr[i], bands_k, band_limit),
            indicators=None if indicators is None else tuple(float(v) for v in indicators[i]),
        )
        for i in range(n)
    ]
    return sorted(rows, key=lambda r: r.bcs_rank)


def histogram_data(groups, bin_width):
    """Shared fixed-width bins over all groups and per-group counts.

    Bins are half-open ``[left, right)`` except the last, which is closed.
    """
    if not bin_width > 0:
        raise InputError("bin_width must be positive")
    arrays = {g: np.asarray(v, dtype=float).ravel() for g, v in groups.items()}
    allv = np.concatenate([a for a in arrays.values()]) if arrays else np.array([])
    if allv.size == 0:
        raise InputError("histogram of empty input")
    lo, hi = float(allv.min()), float(allv.max())
    n_bins = max(1, math.ceil((hi - lo) / bin_width - 1e-9))
    edges = lo + bin_width * np.arange(n_bins + 1)
    counts = {}
    for g, a in arrays.items():
        idx = np.clip(np.floor((a - lo) / bin_width + 1e-12).astype(int), 0, n_bins - 1)
        counts[g] = np.bincount(idx, minlength=n_bins)
    return edges, counts
