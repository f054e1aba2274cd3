"""Synthetic researcher populations matched to published descriptive statistics.

Marginals are zero-inflated: lognormal for FSS, negative binomial for the
count indicators. The zero mass of each column is chosen so that the
marginal median matches the published one. A one-factor Gaussian copula
makes the indicators co-vary the way real researchers' profiles do.
Uniforms are stratified per column, which keeps sample means and standard
deviations close to target at n around 500.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .errors import InputError
from .indicators import INDICATOR_NAMES
from .io import TABLE1, IndicatorTable, _finish, _Reader, fixture_text

BUILTIN_STATS = {"bio14": "table1_bio14.csv", "med04": "table1_med04.csv"}
_ZERO_GRID = np.round(np.arange(0.0, 0.96, 0.01), 2)


@dataclass(frozen=True)
class IndicatorStats:
    mean: float
    median: float
    min: float
    max: float
    sd: float

    def check(self, name=""):
        if self.sd < 0:
            raise InputError(f"{name}: negative standard deviation")
        if not self.min <= self.median <= self.max:
            raise InputError(f"{name}: infeasible stats, need min <= median <= max "
                             f"({self.min}, {self.median}, {self.max})")
        if not self.min <= self.mean <= self.max:
            raise InputError(f"{name}: mean {self.mean} outside [{self.min}, {self.max}]")
        if self.min < 0:
            raise InputError(f"{name}: indicators cannot be negative")


@dataclass(frozen=True)
class PopulationStats:
    columns: dict  # indicator name -> IndicatorStats

    def __getitem__(self, name):
        return self.columns[name]

    @classmethod
    def load(cls, name_or_path):
        """Read per-indicator descriptive statistics from a builtin name or a CSV path."""
        key = str(name_or_path).lower().replace("/", "")
        if key in BUILTIN_STATS:
            text, source = fixture_text(BUILTIN_STATS[key]), BUILTIN_STATS[key]
        else:
            p = Path(name_or_path)
            if not p.exists():
                raise InputError(f"no such statistics file or builtin: {name_or_path}")
            text, source = p.read_text(), str(p)
        r = _Reader(source, TABLE1, text)
        cols = {}
        for ln, rec in r.rows():
            vals = [r.number(ln, rec, k) for k in ("mean", "median", "min", "max", "sd")]
            if rec["indicator"] not in INDICATOR_NAMES:
                r.issue(ln, f"unknown indicator {rec['indicator']!r}")
                continue
            if None not in vals:
                cols[rec["indicator"]] = IndicatorStats(*vals)
        _finish(r)
        absent = [n for n in INDICATOR_NAMES if n not in cols]
        if absent:
            raise InputError(f"{source}: missing indicator(s) {absent}")
        return cls(cols)


def _lognormal_part(mean_pos, second_pos):
    var = second_pos - mean_pos ** 2
    if var <= 0:
        return None
    s2 = math.log(1.0 + var / mean_pos ** 2)
    return math.log(mean_pos) - 0.5 * s2, math.sqrt(s2)


def _negbin_part(mean_pos, second_pos):
    var = second_pos - mean_pos ** 2
    if var <= 0:
        return None
    if var <= mean_pos:
        return ("poisson", mean_pos)
    return ("nbinom", mean_pos ** 2 / (var - mean_pos), mean_pos / var)


def _quantile(kind, params, pi0, u):
    """Inverse CDF of the zero-inflated marginal."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > pi0
    v = (u[pos] - pi0) / (1.0 - pi0)
    if kind == "lognormal":
        mu, sigma = params
        out[pos] = np.exp(mu + sigma * stats.norm.ppf(v))
    elif params[0] == "poisson":
        out[pos] = stats.poisson.ppf(v, params[1])
    else:
        out[pos] = stats.nbinom.ppf(v, params[1], params[2])
    return out


def fit_marginal(st: IndicatorStats, integer):
    """Zero mass and positive-part parameters reproducing mean, sd and median.

    Mean and sd are matched exactly for every zero mass on the grid; among
    feasible zero masses the one whose median is closest to the target wins
    (smallest zero mass on ties).
    """
    kind = "negbin" if integer else "lognormal"
    second = st.sd ** 2 + st.mean ** 2
    best = None
    for pi0 in _ZERO_GRID:
        keep = 1.0 - pi0
        part = (_negbin_part if integer else _lognormal_part)(st.mean / keep, second / keep)
        if part is None:
            continue
        med = float(_quantile(kind, part, pi0, np.array([0.5]))[0])
        err = abs(med - st.median)
        if best is None or err < best[0] - 1e-12:
            best = (err, pi0, part)
    if best is None:
        raise InputError(f"cannot fit a zero-inflated marginal to {st}")
    return kind, best[2], float(best[1])


def synthesize_population(stats_: PopulationStats, n, seed, correlation=0.6,
                          hca_nested=True, prefix="S_", field_code=""):
    """Deterministic synthetic indicator table of ``n`` researchers."""
    if n < 2:
        raise InputError("need at least 2 synthetic researchers")
    for name in INDICATOR_NAMES:
        stats_[name].check(name)
    rng = np.random.default_rng(seed)
    p = len(INDICATOR_NAMES)
    common = rng.standard_normal(n)
    noise = rng.standard_normal((n, p))
    latent = math.sqrt(correlation) * common[:, None] + math.sqrt(1 - correlation) * noise
    jitter = rng.random((n, p))
    out = np.zeros((n, p))
    for j, name in enumerate(INDICATOR_NAMES):
        st = stats_[name]
        if st.sd == 0:
            out[:, j] = st.mean
            continue
        rank = np.argsort(np.argsort(latent[:, j], kind="stable"), kind="stable")
        u = (rank + jitter[:, j]) / n
        kind, params, pi0 = fit_marginal(st, integer=j > 0)
        out[:, j] = _quantile(kind, params, pi0, u)
    if hca_nested:
        out[:, 2] = np.maximum(out[:, 2], out[:, 1])
    width = len(str(n))
    ids = [f"{prefix}{i + 1:0{width}d}" for i in range(n)]
    return IndicatorTable(ids, [field_code] * n, out)
