"""Bibliometric performance indicators per researcher.

Five indicators are produced for each researcher: fractional scientific
strength (FSS), counts of highly cited articles in the top 1% and top 5% of
their (year, subject category) cell, and counts of first- and last-author
articles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InputError, MissingBaselineError
from .quantiles import nearest_rank, percentile_rank

INDICATOR_NAMES = ("fss", "hca1", "hca5", "first_a", "last_a")

BYLINE = "byline"
UNIFORM = "uniform"
COUNTING_MODES = (BYLINE, UNIFORM)


@dataclass(frozen=True)
class Authorship:
    pub_id: str
    position: int
    affiliation_id: str
    researcher_id: str | None = None


@dataclass(frozen=True)
class PublicationRecord:
    pub_id: str
    year: int
    subject_categories: tuple[str, ...]
    citations: int
    byline: tuple[Authorship, ...]

    def __post_init__(self):
        if self.citations < 0:
            raise InputError(f"{self.pub_id}: negative citation count")
        if not self.subject_categories:
            raise InputError(f"{self.pub_id}: no subject category")
        check_byline(self.byline, self.pub_id)

    @property
    def n_authors(self):
        return len(self.byline)


def check_byline(byline, pub_id=""):
    if not byline:
        raise InputError(f"{pub_id}: empty byline")
    positions = sorted(a.position for a in byline)
    if positions != list(range(1, len(byline) + 1)):
        raise InputError(f"{pub_id}: byline positions {positions} are not 1..{len(byline)}")


@dataclass(frozen=True)
class BaselineCell:
    """Normalization context for one (year, subject category)."""

    cited_mean: float
    thresholds: Mapping[float, float]
    citations: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.cited_mean > 0:
            raise InputError(f"cited_mean must be > 0, got {self.cited_mean}")
        levels = sorted(self.thresholds)
        vals = [self.thresholds[k] for k in levels]
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise InputError(f"thresholds not non-decreasing in percentile level: {dict(self.thresholds)}")

    def rank_of(self, citations):
        """Percentile rank of a citation count inside this cell.

        With the cell's citation distribution available this is the empirical
        CDF; otherwise the highest threshold level the count reaches (0 if none).
        """
        if self.citations is not None:
            return percentile_rank(citations, self.citations)
        reached = [lvl for lvl, thr in self.thresholds.items() if citations >= thr]
        return float(max(reached)) if reached else 0.0


class ReferenceBaseline:
    """Per (year, category) cited means and citation percentile thresholds."""

    def __init__(self, cells: Mapping[tuple[int, str], BaselineCell]):
        self.cells = dict(cells)

    def __contains__(self, key):
        return key in self.cells

    def __len__(self):
        return len(self.cells)

    def cell(self, year, category):
        try:
            return self.cells[(year, category)]
        except KeyError:
            raise MissingBaselineError([(year, category)]) from None

    @classmethod
    def from_corpus(cls, records: Iterable[tuple[int, str, int]], levels=(95, 99)):
        """Build cells from (year, category, citations) reference records.

        Uncited publications are excluded from the cited mean but kept in the
        percentile distribution.
        """
        grouped: dict[tuple[int, str], list[int]] = {}
        for year, cat, c in records:
            grouped.setdefault((int(year), str(cat)), []).append(int(c))
        cells = {}
        for key, counts in grouped.items():
            arr = np.sort(np.asarray(counts, dtype=float))
            cited = arr[arr > 0]
            if cited.size == 0:
                raise InputError(f"reference cell {key} has no cited publications")
            cells[key] = BaselineCell(
                cited_mean=float(cited.mean()),
                thresholds={float(l): nearest_rank(arr, l) for l in levels},
                citations=arr,
            )
        return cls(cells)


@dataclass(frozen=True)
class ResearcherProfile:
    researcher_id: str
    field_code: str
    years_active: int
    contributions: tuple[tuple[PublicationRecord, int], ...] = ()

    def __post_init__(self):
        if self.years_active < 1:
            raise InputError(f"{self.researcher_id}: years_active must be >= 1")
        for pub, pos in self.contributions:
            if not any(a.researcher_id == self.researcher_id for a in pub.byline):
                raise InputError(f"{self.researcher_id} is not in the byline of {pub.pub_id}")
            if not 1 <= pos <= pub.n_authors:
                raise InputError(f"{self.researcher_id}: position {pos} outside byline of {pub.pub_id}")


@dataclass(frozen=True)
class IndicatorVector:
    fss: float
    hca1: int
    hca5: int
    first_a: int
    last_a: int

    def __post_init__(self):
        if min(self.fss, self.hca1, self.hca5, self.first_a, self.last_a) < 0:
            raise InputError(f"negative indicator in {self}")

    def as_array(self):
        return np.array([self.fss, self.hca1, self.hca5, self.first_a, self.last_a], dtype=float)

    @classmethod
    def from_sequence(cls, values: Sequence[float]):
        fss, hca1, hca5, first_a, last_a = values
        return cls(float(fss), int(hca1), int(hca5), int(first_a), int(last_a))


@dataclass(frozen=True)
class AuthorWeights:
    """Byline credit table for life-science counting.

    ``shared_*`` applies when first and last author share a university,
    ``split_*`` when they do not.
    """

    shared_first_last: float = 0.40
    split_first_last: float = 0.30
    split_second: float = 0.15

    def __post_init__(self):
        if not 0 < 2 * self.shared_first_last <= 1:
            raise InputError("shared first/last weight must be in (0, 0.5]")
        if not 0 < 2 * (self.split_first_last + self.split_second) <= 1:
            raise InputError("split first/last + second weights must sum to at most 0.5")


DEFAULT_WEIGHTS = AuthorWeights()


def fractional_contribution(position, byline, mode=BYLINE, weights=DEFAULT_WEIGHTS):
    """Share of a publication credited to the author at ``position`` (1-based).

    ``uniform`` gives 1/n. ``byline`` weights first and last authors: 40% each
    when they share a university, else 30% each with 15% to the second and
    penultimate authors; what is left is split evenly among everyone else.
    Bylines of one and two authors get 1 and 0.5. When a rule leaves no
    "other" authors to absorb the remainder (three or four authors under the
    split rule), the remainder goes to the second/penultimate authors.
    """
    n = len(byline)
    if n == 0:
        raise InputError("empty byline")
    if not isinstance(position, (int, np.integer)) or not 1 <= position <= n:
        raise InputError(f"position {position!r} outside byline of length {n}")
    if mode == UNIFORM:
        return 1.0 / n
    if mode != BYLINE:
        raise InputError(f"unknown counting mode {mode!r}")
    if n == 1:
        return 1.0
    if n == 2:
        return 0.5

    ordered = sorted(byline, key=lambda a: a.position)
    same = ordered[0].affiliation_id == ordered[-1].affiliation_id
    if same:
        if position in (1, n):
            return weights.shared_first_last
        return (1.0 - 2 * weights.shared_first_last) / (n - 2)

    if position in (1, n):
        return weights.split_first_last
    rest = 1.0 - 2 * weights.split_first_last
    if n <= 4:
        # positions 2..n-1 are all "second or penultimate"
        return rest / (n - 2)
    if position in (2, n - 1):
        return weights.split_second
    return (rest - 2 * weights.split_second) / (n - 4)


def normalized_impact(pub: PublicationRecord, baseline: ReferenceBaseline, category: str):
    """Citations of ``pub`` divided by the cited mean of its (year, category) cell."""
    cell = baseline.cell(pub.year, category)
    if pub.citations == 0:
        return 0.0
    return pub.citations / cell.cited_mean


def assign_subject_category(pub: PublicationRecord, baseline: ReferenceBaseline):
    """Category where the publication ranks highest; ties go to the smallest code."""
    cats = list(pub.subject_categories)
    if len(cats) == 1:
        baseline.cell(pub.year, cats[0])
        return cats[0]
    ranked = []
    for cat in cats:
        if (pub.year, cat) in baseline:
            ranked.append((-baseline.cell(pub.year, cat).rank_of(pub.citations), cat))
    if not ranked:
        raise MissingBaselineError([(pub.year, c) for c in cats], [pub.pub_id])
    return min(ranked)[1]


def hca_flags(pub: PublicationRecord, baseline: ReferenceBaseline, category: str,
              inclusive=True, levels=(99, 95)):
    """(top-1%, top-5%) flags for ``pub`` in its assigned cell."""
    cell = baseline.cell(pub.year, category)
    flags = []
    for lvl in levels:
        thr = cell.thresholds.get(float(lvl))
        if thr is None:
            raise MissingBaselineError([(pub.year, category)], [pub.pub_id])
        flags.append(pub.citations >= thr if inclusive else pub.citations > thr)
    return flags[0], flags[1]


def compute_indicators(profile: ResearcherProfile, baseline: ReferenceBaseline, mode=BYLINE,
                       weights=DEFAULT_WEIGHTS, inclusive=True, hca5_band="nested"):
    """Indicator vector of one researcher.

    ``hca5_band="exclusive"`` counts top-5% articles that are not also top-1%.
    """
    if hca5_band not in ("nested", "exclusive"):
        raise InputError(f"unknown hca5_band {hca5_band!r}")
    missing, bad_pubs = [], []
    terms = []
    hca1 = hca5 = first_a = last_a = 0
    for pub, pos in profile.contributions:
        try:
            cat = assign_subject_category(pub, baseline)
            impact = normalized_impact(pub, baseline, cat)
            top1, top5 = hca_flags(pub, baseline, cat, inclusive=inclusive)
        except MissingBaselineError as exc:
            missing.extend(exc.missing)
            bad_pubs.append(pub.pub_id)
            continue
        terms.append(impact * fractional_contribution(pos, pub.byline, mode, weights))
        hca1 += top1
        if hca5_band == "nested":
            hca5 += top5
        else:
            hca5 += top5 and not top1
        first_a += pos == 1
        last_a += pos == pub.n_authors
    if missing:
        raise MissingBaselineError(missing, bad_pubs)
    # fsum is exact, so the result does not depend on contribution order
    fss = math.fsum(terms) / profile.years_active
    return IndicatorVector(fss, hca1, hca5, first_a, last_a)
