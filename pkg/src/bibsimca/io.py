"""CSV ingestion, validation and output.

Loaders collect every problem in a file before raising, so one run reports
all malformed rows at once.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DataValidationError, InputError, IntegrityError, ValidationIssue
from .indicators import (INDICATOR_NAMES, Authorship, BaselineCell, IndicatorVector,
                         PublicationRecord, ReferenceBaseline, ResearcherProfile)

PUBLICATIONS = ("pub_id", "year", "categories", "citations")
AUTHORSHIPS = ("pub_id", "position", "affiliation_id", "researcher_id")
RESEARCHERS = ("researcher_id", "field_code", "years_active")
BASELINE = ("year", "category", "cited_mean", "p95_threshold", "p99_threshold")
CORPUS = ("year", "category", "citations")
INDICATORS = ("researcher_id", "field_code") + INDICATOR_NAMES
TABLE1 = ("indicator", "mean", "median", "min", "max", "sd")
GOLDEN = ("researcher_id",) + INDICATOR_NAMES + ("bcs", "simca_score", "band")


@dataclass
class IndicatorTable:
    ids: list[str]
    field_codes: list[str]
    values: np.ndarray  # n x 5

    def __len__(self):
        return len(self.ids)

    def vectors(self):
        return [IndicatorVector.from_sequence(row) for row in self.values]

    def subset(self, mask):
        idx = np.flatnonzero(mask)
        return IndicatorTable([self.ids[i] for i in idx], [self.field_codes[i] for i in idx],
                              self.values[idx])


@dataclass
class RawDataset:
    profiles: list[ResearcherProfile]
    baseline: ReferenceBaseline


@dataclass
class GoldenTable:
    ids: list[str]
    values: np.ndarray
    bcs: np.ndarray
    simca_score: np.ndarray
    band: list[str]


@dataclass
class DataPaths:
    indicators: Path | None = None
    publications: Path | None = None
    authorships: Path | None = None
    researchers: Path | None = None
    baseline: Path | None = None
    reference_corpus: Path | None = None

    @property
    def precomputed(self):
        return self.indicators is not None


def parse_number(text, kind=float):
    """Parse a number, accepting a decimal comma as in the published tables."""
    t = text.strip()
    if "," in t and "." not in t:
        t = t.replace(",", ".")
    if kind is int:
        v = float(t)
        if v != int(v):
            raise ValueError(f"not an integer: {text!r}")
        return int(v)
    return float(t)


class _Reader:
    """Row iterator that records issues instead of raising."""

    def __init__(self, path, header, text=None):
        self.path = str(path)
        self.header = header
        self.issues: list[ValidationIssue] = []
        self._text = text

    def rows(self):
        text = self._text if self._text is not None else _read_text(self.path)
        sample = text.splitlines()[0] if text else ""
        delim = "\t" if "\t" in sample else (";" if ";" in sample else ",")
        reader = csv.reader(io.StringIO(text), delimiter=delim)
        try:
            got = [h.strip() for h in next(reader)]
        except StopIteration:
            self.issue(1, "empty file (no header)", "schema")
            return
        missing = [h for h in self.header if h not in got]
        if missing:
            self.issue(1, f"missing column(s) {missing}; header is {got}", "schema")
            return
        pos = {h: got.index(h) for h in got}
        for ln, row in enumerate(reader, start=2):
            if not any(c.strip() for c in row):
                continue
            if len(row) < len(got):
                row = row + [""] * (len(got) - len(row))
            yield ln, {h: row[pos[h]].strip() for h in got}

    def issue(self, line, message, kind="parse"):
        self.issues.append(ValidationIssue(self.path, line, message, kind))

    def number(self, line, rec, key, kind=float, minimum=None):
        try:
            v = parse_number(rec[key], kind)
        except (ValueError, KeyError):
            self.issue(line, f"{key}: cannot parse {rec.get(key)!r} as {kind.__name__}")
            return None
        if minimum is not None and v < minimum:
            self.issue(line, f"{key}: {v} is below {minimum}")
            return None
        return v


def _read_text(path):
    try:
        return Path(path).read_text(encoding="utf-8-sig")
    except FileNotFoundError:
        raise InputError(f"file not found: {path}") from None


def _finish(*readers):
    issues = [i for r in readers for i in r.issues]
    if issues:
        raise DataValidationError(issues)


def load_indicators(path, field_code=None, text=None):
    r = _Reader(path, INDICATORS, text)
    ids, codes, rows = [], [], []
    seen = set()
    for ln, rec in r.rows():
        vals = [r.number(ln, rec, "fss", float, 0)]
        vals += [r.number(ln, rec, k, int, 0) for k in INDICATOR_NAMES[1:]]
        rid = rec["researcher_id"]
        if not rid:
            r.issue(ln, "blank researcher_id")
            continue
        if rid in seen:
            r.issue(ln, f"duplicate researcher_id {rid}")
            continue
        seen.add(rid)
        if any(v is None for v in vals):
            continue
        if field_code and rec["field_code"] and rec["field_code"] != field_code:
            continue
        ids.append(rid)
        codes.append(rec["field_code"] or (field_code or ""))
        rows.append(vals)
    _finish(r)
    if not ids:
        raise InputError(f"{path}: no researchers")
    return IndicatorTable(ids, codes, np.array(rows, dtype=float))


def load_publications(path, window, text=None):
    r = _Reader(path, PUBLICATIONS, text)
    pubs = {}
    for ln, rec in r.rows():
        pid = rec["pub_id"]
        year = r.number(ln, rec, "year", int)
        cites = r.number(ln, rec, "citations", int, 0)
        cats = tuple(c.strip() for c in rec["categories"].split("|") if c.strip())
        if not pid:
            r.issue(ln, "blank pub_id")
            continue
        if pid in pubs:
            r.issue(ln, f"duplicate pub_id {pid}")
            continue
        if not cats:
            r.issue(ln, f"{pid}: no subject categories")
        if year is not None and not window[0] <= year <= window[1]:
            r.issue(ln, f"{pid}: year {year} outside observation window {window[0]}-{window[1]}",
                    "window")
            continue
        if year is None or cites is None or not cats:
            continue
        pubs[pid] = (year, cats, cites, ln)
    return pubs, r


def load_authorships(path, text=None):
    r = _Reader(path, AUTHORSHIPS, text)
    by_pub: dict[str, list[tuple[Authorship, int]]] = {}
    for ln, rec in r.rows():
        pos = r.number(ln, rec, "position", int, 1)
        if not rec["pub_id"]:
            r.issue(ln, "blank pub_id")
            continue
        if pos is None:
            continue
        a = Authorship(rec["pub_id"], pos, rec["affiliation_id"], rec["researcher_id"] or None)
        by_pub.setdefault(rec["pub_id"], []).append((a, ln))
    return by_pub, r


def load_researchers(path, text=None):
    r = _Reader(path, RESEARCHERS, text)
    out = {}
    for ln, rec in r.rows():
        t = r.number(ln, rec, "years_active", int, 1)
        rid = rec["researcher_id"]
        if not rid:
            r.issue(ln, "blank researcher_id")
            continue
        if rid in out:
            r.issue(ln, f"duplicate researcher_id {rid}")
            continue
        if t is not None:
            out[rid] = (rec["field_code"], t)
    return out, r


def load_baseline(path, text=None):
    r = _Reader(path, BASELINE, text)
    cells = {}
    for ln, rec in r.rows():
        year = r.number(ln, rec, "year", int)
        mean = r.number(ln, rec, "cited_mean", float)
        p95 = r.number(ln, rec, "p95_threshold", float, 0)
        p99 = r.number(ln, rec, "p99_threshold", float, 0)
        if None in (year, mean, p95, p99):
            continue
        key = (year, rec["category"])
        if key in cells:
            r.issue(ln, f"duplicate baseline cell {key}")
            continue
        try:
            cells[key] = BaselineCell(mean, {95.0: p95, 99.0: p99})
        except InputError as exc:
            r.issue(ln, str(exc))
    _finish(r)
    return ReferenceBaseline(cells)


def load_reference_corpus(path, text=None):
    r = _Reader(path, CORPUS, text)
    records = []
    for ln, rec in r.rows():
        year = r.number(ln, rec, "year", int)
        c = r.number(ln, rec, "citations", int, 0)
        if not rec["category"]:
            r.issue(ln, "blank category")
            continue
        if year is not None and c is not None:
            records.append((year, rec["category"], c))
    _finish(r)
    try:
        return ReferenceBaseline.from_corpus(records)
    except InputError as exc:
        raise DataValidationError([ValidationIssue(str(path), 0, str(exc), "baseline")]) from None


def load_raw(paths: DataPaths, config):
    """Publications, authorships and researchers joined into profiles."""
    window = (config.start_year, config.end_year)
    pubs, rp = load_publications(paths.publications, window)
    auths, ra = load_authorships(paths.authorships)
    researchers, rr = load_researchers(paths.researchers)
    _finish(rp, ra, rr)

    integrity = []
    records = {}
    for pid, rows in auths.items():
        if pid not in pubs:
            for _, ln in rows:
                integrity.append(ValidationIssue(str(paths.authorships), ln,
                                                 f"authorship of unknown publication {pid}", "integrity"))
            continue
        for a, ln in rows:
            if a.researcher_id and a.researcher_id not in researchers:
                integrity.append(ValidationIssue(str(paths.authorships), ln,
                                                 f"unknown researcher {a.researcher_id}", "integrity"))
        byline = tuple(sorted((a for a, _ in rows), key=lambda a: a.position))
        year, cats, cites, ln = pubs[pid]
        try:
            records[pid] = PublicationRecord(pid, year, cats, cites, byline)
        except InputError as exc:
            integrity.append(ValidationIssue(str(paths.authorships), rows[0][1], str(exc), "byline"))
    for pid, (_, _, _, ln) in pubs.items():
        if pid not in auths:
            integrity.append(ValidationIssue(str(paths.publications), ln,
                                             f"publication {pid} has no authorships", "integrity"))
    if integrity:
        raise IntegrityError(integrity)

    contributions: dict[str, list] = {rid: [] for rid in researchers}
    for pid in sorted(records):
        pub = records[pid]
        for a in pub.byline:
            if a.researcher_id:
                contributions[a.researcher_id].append((pub, a.position))

    if paths.baseline is not None:
        baseline = load_baseline(paths.baseline)
    elif paths.reference_corpus is not None:
        baseline = load_reference_corpus(paths.reference_corpus)
    else:
        raise InputError("raw input needs baseline.csv or reference_corpus.csv")

    profiles = [
        ResearcherProfile(rid, code, t, tuple(contributions[rid]))
        for rid, (code, t) in researchers.items()
        if not config.field_code or code == config.field_code
    ]
    if not profiles:
        raise InputError(f"no researchers in field {config.field_code}")
    return RawDataset(profiles, baseline)


def load_and_validate(paths: DataPaths, config):
    """Validated indicator table (precomputed shortcut) or raw dataset."""
    if paths.precomputed:
        return load_indicators(paths.indicators, config.field_code)
    needed = ("publications", "authorships", "researchers")
    absent = [n for n in needed if getattr(paths, n) is None]
    if absent:
        raise InputError(f"missing input path(s): {', '.join(absent)}")
    return load_raw(paths, config)


# -- golden fixtures ---------------------------------------------------------

def fixture_text(name):
    return resources.files("bibsimca").joinpath("data").joinpath(name).read_text()


def load_golden(name_or_path):
    """Top-50 table (table2.csv / table3.csv) from the package or a path."""
    p = Path(name_or_path)
    text = p.read_text() if p.exists() else fixture_text(str(name_or_path))
    r = _Reader(name_or_path, GOLDEN, text)
    ids, vals, b, s, band = [], [], [], [], []
    for ln, rec in r.rows():
        v = [r.number(ln, rec, "fss")] + [r.number(ln, rec, k, int) for k in INDICATOR_NAMES[1:]]
        bb, ss = r.number(ln, rec, "bcs"), r.number(ln, rec, "simca_score")
        if None in v or bb is None or ss is None:
            continue
        ids.append(rec["researcher_id"])
        vals.append(v)
        b.append(bb)
        s.append(ss)
        band.append(rec["band"])
    _finish(r)
    return GoldenTable(ids, np.array(vals, dtype=float), np.array(b), np.array(s), band)


def golden_as_indicator_table(golden: GoldenTable, field_code=""):
    return IndicatorTable(list(golden.ids), [field_code] * len(golden.ids), golden.values.copy())


# -- writers -----------------------------------------------------------------

def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    Path(path).write_text(buf.getvalue())


def write_indicators(path, table: IndicatorTable):
    rows = []
    for rid, code, v in zip(table.ids, table.field_codes, table.values):
        rows.append([rid, code, float(v[0])] + [int(x) for x in v[1:]])
    write_csv(path, INDICATORS, rows)
