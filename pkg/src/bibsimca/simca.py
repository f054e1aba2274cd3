"""SIMCA class model of an artificial excellence class.

The class is a full-factorial design over upper-tail levels of each
indicator. It is split with Kennard-Stone, modeled by autoscaled PCA, and
bounded by an F-based critical squared orthogonal distance plus the classic
score-range box.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import pca
from .errors import DegenerateInputError, InputError
from .fdist import f_ppf
from .indicators import INDICATOR_NAMES, IndicatorVector
from .quantiles import nearest_rank

DISTANCE_FLOOR = 1e-12
FORMAT_HEADER = "# bibsimca simca-model"
FORMAT_VERSION = 1


def _as_matrix(population):
    if isinstance(population, np.ndarray):
        return np.atleast_2d(population.astype(float))
    rows = [v.as_array() if isinstance(v, IndicatorVector) else np.asarray(v, dtype=float)
            for v in population]
    if not rows:
        return np.empty((0, len(INDICATOR_NAMES)))
    return np.vstack(rows)


@dataclass(frozen=True)
class ExcellenceDesign:
    levels: np.ndarray         # p x 4
    design_matrix: np.ndarray  # 4**p x p
    names: tuple[str, ...] = INDICATOR_NAMES

    @property
    def n_rows(self):
        return self.design_matrix.shape[0]


def excellence_levels(column, percentiles=(95, 97.5), inflation=1.05):
    col = np.asarray(column, dtype=float)
    top = float(col.max())
    return [nearest_rank(col, p) for p in percentiles] + [top, top * inflation]


def build_excellence_class(population, percentiles=(95, 97.5), inflation=1.05,
                           names=INDICATOR_NAMES):
    """Full factorial of (p95, p97.5, max, 1.05 * max) over every indicator.

    The first indicator varies slowest and the last fastest.
    """
    x = _as_matrix(population)
    if x.shape[0] == 0:
        raise InputError("cannot build an excellence class from an empty population")
    levels = np.array([excellence_levels(x[:, j], percentiles, inflation)
                       for j in range(x.shape[1])])
    idx = np.array(list(itertools.product(range(levels.shape[1]), repeat=x.shape[1])))
    design = levels[np.arange(x.shape[1]), idx]
    return ExcellenceDesign(levels, design, tuple(names))


def kennard_stone_split(data, train_fraction=0.75):
    """Greedy max-min Euclidean selection of a training subset.

    Returns (train, test) index arrays; ``train`` is in selection order.
    Ties go to the lowest row index.
    """
    x = np.asarray(data, dtype=float)
    n = x.shape[0]
    if not 0 < train_fraction < 1:
        raise InputError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if n < 2:
        raise InputError("Kennard-Stone needs at least 2 rows")
    n_train = math.floor(n * train_fraction)
    if n_train < 2:
        raise InputError(f"train_fraction {train_fraction} selects fewer than 2 of {n} rows")

    diff = x[:, None, :] - x[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    # first maximum in row-major order is the lowest (i, j) pair
    i, j = divmod(int(np.argmax(d2)), n)
    first, second = min(i, j), max(i, j)
    selected = [first, second]
    chosen = np.zeros(n, dtype=bool)
    chosen[selected] = True
    mind = np.minimum(d2[first], d2[second])
    while len(selected) < n_train:
        cand = np.where(chosen, -np.inf, mind)
        k = int(np.argmax(cand))
        selected.append(k)
        chosen[k] = True
        mind = np.minimum(mind, d2[k])
    train = np.array(selected, dtype=int)
    test = np.flatnonzero(~chosen)
    return train, test


@dataclass(frozen=True)
class SimcaScore:
    squared_distance: float
    translated_log: float
    distance_accepted: bool
    box_accepted: bool
    accepted: bool


@dataclass(frozen=True)
class SimcaClassModel:
    center: np.ndarray
    scale: np.ndarray
    pca: pca.PcaModel
    class_rsd: float
    n_train: int
    confidence: float = 0.95
    f_quantile: float = field(default=float("nan"))
    critical_squared_distance: float = field(default=float("nan"))
    score_box: np.ndarray = field(default=None)  # A x 2
    use_box: bool = True
    log_base: float = 10.0
    log_translation: float = 1.0
    names: tuple[str, ...] = INDICATOR_NAMES

    @property
    def loadings(self):
        return self.pca.loadings

    @property
    def n_components(self):
        return self.pca.n_components

    @property
    def n_variables(self):
        return self.pca.n_variables

    @property
    def translated_log_critical(self):
        return self.translated_log(self.critical_squared_distance)

    def translated_log(self, squared_distance):
        d = np.maximum(np.asarray(squared_distance, dtype=float), DISTANCE_FLOOR)
        out = np.log(d) / math.log(self.log_base) + self.log_translation
        return float(out) if out.ndim == 0 else out

    def transform(self, x):
        return (np.asarray(x, dtype=float) - self.center) / self.scale

    def score_matrix(self, x):
        """Vectorized scoring; returns a dict of per-row arrays."""
        z = np.atleast_2d(self.transform(x))
        scores, d2, _ = pca.project_many(self.pca, z)
        tlog = self.translated_log(d2)
        tlog = np.atleast_1d(tlog)
        dist_ok = tlog <= self.translated_log_critical
        lo, hi = self.score_box[:, 0], self.score_box[:, 1]
        box_ok = np.all((scores >= lo) & (scores <= hi), axis=1)
        accepted = dist_ok & box_ok if self.use_box else dist_ok
        return {
            "scores": scores,
            "squared_distance": d2,
            "translated_log": tlog,
            "distance_accepted": dist_ok,
            "box_accepted": box_ok,
            "accepted": accepted,
        }


def fit_class_model(train, confidence=0.95, n_components=2, use_box=True, log_base=10.0,
                    log_translation=1.0, max_components=4, cv_segments=7,
                    names=INDICATOR_NAMES):
    """Fit the class model on raw (unscaled) training rows.

    ``n_components=None`` or ``"auto"`` selects A by cross-validation.
    The critical squared distance is s0**2 * F(confidence; p - A, (p - A)(n - A - 1)).
    """
    x = np.asarray(train, dtype=float)
    n, p = x.shape
    if not 0 < confidence < 1:
        raise InputError(f"confidence must be in (0, 1), got {confidence}")
    if n_components in (None, "auto"):
        n_components = pca.select_components_cv(x, max_components, n_segments=cv_segments)
    a = int(n_components)
    if a >= p:
        raise InputError(f"n_components={a} must be below the number of variables ({p})")
    if n <= a + 1:
        raise InputError(f"need more than A + 1 = {a + 1} training rows, got {n}")
    model, scaled = pca.fit_pca(x, a, names=names)
    s0 = pca.class_rsd(model, scaled.rows)
    fq = f_ppf(confidence, p - a, (p - a) * (n - a - 1))
    critical = s0 * s0 * fq
    if not critical > 0:
        raise DegenerateInputError("training data lie exactly in the model plane; critical distance is 0")
    half = 0.5 * model.score_sd
    box = np.column_stack([model.score_range[:, 0] - half, model.score_range[:, 1] + half])
    return SimcaClassModel(
        center=scaled.center, scale=scaled.scale, pca=model, class_rsd=s0, n_train=n,
        confidence=confidence, f_quantile=fq, critical_squared_distance=critical,
        score_box=box, use_box=use_box, log_base=log_base, log_translation=log_translation,
        names=tuple(names),
    )


def score(model: SimcaClassModel, vector):
    """Distance of one indicator vector from the class (lower is closer to excellence)."""
    row = vector.as_array() if isinstance(vector, IndicatorVector) else np.asarray(vector, dtype=float)
    r = model.score_matrix(row[None, :])
    return SimcaScore(
        squared_distance=float(r["squared_distance"][0]),
        translated_log=float(r["translated_log"][0]),
        distance_accepted=bool(r["distance_accepted"][0]),
        box_accepted=bool(r["box_accepted"][0]),
        accepted=bool(r["accepted"][0]),
    )


def modeling_power(model, scaled_training):
    """1 - residual sd / raw sd for each variable.

    Residual variance uses n - A - 1 degrees of freedom and raw variance
    n - 1, so a model without components has zero modeling power.
    """
    z = np.asarray(scaled_training, dtype=float)
    n = z.shape[0]
    a = model.loadings.shape[1]
    e = z - (z @ model.loadings) @ model.loadings.T
    raw = np.sqrt(np.sum((z - z.mean(axis=0)) ** 2, axis=0) / (n - 1))
    if np.any(raw <= 0):
        raise DegenerateInputError(f"zero variance in column(s) {np.flatnonzero(raw <= 0).tolist()}")
    res = np.sqrt(np.sum(e * e, axis=0) / (n - a - 1))
    return 1.0 - res / raw


def sensitivity(model: SimcaClassModel, class_members):
    """Fraction of known class members the model accepts."""
    x = np.asarray(class_members, dtype=float)
    if x.size == 0:
        raise InputError("sensitivity of an empty set")
    return float(np.mean(model.score_matrix(np.atleast_2d(x))["accepted"]))


# -- serialization -----------------------------------------------------------

def _fmt(values):
    return ",".join(repr(float(v)) for v in np.ravel(values))


def _parse(text):
    return np.array([float(t) for t in text.split(",")]) if text else np.array([])


def dumps_model(model: SimcaClassModel):
    lines = [
        FORMAT_HEADER,
        f"format_version = {FORMAT_VERSION}",
        f"names = {','.join(model.names)}",
        f"n_variables = {model.n_variables}",
        f"n_components = {model.n_components}",
        f"n_train = {model.n_train}",
        f"confidence = {model.confidence!r}",
        f"class_rsd = {model.class_rsd!r}",
        f"f_quantile = {model.f_quantile!r}",
        f"critical_squared_distance = {model.critical_squared_distance!r}",
        f"translated_log_critical = {model.translated_log_critical!r}",
        f"use_box = {str(model.use_box).lower()}",
        f"log_base = {model.log_base!r}",
        f"log_translation = {model.log_translation!r}",
        f"center = {_fmt(model.center)}",
        f"scale = {_fmt(model.scale)}",
        f"explained_variance = {_fmt(model.pca.explained_variance)}",
        f"score_sd = {_fmt(model.pca.score_sd)}",
    ]
    for k in range(model.n_components):
        lines.append(f"loadings.{k} = {_fmt(model.loadings[:, k])}")
    for k in range(model.n_components):
        lines.append(f"score_range.{k} = {_fmt(model.pca.score_range[k])}")
    for k in range(model.n_components):
        lines.append(f"score_box.{k} = {_fmt(model.score_box[k])}")
    return "\n".join(lines) + "\n"


def loads_model(text):
    lines = text.splitlines()
    if not lines or lines[0].strip() != FORMAT_HEADER:
        raise InputError("not a bibsimca model file (bad header)")
    kv = {}
    for ln, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InputError(f"model file line {ln}: expected key = value")
        kv[key.strip()] = value.strip()
    try:
        version = int(kv["format_version"])
        if version != FORMAT_VERSION:
            raise InputError(f"unsupported model format version {version}")
        a = int(kv["n_components"])
        stack = lambda prefix: np.array([_parse(kv[f"{prefix}.{k}"]) for k in range(a)])
        pm = pca.PcaModel(
            loadings=stack("loadings").T.copy(),
            explained_variance=_parse(kv["explained_variance"]),
            score_sd=_parse(kv["score_sd"]),
            score_range=stack("score_range"),
        )
        return SimcaClassModel(
            center=_parse(kv["center"]), scale=_parse(kv["scale"]), pca=pm,
            class_rsd=float(kv["class_rsd"]), n_train=int(kv["n_train"]),
            confidence=float(kv["confidence"]), f_quantile=float(kv["f_quantile"]),
            critical_squared_distance=float(kv["critical_squared_distance"]),
            score_box=stack("score_box"), use_box=kv["use_box"] == "true",
            log_base=float(kv["log_base"]), log_translation=float(kv["log_translation"]),
            names=tuple(kv["names"].split(",")),
        )
    except KeyError as exc:
        raise InputError(f"model file is missing key {exc}") from None


def save_model(model, path):
    Path(path).write_text(dumps_model(model))


def load_model(path):
    return loads_model(Path(path).read_text())
