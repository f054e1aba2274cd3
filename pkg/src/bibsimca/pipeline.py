"""End-to-end run: indicators, excellence class, SIMCA, BCS, comparison reports."""
from __future__ import annotations

import json
import logging
import os
import platform
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, io, pca
from .bcs import BcsConfig, bcs_scores
from .config import PipelineConfig
from .errors import BibSimcaError, InputError, PipelineError
from .evaluation import histogram_data, rank_report, spearman
from .indicators import INDICATOR_NAMES, compute_indicators
from .simca import (build_excellence_class, dumps_model, fit_class_model, kennard_stone_split,
                    modeling_power, sensitivity)
from .synth import PopulationStats, synthesize_population

log = logging.getLogger(__name__)


@dataclass
class ReportBundle:
    config: PipelineConfig
    population: io.IndicatorTable
    design: object
    train_idx: np.ndarray
    test_idx: np.ndarray
    model: object
    sensitivity_train: float
    sensitivity_test: float
    modeling_power: np.ndarray
    artificial_scores: dict
    scores: dict
    bcs: np.ndarray
    positive_means: tuple
    rank_table: list
    spearman_full: float | None
    spearman_top50: float | None
    histogram: tuple
    source: str
    notes: list = field(default_factory=list)

    @property
    def acceptance_fraction(self):
        return float(np.mean(self.scores["accepted"]))

    def manifest(self):
        m = self.model
        return {
            "version": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "source": self.source,
            "seed": self.config.seed,
            "config": self.config.to_text().splitlines(),
            "n_researchers": len(self.population),
            "n_artificial": int(self.design.n_rows),
            "n_train": int(self.train_idx.size),
            "n_test": int(self.test_idx.size),
            "excellence_levels": {n: [float(v) for v in row]
                                  for n, row in zip(INDICATOR_NAMES, self.design.levels)},
            "n_components": m.n_components,
            "class_rsd": m.class_rsd,
            "f_quantile": m.f_quantile,
            "critical_squared_distance": m.critical_squared_distance,
            "translated_log_critical": m.translated_log_critical,
            "sensitivity_train": self.sensitivity_train,
            "sensitivity_test": self.sensitivity_test,
            "modeling_power": {n: float(v) for n, v in zip(INDICATOR_NAMES, self.modeling_power)},
            "n_accepted": int(np.sum(self.scores["accepted"])),
            "acceptance_fraction": self.acceptance_fraction,
            "positive_means": {n: v for n, v in zip(INDICATOR_NAMES, self.positive_means)},
            "spearman_bcs_vs_simca": self.spearman_full,
            "spearman_bcs_vs_simca_top50": self.spearman_top50,
            "notes": self.notes,
        }


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, PipelineError):
            if isinstance(exc, (BibSimcaError, ValueError, ArithmeticError, np.linalg.LinAlgError)):
                raise PipelineError(self.name, exc) from exc
        return False


def population_from_inputs(config: PipelineConfig, paths: io.DataPaths):
    data = io.load_and_validate(paths, config)
    if isinstance(data, io.IndicatorTable):
        return data
    rows, ids, codes = [], [], []
    for prof in data.profiles:
        v = compute_indicators(prof, data.baseline, mode=config.counting_mode,
                               inclusive=config.hca_inclusive, hca5_band=config.hca5_band)
        ids.append(prof.researcher_id)
        codes.append(prof.field_code)
        rows.append(v.as_array())
    return io.IndicatorTable(ids, codes, np.array(rows))


def run_pipeline(config: PipelineConfig, paths: io.DataPaths | None = None, population=None,
                 stats: PopulationStats | str | None = None):
    """Run every stage in memory and return the report bundle.

    The population comes from ``population`` if given, else from ``paths``,
    else is synthesized from ``stats`` with ``config.seed``.
    """
    notes = []
    with _Stage("indicators"):
        if population is not None:
            source = "table"
        elif paths is not None:
            population = population_from_inputs(config, paths)
            source = "files"
        elif stats is not None:
            if not isinstance(stats, PopulationStats):
                stats = PopulationStats.load(stats)
            population = synthesize_population(
                stats, config.synth_n, config.seed, correlation=config.synth_correlation,
                hca_nested=config.hca5_band == "nested", field_code=config.field_code)
            source = "synthetic"
        else:
            raise InputError("no population: give input paths, an indicator table or statistics")
        x = population.values
        if len(population) < 2:
            raise InputError("need at least 2 researchers")

    with _Stage("excellence-design"):
        design = build_excellence_class(x, config.percentiles, config.max_inflation)

    with _Stage("kennard-stone"):
        scaled_design = pca.autoscale(design.design_matrix, names=INDICATOR_NAMES)
        train_idx, test_idx = kennard_stone_split(scaled_design.rows, config.train_fraction)

    with _Stage("simca-fit"):
        train = design.design_matrix[train_idx]
        test = design.design_matrix[test_idx]
        model = fit_class_model(
            train, confidence=config.confidence, n_components=config.components,
            use_box=config.score_box, log_base=config.log_base,
            log_translation=config.log_translation, max_components=config.max_components,
            cv_segments=config.cv_segments)
        mp = modeling_power(model, model.transform(train))
        sens_train = sensitivity(model, train)
        sens_test = sensitivity(model, test) if test.size else float("nan")

    with _Stage("simca-score"):
        scores = model.score_matrix(x)
        art = {
            "Artif75%": model.score_matrix(train)["translated_log"],
            "Artif25%": model.score_matrix(test)["translated_log"] if test.size else np.array([]),
        }

    with _Stage("bcs"):
        values, ctx = bcs_scores(x, BcsConfig(config.bcs_weights), drop_absent=True)
        for j in ctx.absent:
            notes.append(f"indicator {INDICATOR_NAMES[j]} is zero for everyone; dropped from BCS")

    with _Stage("compare"):
        table = rank_report(population.ids, values, scores["translated_log"],
                            accepted=scores["accepted"], indicators=x,
                            bands_k=config.band_width, band_limit=config.band_limit)
        rho_full = _safe_spearman(values, -scores["translated_log"], notes, "full population")
        top = [r for r in table if r.bcs_rank <= config.band_limit]
        rho_top = _safe_spearman([r.bcs for r in top], [-r.translated_log for r in top],
                                 notes, "BCS top group")
        best = {r.researcher_id for r in top}
        is_best = np.array([rid in best for rid in population.ids])
        groups = dict(art)
        groups["Best50"] = scores["translated_log"][is_best]
        groups["Other"] = scores["translated_log"][~is_best]
        hist = histogram_data(groups, config.histogram_bin_width)

    return ReportBundle(
        config=config, population=population, design=design, train_idx=train_idx,
        test_idx=test_idx, model=model, sensitivity_train=sens_train,
        sensitivity_test=sens_test, modeling_power=mp, artificial_scores=art, scores=scores,
        bcs=values, positive_means=ctx.positive_means, rank_table=table,
        spearman_full=rho_full, spearman_top50=rho_top, histogram=hist, source=source,
        notes=notes,
    )


def _safe_spearman(a, b, notes, label):
    if len(a) < 2:
        return None
    try:
        return spearman(a, b)
    except BibSimcaError as exc:
        notes.append(f"spearman over {label}: {exc}")
        return None


def bundle_files(bundle: ReportBundle):
    """Mapping of output file name to writer callable."""
    pop = bundle.population
    sc = bundle.scores
    by_id = {r.researcher_id: r for r in bundle.rank_table}
    design = bundle.design.design_matrix
    part = np.empty(design.shape[0], dtype=object)
    part[bundle.train_idx] = "train"
    part[bundle.test_idx] = "test"
    art_all = bundle.model.score_matrix(design)

    def rank_rows():
        for r in bundle.rank_table:
            yield ([r.researcher_id] + list(r.indicators) +
                   [r.bcs, r.bcs_rank, r.translated_log, r.simca_rank, r.accepted, r.band])

    edges, counts = bundle.histogram
    return {
        "indicators.csv": lambda p: io.write_indicators(p, pop),
        "artificial.csv": lambda p: io.write_csv(
            p, ("row",) + INDICATOR_NAMES + ("partition", "squared_distance", "translated_log", "accepted"),
            ([i] + list(design[i]) + [part[i], art_all["squared_distance"][i],
                                      art_all["translated_log"][i], art_all["accepted"][i]]
             for i in range(design.shape[0]))),
        "model.txt": lambda p: Path(p).write_text(dumps_model(bundle.model)),
        "scores.csv": lambda p: io.write_csv(
            p, ("researcher_id", "squared_distance", "translated_log", "accepted"),
            ([rid, sc["squared_distance"][i], sc["translated_log"][i], sc["accepted"][i]]
             for i, rid in enumerate(pop.ids))),
        "bcs.csv": lambda p: io.write_csv(
            p, ("researcher_id", "bcs", "bcs_rank"),
            ([rid, bundle.bcs[i], by_id[rid].bcs_rank] for i, rid in enumerate(pop.ids))),
        "rank_table.csv": lambda p: io.write_csv(
            p, ("researcher_id",) + INDICATOR_NAMES +
            ("bcs", "bcs_rank", "translated_log", "simca_rank", "accepted", "band"),
            rank_rows()),
        "histogram.csv": lambda p: io.write_csv(
            p, ("group", "bin_left", "bin_right", "count"),
            ([g, edges[k], edges[k + 1], int(c[k])] for g, c in counts.items()
             for k in range(len(c)))),
        "scatter.csv": lambda p: io.write_csv(
            p, ("researcher_id", "bcs_rank", "simca_rank"),
            ([r.researcher_id, r.bcs_rank, r.simca_rank] for r in bundle.rank_table)),
        "modeling_power.csv": lambda p: io.write_csv(
            p, ("indicator", "modeling_power"), zip(INDICATOR_NAMES, bundle.modeling_power)),
        "manifest.json": lambda p: Path(p).write_text(
            json.dumps(bundle.manifest(), indent=2, sort_keys=True) + "\n"),
    }


def write_bundle(bundle: ReportBundle, out_dir):
    """Write every report file; nothing is left behind if a write fails."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".bibsimca-", dir=out))
    try:
        writers = bundle_files(bundle)
        for name, write in writers.items():
            try:
                write(tmp / name)
            except Exception as exc:
                raise PipelineError(f"write {name}", exc) from exc
        for name in writers:
            os.replace(tmp / name, out / name)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)
    return sorted(writers)
