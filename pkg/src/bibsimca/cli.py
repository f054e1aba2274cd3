"""Command-line interface.

Exit codes: 0 success, 1 input error, 2 computation error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .bcs import BcsConfig, bcs_scores
from .config import PipelineConfig
from .errors import BibSimcaError, InputError
from .evaluation import histogram_data, rank_report, spearman
from .indicators import INDICATOR_NAMES
from .pipeline import population_from_inputs, run_pipeline, write_bundle
from .simca import (build_excellence_class, fit_class_model, kennard_stone_split, load_model,
                    modeling_power, save_model, sensitivity)
from .synth import PopulationStats, synthesize_population
from . import pca

log = logging.getLogger("bibsimca")


def _config(args):
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    if getattr(args, "field", None):
        cfg = cfg.replace(field_code=args.field)
    return cfg


def _out(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _paths(args):
    return io.DataPaths(
        indicators=getattr(args, "indicators", None),
        publications=getattr(args, "publications", None),
        authorships=getattr(args, "authorships", None),
        researchers=getattr(args, "researchers", None),
        baseline=getattr(args, "baseline", None),
        reference_corpus=getattr(args, "reference_corpus", None),
    )


def cmd_indicators(args):
    cfg = _config(args)
    table = population_from_inputs(cfg, _paths(args))
    path = _out(args) / "indicators.csv"
    io.write_indicators(path, table)
    print(f"wrote {len(table)} researchers to {path}")


def cmd_synth(args):
    cfg = _config(args)
    n = args.n or cfg.synth_n
    table = synthesize_population(PopulationStats.load(args.stats), n, cfg.seed,
                                  correlation=cfg.synth_correlation,
                                  hca_nested=cfg.hca5_band == "nested", field_code=cfg.field_code)
    path = _out(args) / "indicators.csv"
    io.write_indicators(path, table)
    print(f"wrote {n} synthetic researchers to {path}")


def cmd_simca_fit(args):
    cfg = _config(args)
    table = io.load_indicators(args.indicators, cfg.field_code)
    design = build_excellence_class(table.values, cfg.percentiles, cfg.max_inflation)
    scaled = pca.autoscale(design.design_matrix, names=INDICATOR_NAMES)
    train_idx, test_idx = kennard_stone_split(scaled.rows, cfg.train_fraction)
    train, test = design.design_matrix[train_idx], design.design_matrix[test_idx]
    model = fit_class_model(train, cfg.confidence, cfg.components, cfg.score_box, cfg.log_base,
                            cfg.log_translation, cfg.max_components, cfg.cv_segments)
    out = _out(args)
    save_model(model, out / "model.txt")
    mp = modeling_power(model, model.transform(train))
    summary = {
        "n_train": int(train_idx.size), "n_test": int(test_idx.size),
        "n_components": model.n_components, "class_rsd": model.class_rsd,
        "critical_squared_distance": model.critical_squared_distance,
        "translated_log_critical": model.translated_log_critical,
        "sensitivity_train": sensitivity(model, train),
        "sensitivity_test": sensitivity(model, test) if test.size else None,
        "modeling_power": dict(zip(INDICATOR_NAMES, map(float, mp))),
    }
    (out / "fit_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(json.dumps(summary, indent=2, sort_keys=True))


def cmd_simca_score(args):
    cfg = _config(args)
    model = load_model(args.model)
    table = io.load_indicators(args.indicators, cfg.field_code)
    r = model.score_matrix(table.values)
    path = _out(args) / "scores.csv"
    io.write_csv(path, ("researcher_id", "squared_distance", "translated_log", "accepted"),
                 ([rid, r["squared_distance"][i], r["translated_log"][i], r["accepted"][i]]
                  for i, rid in enumerate(table.ids)))
    print(f"scored {len(table)} researchers; {int(r['accepted'].sum())} accepted -> {path}")


def cmd_bcs(args):
    cfg = _config(args)
    table = io.load_indicators(args.indicators, cfg.field_code)
    values, _ = bcs_scores(table.values, BcsConfig(cfg.bcs_weights), drop_absent=True)
    rows = rank_report(table.ids, values, np.zeros(len(table)))
    ranks = {r.researcher_id: r.bcs_rank for r in rows}
    path = _out(args) / "bcs.csv"
    io.write_csv(path, ("researcher_id", "bcs", "bcs_rank"),
                 ([rid, values[i], ranks[rid]] for i, rid in enumerate(table.ids)))
    print(f"wrote BCS for {len(table)} researchers to {path}")


def _read_column(path, key_col, val_col, kind=float):
    r = io._Reader(path, (key_col, val_col))
    out = {}
    for ln, rec in r.rows():
        v = r.number(ln, rec, val_col, kind)
        if v is not None:
            out[rec[key_col]] = v
    io._finish(r)
    return out


def cmd_compare(args):
    cfg = _config(args)
    bcs = _read_column(args.bcs, "researcher_id", "bcs")
    tlog = _read_column(args.scores, "researcher_id", "translated_log")
    acc_raw = {}
    r = io._Reader(args.scores, ("researcher_id", "accepted"))
    for _, rec in r.rows():
        acc_raw[rec["researcher_id"]] = rec["accepted"].lower() == "true"
    ids = sorted(set(bcs) & set(tlog))
    if len(ids) != len(bcs) or len(ids) != len(tlog):
        raise InputError("BCS and score files cover different researchers")
    b = [bcs[i] for i in ids]
    t = [tlog[i] for i in ids]
    table = rank_report(ids, b, t, accepted=[acc_raw.get(i) for i in ids],
                        bands_k=cfg.band_width, band_limit=cfg.band_limit)
    out = _out(args)
    io.write_csv(out / "rank_table.csv",
                 ("researcher_id", "bcs", "bcs_rank", "translated_log", "simca_rank", "accepted", "band"),
                 ([x.researcher_id, x.bcs, x.bcs_rank, x.translated_log, x.simca_rank, x.accepted, x.band]
                  for x in table))
    io.write_csv(out / "scatter.csv", ("researcher_id", "bcs_rank", "simca_rank"),
                 ([x.researcher_id, x.bcs_rank, x.simca_rank] for x in table))
    best = {x.researcher_id for x in table if x.bcs_rank <= cfg.band_limit}
    groups = {"Best50": [tlog[i] for i in ids if i in best],
              "Other": [tlog[i] for i in ids if i not in best]}
    if args.artificial:
        part = {}
        rr = io._Reader(args.artificial, ("partition", "translated_log"))
        for ln, rec in rr.rows():
            v = rr.number(ln, rec, "translated_log")
            part.setdefault(rec["partition"], []).append(v)
        io._finish(rr)
        groups = {"Artif75%": part.get("train", []), "Artif25%": part.get("test", []), **groups}
    edges, counts = histogram_data(groups, cfg.histogram_bin_width)
    io.write_csv(out / "histogram.csv", ("group", "bin_left", "bin_right", "count"),
                 ([g, edges[k], edges[k + 1], int(c[k])] for g, c in counts.items()
                  for k in range(len(c))))
    rho = spearman(b, [-v for v in t])
    print(f"spearman(BCS, -translated_log) = {rho:.4f} over {len(ids)} researchers")


def cmd_pipeline(args):
    cfg = _config(args)
    paths = _paths(args)
    has_files = paths.indicators or paths.publications
    if has_files:
        bundle = run_pipeline(cfg, paths=paths)
    else:
        bundle = run_pipeline(cfg, stats=args.stats or "bio14")
    files = write_bundle(bundle, args.out_dir)
    m = bundle.manifest()
    print(f"researchers={m['n_researchers']} train={m['n_train']} test={m['n_test']} "
          f"A={m['n_components']} rsd={m['class_rsd']:.4f} "
          f"critical(translated log)={m['translated_log_critical']:.4f}")
    print(f"sensitivity train={m['sensitivity_train']:.3f} test={m['sensitivity_test']:.3f} "
          f"accepted={m['n_accepted']}/{m['n_researchers']}")
    if m["spearman_bcs_vs_simca"] is not None:
        print(f"spearman(BCS, -translated_log) = {m['spearman_bcs_vs_simca']:.4f}")
    print(f"wrote {len(files)} files to {args.out_dir}")


def _add_raw_inputs(p):
    p.add_argument("--publications", type=Path)
    p.add_argument("--authorships", type=Path)
    p.add_argument("--researchers", type=Path)
    p.add_argument("--baseline", type=Path)
    p.add_argument("--reference-corpus", dest="reference_corpus", type=Path)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--out-dir", default=".", help="directory for output files")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--field", help="override the configured field code")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="bibsimca", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("indicators", parents=[common], help="compute indicators from raw records")
    _add_raw_inputs(p)
    p.set_defaults(func=cmd_indicators)

    p = sub.add_parser("synth", parents=[common], help="synthesize a population from descriptive statistics")
    p.add_argument("--stats", default="bio14", help="bio14, med04 or a statistics CSV")
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("simca-fit", parents=[common], help="fit the excellence-class model")
    p.add_argument("--indicators", type=Path, required=True)
    p.set_defaults(func=cmd_simca_fit)

    p = sub.add_parser("simca-score", parents=[common], help="score researchers with a fitted model")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--indicators", type=Path, required=True)
    p.set_defaults(func=cmd_simca_score)

    p = sub.add_parser("bcs", parents=[common], help="deterministic composite score")
    p.add_argument("--indicators", type=Path, required=True)
    p.set_defaults(func=cmd_bcs)

    p = sub.add_parser("compare", parents=[common], help="rank tables, histogram and scatter data")
    p.add_argument("--bcs", type=Path, required=True)
    p.add_argument("--scores", type=Path, required=True)
    p.add_argument("--artificial", type=Path, help="artificial.csv from a pipeline run")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("pipeline", parents=[common], help="run every stage end to end")
    p.add_argument("--indicators", type=Path)
    _add_raw_inputs(p)
    p.add_argument("--stats", help="synthesize from bio14, med04 or a statistics CSV")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except BibSimcaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
