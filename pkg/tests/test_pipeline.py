import json

import numpy as np
import pytest

from bibsimca import io
from bibsimca.config import PipelineConfig
from bibsimca.errors import PipelineError
from bibsimca.pipeline import bundle_files, run_pipeline, write_bundle


@pytest.fixture(scope="module")
def bundle():
    return run_pipeline(PipelineConfig(seed=11), stats="bio14")


def test_synthetic_run_manifest(bundle):
    m = bundle.manifest()
    assert (m["n_researchers"], m["n_artificial"], m["n_train"], m["n_test"]) == (506, 1024, 768, 256)
    assert m["n_components"] == 2
    assert m["f_quantile"] == pytest.approx(2.6087802758003096, rel=1e-9)
    assert m["critical_squared_distance"] == pytest.approx(m["class_rsd"] ** 2 * m["f_quantile"])
    assert set(bundle.artificial_scores) == {"Artif75%", "Artif25%"}
    _, counts = bundle.histogram
    assert {g: int(c.sum()) for g, c in counts.items()} == {
        "Artif75%": 768, "Artif25%": 256, "Best50": 50, "Other": 456}


def test_byte_identical_reruns(tmp_path):
    cfg = PipelineConfig(seed=3)
    write_bundle(run_pipeline(cfg, stats="bio14"), tmp_path / "a")
    write_bundle(run_pipeline(cfg, stats="bio14"), tmp_path / "b")
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    assert "manifest.json" in names and "model.txt" in names
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes(), n


def test_failed_write_leaves_nothing(bundle, tmp_path, monkeypatch):
    import bibsimca.pipeline as pl
    real = pl.bundle_files

    def broken(b):
        files = real(b)
        files["scores.csv"] = lambda p: (_ for _ in ()).throw(OSError("disk full"))
        return files

    monkeypatch.setattr(pl, "bundle_files", broken)
    out = tmp_path / "out"
    with pytest.raises(PipelineError, match="scores.csv"):
        write_bundle(bundle, out)
    assert list(out.iterdir()) == []


def test_stage_name_in_errors():
    # nobody has a top-1% article, so that design column is constant
    x = np.ones((3, 5))
    x[:, 1] = 0
    table = io.IndicatorTable(["a", "b", "c"], [""] * 3, x)
    with pytest.raises(PipelineError) as err:
        run_pipeline(PipelineConfig(), population=table)
    assert err.value.stage == "kennard-stone"


def test_precomputed_table2_runs():
    g = io.load_golden("table2.csv")
    b = run_pipeline(PipelineConfig(), population=io.golden_as_indicator_table(g))
    assert [r.researcher_id for r in b.rank_table][:3] == ["R_139", "R_300", "R_163"]
    assert b.spearman_full is not None


def test_raw_inputs_end_to_end(tmp_path):
    r = np.random.default_rng(0)
    pubs, auths, corpus = ["pub_id,year,categories,citations"], ["pub_id,position,affiliation_id,researcher_id"], ["year,category,citations"]
    for k in range(400):
        pubs.append(f"P{k},{2006 + k % 5},C{k % 3}|C{(k + 1) % 3},{int(r.poisson(6))}")
        n = int(r.integers(1, 6))
        who = r.choice(30, size=n, replace=False)
        for pos in range(n):
            auths.append(f"P{k},{pos + 1},u{int(r.integers(0, 3))},R{who[pos]}")
    for y in range(2006, 2011):
        for c in range(3):
            corpus += [f"{y},C{c},{int(v)}" for v in r.poisson(5, size=200)]
    files = {"publications": pubs, "authorships": auths, "reference_corpus": corpus,
             "researchers": ["researcher_id,field_code,years_active"] + [f"R{i},BIO/14,5" for i in range(30)]}
    for name, lines in files.items():
        (tmp_path / f"{name}.csv").write_text("\n".join(lines) + "\n")
    paths = io.DataPaths(**{n: tmp_path / f"{n}.csv" for n in files})
    b = run_pipeline(PipelineConfig(), paths=paths)
    assert len(b.population) == 30 and b.source == "files"
    assert np.all(b.population.values[:, 2] >= b.population.values[:, 1])
    assert set(bundle_files(b)) >= {"indicators.csv", "rank_table.csv", "manifest.json"}
    json.dumps(b.manifest())
