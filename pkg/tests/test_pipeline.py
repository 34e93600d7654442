from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np
import pytest

from wnet import (
    DataError,
    NodeStatsTable,
    PipelineConfig,
    ValidationError,
    WeightScheme,
    compare_views,
    correlation_series,
    run_pipeline,
)
from wnet.pipeline import comparison_csv, pair_filename, qualitative_label, read_correlation_csv

from oracles import pearson_oracle


def config_for(toy_csvs, out_dir, **overrides) -> PipelineConfig:
    flows, gdp = toy_csvs
    defaults = dict(
        flows=flows,
        gdp=gdp,
        scheme=WeightScheme(),
        years=(1999, 2000),
        out_dir=Path(out_dir),
    )
    defaults.update(overrides)
    return PipelineConfig(**defaults)


def bundle_bytes(out_dir: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(out_dir.iterdir())}


def test_full_bundle_contents(toy_csvs, tmp_path):
    out = tmp_path / "bundle"
    bundle = run_pipeline(config_for(toy_csvs, out))
    names = {p.name for p in out.iterdir()}
    assert {"stats_1999.csv", "stats_2000.csv", "moments.csv", "tailfit.csv",
            "symmetry.csv", "comparison.csv", "counts.csv", "manifest.json"} <= names
    assert sum(1 for n in names if n.startswith("correlation_")) == 5
    assert sum(1 for n in names if n.startswith("density_")) == 4
    assert sum(1 for n in names if n.startswith("ranksize_")) == 2
    assert set(bundle.tables) == {1999, 2000}
    assert len(bundle.moments) == 12  # 6 statistics x 2 years
    assert set(bundle.symmetry) == {1999, 2000}


def test_manifest_digests_and_metadata(toy_csvs, tmp_path):
    out = tmp_path / "bundle"
    bundle = run_pipeline(config_for(toy_csvs, out))
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest == bundle.manifest
    assert manifest["tool"] == {"name": "wnet", "version": "0.1.0"}
    assert manifest["config"]["scheme"] == "exporter-gdp"
    assert "out" not in manifest["config"]
    assert set(manifest["normalizers"]) == {"1999", "2000"}
    for name, digest in manifest["files"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
    assert "manifest.json" not in manifest["files"]
    assert len(manifest["files"]) == len(list(out.iterdir())) - 1


def test_determinism_byte_identical(toy_csvs, tmp_path):
    a = run_pipeline(config_for(toy_csvs, tmp_path / "a"))
    b = run_pipeline(config_for(toy_csvs, tmp_path / "b"))
    assert bundle_bytes(tmp_path / "a") == bundle_bytes(tmp_path / "b")


def test_determinism_independent_of_jobs(toy_csvs, tmp_path):
    run_pipeline(config_for(toy_csvs, tmp_path / "a", jobs=1))
    run_pipeline(config_for(toy_csvs, tmp_path / "b", jobs=4))
    assert bundle_bytes(tmp_path / "a") == bundle_bytes(tmp_path / "b")


def test_empty_years_fails_before_io(tmp_path):
    config = PipelineConfig(
        flows=tmp_path / "does-not-exist.csv",
        gdp=None,
        scheme=WeightScheme(),
        years=(),
        out_dir=tmp_path / "out",
        analyses=frozenset(("stats",)),
    )
    with pytest.raises(ValidationError, match="no years"):
        run_pipeline(config)
    assert not (tmp_path / "out").exists()


def test_gdp_required_under_gdp_scheme(tmp_path):
    config = PipelineConfig(
        flows=tmp_path / "flows.csv",
        gdp=None,
        scheme=WeightScheme(),
        years=(2000,),
        out_dir=tmp_path / "out",
    )
    with pytest.raises(ValidationError, match="requires a GDP file"):
        run_pipeline(config)


def test_failing_year_leaves_no_partial_bundle(toy_csvs, tmp_path):
    out = tmp_path / "bundle"
    with pytest.raises(DataError, match="2030"):
        run_pipeline(config_for(toy_csvs, out, years=(1999, 2030)))
    assert not out.exists() or not list(out.iterdir())


def test_stats_only_subset(toy_csvs, tmp_path):
    out = tmp_path / "bundle"
    run_pipeline(config_for(toy_csvs, out, analyses=frozenset(("stats",))))
    names = {p.name for p in out.iterdir()}
    assert names == {"stats_1999.csv", "stats_2000.csv", "counts.csv", "manifest.json"}


def test_unknown_analysis_rejected(toy_csvs, tmp_path):
    with pytest.raises(ValidationError, match="unknown analyses"):
        run_pipeline(config_for(toy_csvs, tmp_path, analyses=frozenset(("plots",))))


def test_correlation_csv_round_trip(toy_csvs, tmp_path):
    out = tmp_path / "bundle"
    bundle = run_pipeline(config_for(toy_csvs, out))
    points = read_correlation_csv(out / pair_filename("ND-ANND"))
    assert points == bundle.correlations["ND-ANND"]


def test_stats_csv_well_formed(toy_csvs, tmp_path):
    out = tmp_path / "bundle"
    bundle = run_pipeline(config_for(toy_csvs, out, analyses=frozenset(("stats",))))
    lines = (out / "stats_2000.csv").read_text().strip().split("\n")
    assert lines[0] == "country,nd,ns,annd,anns,bcc,wcc"
    assert len(lines) == 1 + len(bundle.tables[2000].codes)


# ---------------------------------------------------------------------------
# comparison table
# ---------------------------------------------------------------------------


def _exact_correlation_vectors(rho: float, n: int, rng: np.random.Generator):
    """Construct x, y with Pearson correlation exactly rho (up to rounding)."""
    x = rng.normal(0, 1, n)
    e = rng.normal(0, 1, n)
    x = (x - x.mean()) / x.std()
    e = e - e.mean()
    e = e - x * (x @ e) / (x @ x)  # orthogonalize against x
    e = e / np.sqrt((e @ e) / n)
    y = rho * x + math.sqrt(1 - rho**2) * e
    return x, y


def test_compare_views_labels_from_constructed_correlations(rng):
    # Graph-family stand-in: stats vectors engineered to exact correlations,
    # independently confirmed by the summation oracle.
    x, y = _exact_correlation_vectors(-0.9, 40, rng)
    assert pearson_oracle(list(x), list(y)) == pytest.approx(-0.9, abs=1e-9)

    tables = []
    for year in (1999, 2000):
        nd, annd_v = _exact_correlation_vectors(-0.9, 40, rng)
        ns, anns_v = _exact_correlation_vectors(-0.3, 40, rng)
        tables.append(
            NodeStatsTable(
                year=year,
                codes=tuple(f"C{i}" for i in range(40)),
                nd=nd,
                ns=ns,
                annd=annd_v,
                anns=anns_v,
                bcc=-nd + 0.001 * annd_v,  # strongly anticorrelated with nd
                wcc=ns * 0.5 + 0.01 * anns_v,  # strongly correlated with ns
            )
        )
    series = {
        pair: correlation_series(tables, pair)
        for pair in ("ND-ANND", "NS-ANNS", "BCC-ND", "WCC-NS")
    }
    rows = {row["view"]: row for row in compare_views(series)}
    assert rows["BNA"]["assortativity_r"] == pytest.approx(-0.9, abs=1e-6)
    assert rows["BNA"]["assortativity_label"] == "strong negative"
    assert rows["WNA"]["assortativity_r"] == pytest.approx(-0.3, abs=1e-6)
    assert rows["WNA"]["assortativity_label"] == "moderate negative"
    assert rows["BNA"]["clustering_label"].endswith("negative")
    assert rows["WNA"]["clustering_label"].endswith("positive")


def test_compare_views_missing_series():
    from wnet import CorrelationPoint

    point = CorrelationPoint(2000, "ND-ANND", -0.9, -0.95, -0.85, 40)
    series = {
        "ND-ANND": [point],
        "BCC-ND": [CorrelationPoint(2000, "BCC-ND", -0.96, -0.99, -0.9, 40)],
    }
    with pytest.raises(DataError, match="NS-ANNS"):
        compare_views(series)


def test_qualitative_label_buckets():
    assert qualitative_label(-0.95) == "strong negative"
    assert qualitative_label(-0.5) == "moderate negative"
    assert qualitative_label(0.2) == "weak positive"
    assert qualitative_label(0.7) == "strong positive"
    assert qualitative_label(0.3) == "moderate positive"
    assert qualitative_label(0.0) == "zero"
    assert qualitative_label(0.5, strong_cut=0.4) == "strong positive"


def test_comparison_csv_layout():
    rows = [
        {
            "view": "BNA",
            "assortativity_pair": "ND-ANND",
            "assortativity_r": -0.9,
            "assortativity_label": "strong negative",
            "clustering_pair": "BCC-ND",
            "clustering_r": -0.96,
            "clustering_label": "strong negative",
        }
    ]
    text = comparison_csv(rows)
    assert text.startswith("view,assortativity_pair,assortativity_r,")
    assert "BNA,ND-ANND,-0.9,strong negative,BCC-ND,-0.96,strong negative" in text
