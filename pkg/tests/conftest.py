from __future__ import annotations

import numpy as np
import pytest

from wnet import (
    CountryRegistry,
    FlowRecord,
    SizeRecord,
    UndirectedNetwork,
    WeightScheme,
    assemble_panel,
)


def make_undirected(
    weights: np.ndarray, year: int = 2000, normalize: bool = True
) -> UndirectedNetwork:
    """Wrap a symmetric nonnegative weight matrix into an UndirectedNetwork."""
    w = np.asarray(weights, dtype=float)
    assert (w == w.T).all() and (w.diagonal() == 0).all()
    if normalize and w.max() > 0:
        w = w / w.max()
    adjacency = (w > 0).astype(np.int64)
    registry = CountryRegistry.from_codes(f"N{i:03d}" for i in range(len(w)))
    return UndirectedNetwork(year, registry, WeightScheme(), adjacency, w, float(w.max()))


def random_undirected(
    rng: np.random.Generator,
    n: int,
    p: float = 0.5,
    binary: bool = False,
    year: int = 2000,
) -> UndirectedNetwork:
    """Random symmetric network with weights in [0, 1]."""
    mask = np.triu(rng.random((n, n)) < p, k=1)
    mask = mask | mask.T
    if binary:
        w = mask.astype(float)
    else:
        raw = rng.random((n, n))
        w = np.where(mask, np.triu(raw, 1) + np.triu(raw, 1).T, 0.0)
    if w.max() > 0:
        w = w / w.max()
    return make_undirected(w, year=year, normalize=False)


def random_panel(
    rng: np.random.Generator,
    n: int = 10,
    years: tuple[int, ...] = (2000,),
    p: float = 0.5,
    scale: float = 1.0,
):
    """Random flow/GDP panel; flow values are lognormal, GDP lognormal."""
    codes = [f"C{i:02d}" for i in range(n)]
    flows = []
    sizes = []
    for year in years:
        for a in codes:
            for b in codes:
                if a != b and rng.random() < p:
                    flows.append(
                        FlowRecord(year, a, b, float(np.exp(rng.normal(10, 2))) * scale)
                    )
        for c in codes:
            sizes.append(SizeRecord(year, c, float(np.exp(rng.normal(24, 1)))))
    return assemble_panel(flows, sizes)


def write_panel_csvs(tmp_path, n=60, years=(1999, 2000), seed=7, p=0.5):
    """Deterministic synthetic fixture large enough for every analysis."""
    rng = np.random.default_rng(seed)
    codes = [f"C{i:02d}" for i in range(n)]
    flow_lines = ["year,exporter,importer,value"]
    size_lines = ["year,country,gdp"]
    for year in years:
        for a in codes:
            for b in codes:
                if a != b and rng.random() < p:
                    value = float(np.exp(rng.normal(10, 2)))
                    flow_lines.append(f"{year},{a},{b},{value!r}")
        for c in codes:
            size_lines.append(f"{year},{c},{float(np.exp(rng.normal(24, 1)))!r}")
    flows_path = tmp_path / "flows.csv"
    gdp_path = tmp_path / "gdp.csv"
    flows_path.write_text("\n".join(flow_lines) + "\n", encoding="utf-8")
    gdp_path.write_text("\n".join(size_lines) + "\n", encoding="utf-8")
    return flows_path, gdp_path


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260809)


@pytest.fixture
def toy_csvs(tmp_path):
    return write_panel_csvs(tmp_path)
