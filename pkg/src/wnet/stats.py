"""Node-level statistics on symmetrized networks.

All six statistics are computed from the binary matrix A and the normalized
weight matrix W with dense matrix algebra:

    nd_i   = sum_j a_ij                      (degree)
    ns_i   = sum_j w_ij                      (strength)
    annd_i = (A @ nd)_i / nd_i               (avg nearest-neighbor degree)
    anns_i = (A @ ns)_i / nd_i               (avg nearest-neighbor strength)
    bcc_i  = (A^3)_ii / (nd_i (nd_i - 1))    (binary clustering)
    wcc_i  = (W_c^3)_ii / (nd_i (nd_i - 1))  with W_c the entrywise cube root

The weighted clustering denominator deliberately uses the degree, not the
strength.  Statistics that are undefined (annd/anns at isolated nodes,
bcc/wcc at nodes of degree <= 1) are NaN, never zero-filled: coercing them
would bias the downstream moment and correlation analyses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .graph import UndirectedNetwork


@dataclass(frozen=True, eq=False)
class NodeStatsTable:
    """Per-node statistics for one year; undefined entries are NaN."""

    year: int
    codes: tuple[str, ...]
    nd: np.ndarray
    ns: np.ndarray
    annd: np.ndarray
    anns: np.ndarray
    bcc: np.ndarray
    wcc: np.ndarray

    def column(self, name: str) -> np.ndarray:
        """Statistic vector by lowercase name (nd, ns, annd, anns, bcc, wcc)."""
        try:
            vec = getattr(self, name)
        except AttributeError:
            raise KeyError(f"unknown statistic {name!r}") from None
        return np.asarray(vec, dtype=float)

    def to_csv(self) -> str:
        """CSV text ``country,nd,ns,annd,anns,bcc,wcc``; empty cell = undefined."""
        def cell(v: float) -> str:
            return "" if np.isnan(v) else repr(float(v))

        lines = ["country,nd,ns,annd,anns,bcc,wcc"]
        for i, code in enumerate(self.codes):
            lines.append(
                f"{code},{int(self.nd[i])},{cell(self.ns[i])},{cell(self.annd[i])},"
                f"{cell(self.anns[i])},{cell(self.bcc[i])},{cell(self.wcc[i])}"
            )
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class MomentSummary:
    """First four population moments of one statistic in one year."""

    statistic: str
    year: int | None
    mean: float
    std: float
    skewness: float
    kurtosis: float
    count: int


def node_degree(net: UndirectedNetwork) -> np.ndarray:
    """Number of partners of each node (row sums of A)."""
    return net.adjacency.sum(axis=1)


def node_strength(net: UndirectedNetwork) -> np.ndarray:
    """Total normalized weight held by each node (row sums of W)."""
    return net.weights.sum(axis=1)


def _per_degree(numerator: np.ndarray, nd: np.ndarray) -> np.ndarray:
    out = np.full(nd.shape, np.nan)
    np.divide(numerator, nd, out=out, where=nd > 0)
    return out


def annd(net: UndirectedNetwork) -> np.ndarray:
    """Average degree of each node's neighbors; NaN at isolated nodes."""
    nd = node_degree(net)
    return _per_degree((net.adjacency @ nd).astype(float), nd.astype(float))


def anns(net: UndirectedNetwork) -> np.ndarray:
    """Average strength of each node's neighbors; NaN at isolated nodes."""
    nd = node_degree(net)
    return _per_degree(net.adjacency @ node_strength(net), nd.astype(float))


def _clustering(cubed_diagonal: np.ndarray, nd: np.ndarray) -> np.ndarray:
    pairs = (nd * (nd - 1)).astype(float)
    out = np.full(nd.shape, np.nan)
    np.divide(cubed_diagonal, pairs, out=out, where=nd > 1)
    return out


def bcc(net: UndirectedNetwork) -> np.ndarray:
    """Fraction of a node's neighbor pairs that are linked; NaN where nd <= 1."""
    a = net.adjacency
    return _clustering((a @ a @ a).diagonal().astype(float), node_degree(net))


def wcc(net: UndirectedNetwork) -> np.ndarray:
    """Cube-root triangle intensity over degree pairs; NaN where nd <= 1."""
    c = np.cbrt(net.weights)
    return _clustering((c @ c @ c).diagonal(), node_degree(net))


def node_stats(net: UndirectedNetwork) -> NodeStatsTable:
    """Bundle all six statistics for one network."""
    return NodeStatsTable(
        year=net.year,
        codes=net.registry.codes,
        nd=node_degree(net),
        ns=node_strength(net),
        annd=annd(net),
        anns=anns(net),
        bcc=bcc(net),
        wcc=wcc(net),
    )


def moments(
    values: np.ndarray, *, statistic: str = "", year: int | None = None
) -> MomentSummary:
    """First four population moments over the defined (finite) entries.

    Skewness is the third standardized moment and kurtosis the fourth (a
    normal sample gives ~3, no excess subtraction).  Both are NaN for a
    zero-variance sample.  Raises DataError with fewer than two defined
    entries.
    """
    x = np.asarray(values, dtype=float)
    x = x[np.isfinite(x)]
    if x.size < 2:
        raise DataError(f"moments need >= 2 defined values, got {x.size}")
    mean = float(x.mean())
    centered = x - mean
    std = float(np.sqrt(np.mean(centered**2)))
    if std == 0:
        skew = kurt = float("nan")
    else:
        skew = float(np.mean(centered**3) / std**3)
        kurt = float(np.mean(centered**4) / std**4)
    return MomentSummary(statistic, year, mean, std, skew, kurt, int(x.size))
