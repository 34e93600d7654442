"""Ingestion of bilateral flow and GDP files into a validated panel.

Input files are header-labeled CSV (UTF-8, ``#`` comment lines skipped).
Column order is free but names are fixed: ``year,exporter,importer,value``
for flows and ``year,country,gdp`` for sizes.  Parsed records are assembled
into an immutable :class:`PanelDataset` over a lexicographically sorted
country registry, so the node indexing never depends on input row order.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import IO, Iterable, Iterator

from .errors import DataError

logger = logging.getLogger(__name__)

FLOW_COLUMNS = ("year", "exporter", "importer", "value")
SIZE_COLUMNS = ("year", "country", "gdp")


@dataclass(frozen=True)
class FlowFormat:
    """Dialect of the delimited input files.

    Defaults reproduce the canonical format: comma-delimited, ``#`` comments.
    The same dialect is used for flow and size files.
    """

    delimiter: str = ","
    comment: str = "#"


@dataclass(frozen=True)
class CountryRegistry:
    """Sorted, deduplicated country identifiers with stable 0..N-1 positions."""

    codes: tuple[str, ...]

    @classmethod
    def from_codes(cls, codes: Iterable[str]) -> "CountryRegistry":
        return cls(tuple(sorted(set(codes))))

    @cached_property
    def index(self) -> dict[str, int]:
        return {code: i for i, code in enumerate(self.codes)}

    def position(self, code: str) -> int:
        try:
            return self.index[code]
        except KeyError:
            raise DataError(f"unknown country {code!r}") from None

    def __len__(self) -> int:
        return len(self.codes)

    def __contains__(self, code: str) -> bool:
        return code in self.index


@dataclass(frozen=True)
class FlowRecord:
    """One bilateral flow observation, value in current US dollars."""

    year: int
    exporter: str
    importer: str
    value: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise DataError(f"non-finite flow value {self.value!r}")
        if self.value < 0:
            raise DataError(f"negative flow value {self.value!r}")
        if self.exporter == self.importer:
            raise DataError(f"self-flow for {self.exporter!r}")


@dataclass(frozen=True)
class SizeRecord:
    """One country-year GDP observation, current US dollars."""

    year: int
    country: str
    gdp: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.gdp) or self.gdp <= 0:
            raise DataError(f"nonpositive GDP {self.gdp!r} for {self.country!r}")


@dataclass(frozen=True)
class PanelDataset:
    """Immutable per-year collections of flows and sizes over one registry.

    ``missing_gdp`` flags (year, exporter) pairs where a positive flow exists
    but no same-year GDP record does.  The gap is only fatal at network-build
    time, and only under a weighting scheme that divides by that GDP.
    """

    registry: CountryRegistry
    years: tuple[int, ...]
    flows: dict[int, tuple[FlowRecord, ...]]
    sizes: dict[int, tuple[SizeRecord, ...]]
    missing_gdp: tuple[tuple[int, str], ...] = field(default=())

    def flows_for(self, year: int) -> tuple[FlowRecord, ...]:
        return self.flows.get(year, ())

    def gdp_for(self, year: int) -> dict[str, float]:
        return {rec.country: rec.gdp for rec in self.sizes.get(year, ())}


def _text_lines(source: str | Path | bytes | IO) -> Iterator[str]:
    """Yield decoded text lines from a path, raw bytes, or an open stream."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            yield from fh
    elif isinstance(source, (bytes, bytearray)):
        yield from io.StringIO(source.decode("utf-8"))
    else:
        raw = source.read()
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        yield from io.StringIO(raw)


def _iter_rows(
    source: str | Path | bytes | IO, fmt: FlowFormat
) -> Iterator[tuple[int, list[str]]]:
    """Yield (line number, fields) for data rows, skipping comments/blanks."""
    for lineno, line in enumerate(_text_lines(source), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(fmt.comment):
            continue
        fields = next(csv.reader([line], delimiter=fmt.delimiter))
        yield lineno, [f.strip() for f in fields]


def _header_positions(
    lineno: int, fields: list[str], expected: tuple[str, ...]
) -> dict[str, int]:
    names = [f.lower() for f in fields]
    if sorted(names) != sorted(expected):
        raise DataError(
            f"line {lineno}: header must name exactly {','.join(expected)}; "
            f"got {','.join(names)}"
        )
    return {name: i for i, name in enumerate(names)}


def _parse_int(lineno: int, text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise DataError(f"line {lineno}: bad {what} {text!r}") from None


def _parse_float(lineno: int, text: str, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"line {lineno}: bad {what} {text!r}") from None
    if not math.isfinite(value):
        raise DataError(f"line {lineno}: bad {what} {text!r}")
    return value


def parse_flows(
    source: str | Path | bytes | IO, fmt: FlowFormat = FlowFormat()
) -> list[FlowRecord]:
    """Parse a flow file into records, preserving row order.

    Raises DataError with the offending line number for malformed rows,
    negative values, self-flows, and duplicate (year, exporter, importer)
    keys.
    """
    rows = _iter_rows(source, fmt)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise DataError("flow input is empty") from None
    pos = _header_positions(lineno, header, FLOW_COLUMNS)

    records: list[FlowRecord] = []
    seen: set[tuple[int, str, str]] = set()
    for lineno, fields in rows:
        if len(fields) != len(FLOW_COLUMNS):
            raise DataError(
                f"line {lineno}: expected {len(FLOW_COLUMNS)} fields, got {len(fields)}"
            )
        year = _parse_int(lineno, fields[pos["year"]], "year")
        exporter = fields[pos["exporter"]]
        importer = fields[pos["importer"]]
        if not exporter or not importer:
            raise DataError(f"line {lineno}: empty country identifier")
        value = _parse_float(lineno, fields[pos["value"]], "value")
        try:
            record = FlowRecord(year, exporter, importer, value)
        except DataError as exc:
            raise DataError(f"line {lineno}: {exc}") from None
        key = (year, exporter, importer)
        if key in seen:
            raise DataError(f"line {lineno}: duplicate flow {key}")
        seen.add(key)
        records.append(record)
    return records


def parse_sizes(
    source: str | Path | bytes | IO, fmt: FlowFormat = FlowFormat()
) -> list[SizeRecord]:
    """Parse a GDP file into records; same error reporting as parse_flows."""
    rows = _iter_rows(source, fmt)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise DataError("size input is empty") from None
    pos = _header_positions(lineno, header, SIZE_COLUMNS)

    records: list[SizeRecord] = []
    seen: set[tuple[int, str]] = set()
    for lineno, fields in rows:
        if len(fields) != len(SIZE_COLUMNS):
            raise DataError(
                f"line {lineno}: expected {len(SIZE_COLUMNS)} fields, got {len(fields)}"
            )
        year = _parse_int(lineno, fields[pos["year"]], "year")
        country = fields[pos["country"]]
        if not country:
            raise DataError(f"line {lineno}: empty country identifier")
        gdp = _parse_float(lineno, fields[pos["gdp"]], "gdp")
        try:
            record = SizeRecord(year, country, gdp)
        except DataError as exc:
            raise DataError(f"line {lineno}: {exc}") from None
        key = (year, country)
        if key in seen:
            raise DataError(f"line {lineno}: duplicate size record {key}")
        seen.add(key)
        records.append(record)
    return records


def assemble_panel(
    flows: Iterable[FlowRecord], sizes: Iterable[SizeRecord]
) -> PanelDataset:
    """Assemble parsed records into a canonical PanelDataset.

    The registry is the sorted union of every country seen anywhere; years
    are sorted ascending; per-year records are stored in (exporter, importer)
    and (country,) order so equal datasets compare equal regardless of the
    order records arrived in.
    """
    flows = list(flows)
    sizes = list(sizes)
    if not flows:
        raise DataError("no flow records")

    flow_keys: set[tuple[int, str, str]] = set()
    for rec in flows:
        key = (rec.year, rec.exporter, rec.importer)
        if key in flow_keys:
            raise DataError(f"duplicate flow {key}")
        flow_keys.add(key)
    size_keys: set[tuple[int, str]] = set()
    for rec in sizes:
        key = (rec.year, rec.country)
        if key in size_keys:
            raise DataError(f"duplicate size record {key}")
        size_keys.add(key)

    countries = (
        {r.exporter for r in flows}
        | {r.importer for r in flows}
        | {r.country for r in sizes}
    )
    registry = CountryRegistry.from_codes(countries)
    years = tuple(sorted({r.year for r in flows} | {r.year for r in sizes}))

    flow_groups: dict[int, list[FlowRecord]] = {}
    for rec in flows:
        flow_groups.setdefault(rec.year, []).append(rec)
    flows_by_year = {
        year: tuple(sorted(recs, key=lambda r: (r.exporter, r.importer)))
        for year, recs in sorted(flow_groups.items())
    }
    size_groups: dict[int, list[SizeRecord]] = {}
    for rec in sizes:
        size_groups.setdefault(rec.year, []).append(rec)
    sizes_by_year = {
        year: tuple(sorted(recs, key=lambda r: r.country))
        for year, recs in sorted(size_groups.items())
    }

    gaps: set[tuple[int, str]] = set()
    for year, recs in flows_by_year.items():
        with_gdp = {r.country for r in sizes_by_year.get(year, ())}
        for rec in recs:
            if rec.value > 0 and rec.exporter not in with_gdp:
                gaps.add((year, rec.exporter))
    if gaps:
        logger.warning(
            "%d exporter-year pairs lack a GDP record (fatal only under "
            "GDP-dividing schemes)",
            len(gaps),
        )

    return PanelDataset(
        registry=registry,
        years=years,
        flows=flows_by_year,
        sizes=sizes_by_year,
        missing_gdp=tuple(sorted(gaps)),
    )


def dump_flows(flows: Iterable[FlowRecord]) -> str:
    """Serialize flow records to the canonical CSV text."""
    lines = [",".join(FLOW_COLUMNS)]
    for rec in flows:
        lines.append(f"{rec.year},{rec.exporter},{rec.importer},{rec.value!r}")
    return "\n".join(lines) + "\n"


def dump_sizes(sizes: Iterable[SizeRecord]) -> str:
    """Serialize size records to the canonical CSV text."""
    lines = [",".join(SIZE_COLUMNS)]
    for rec in sizes:
        lines.append(f"{rec.year},{rec.country},{rec.gdp!r}")
    return "\n".join(lines) + "\n"


def save_panel(panel: PanelDataset, flows_path: str | Path, sizes_path: str | Path) -> None:
    """Write a panel back to canonical flow/size CSV files (round-trip exact)."""
    flow_recs = [r for year in panel.years for r in panel.flows_for(year)]
    size_recs = [r for year in panel.years for r in panel.sizes.get(year, ())]
    Path(flows_path).write_text(dump_flows(flow_recs), encoding="utf-8")
    Path(sizes_path).write_text(dump_sizes(size_recs), encoding="utf-8")


def load_panel(
    flows_path: str | Path,
    sizes_path: str | Path | None = None,
    fmt: FlowFormat = FlowFormat(),
) -> PanelDataset:
    """Parse flow and (optional) size files and assemble the panel."""
    flows = parse_flows(flows_path, fmt)
    sizes = parse_sizes(sizes_path, fmt) if sizes_path is not None else []
    return assemble_panel(flows, sizes)
