"""Metadata catalog: patch records, spatial index, and the filter query engine.

All filters in a query are conjunctive; an absent filter passes everything.
Pages slice the match set in patch-name order, and label statistics always
cover the full match set, not just the returned page.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Mapping

from . import geo
from .geo import Rect, Shape
from .labels import LabelHierarchy, LabelPredicate, PREDICATE_PASS_ALL

SEASONS = ("winter", "spring", "summer", "autumn")
SATELLITES = ("S1", "S2")
MAX_PAGE_SIZE = 50


def season_from_month(month: int) -> str:
    """Northern-hemisphere season for an acquisition month."""
    if month in (12, 1, 2):
        return "winter"
    if month in (3, 4, 5):
        return "spring"
    if month in (6, 7, 8):
        return "summer"
    return "autumn"


class QueryValidationError(ValueError):
    """Invalid query; `fields` maps each offending field to a message."""

    def __init__(self, fields: Mapping[str, str]):
        self.fields = dict(fields)
        details = "; ".join(f"{k}: {v}" for k, v in self.fields.items())
        super().__init__(f"invalid query ({details})")


@dataclass(frozen=True, slots=True)
class PatchRecord:
    patch_name: str
    bounds: Rect
    labels: frozenset[str]
    acquisition_date: date
    season: str
    satellite: str
    country: str

    def __post_init__(self) -> None:
        if not self.patch_name:
            raise ValueError("patch_name must be non-empty")
        if not self.labels:
            raise ValueError(f"{self.patch_name}: labels must be non-empty")
        if self.season not in SEASONS:
            raise ValueError(f"{self.patch_name}: unknown season {self.season!r}")
        if self.satellite not in SATELLITES:
            raise ValueError(f"{self.patch_name}: unknown satellite {self.satellite!r}")
        object.__setattr__(self, "labels", frozenset(self.labels))


@dataclass(frozen=True)
class Query:
    shape: Shape | None = None
    date_range: tuple[date, date] | None = None
    seasons: frozenset[str] | None = None
    satellites: frozenset[str] | None = None
    label_predicate: LabelPredicate = PREDICATE_PASS_ALL
    page: int = 0
    page_size: int = MAX_PAGE_SIZE

    def validate(self) -> None:
        problems: dict[str, str] = {}
        if not 1 <= self.page_size <= MAX_PAGE_SIZE:
            problems["page_size"] = f"must be between 1 and {MAX_PAGE_SIZE}"
        if self.page < 0:
            problems["page"] = "must be >= 0"
        if self.date_range is not None and self.date_range[0] > self.date_range[1]:
            problems["date_range"] = "start must not be after end"
        if self.seasons is not None:
            bad = set(self.seasons) - set(SEASONS)
            if bad:
                problems["seasons"] = f"unknown seasons: {sorted(bad)}"
        if self.satellites is not None:
            bad = set(self.satellites) - set(SATELLITES)
            if bad:
                problems["satellites"] = f"unknown satellites: {sorted(bad)}"
        if problems:
            raise QueryValidationError(problems)


@dataclass
class QueryResult:
    total: int
    page: list[PatchRecord]
    stats: dict[str, int]


class GeoIndex:
    """Fixed-precision geohash cell map from cell id to patch names."""

    # Coverings larger than this skip cell probing; the exact refinement pass
    # over all records is cheaper than millions of cell lookups.
    MAX_COVERING_CELLS = 4096

    def __init__(self) -> None:
        self.cells: dict[int, list[str]] = {}
        self._count = 0

    def insert(self, name: str, bounds: Rect) -> None:
        for cell in geo.covering_cells(bounds):
            self.cells.setdefault(cell, []).append(name)
        self._count += 1

    def candidates(self, shape: Shape, all_names: Iterable[str]) -> Iterable[str]:
        """Superset of the names whose bounds can intersect the shape."""
        bbox = geo.shape_bbox(shape)
        if geo.covering_cell_count(bbox) > self.MAX_COVERING_CELLS:
            return all_names
        out: set[str] = set()
        for cell in geo.covering_cells(bbox):
            names = self.cells.get(cell)
            if names:
                out.update(names)
        return out

    def audit(self, records: Mapping[str, PatchRecord]) -> None:
        indexed: set[str] = set()
        for names in self.cells.values():
            indexed.update(names)
        missing = set(records) - indexed
        if missing:
            raise AssertionError(f"{len(missing)} records missing from the spatial index")
        for name in records:
            for cell in geo.covering_cells(records[name].bounds):
                if name not in self.cells.get(cell, ()):
                    raise AssertionError(f"{name!r} missing from cell {geo.cell_to_base32(cell)}")


class Catalog:
    """Record store plus spatial index; build, freeze, then query concurrently."""

    def __init__(self, hierarchy: LabelHierarchy):
        self.hierarchy = hierarchy
        self.records: dict[str, PatchRecord] = {}
        self.geo_index = GeoIndex()
        self._sorted_names: list[str] = []
        self._frozen = False

    def __len__(self) -> int:
        return len(self.records)

    def add(self, record: PatchRecord) -> None:
        if self._frozen:
            raise RuntimeError("catalog is frozen")
        if record.patch_name in self.records:
            raise ValueError(f"duplicate patch_name {record.patch_name!r}")
        self.hierarchy.check_labels(record.labels)
        self.records[record.patch_name] = record
        self.geo_index.insert(record.patch_name, record.bounds)

    def freeze(self) -> None:
        self._sorted_names = sorted(self.records)
        self._frozen = True

    @property
    def sorted_names(self) -> list[str]:
        if not self._frozen:
            return sorted(self.records)
        return self._sorted_names

    def spatial_query(self, shape: Shape) -> set[str]:
        """Exactly the records whose bounds intersect the shape."""
        candidates = self.geo_index.candidates(shape, self.records.keys())
        return {
            name
            for name in candidates
            if geo.shape_intersects_rect(shape, self.records[name].bounds)
        }

    def _matches(self, record: PatchRecord, q: Query) -> bool:
        if q.date_range is not None:
            if not q.date_range[0] <= record.acquisition_date <= q.date_range[1]:
                return False
        if q.seasons is not None and record.season not in q.seasons:
            return False
        if q.satellites is not None and record.satellite not in q.satellites:
            return False
        return q.label_predicate.matches(record.labels)

    def match_names(self, q: Query) -> list[str]:
        """Sorted names of the full match set for a query's filters."""
        q.validate()
        if q.shape is not None:
            pool: Iterable[str] = sorted(self.spatial_query(q.shape))
        else:
            pool = self.sorted_names
        return [name for name in pool if self._matches(self.records[name], q)]

    def execute_query(self, q: Query) -> QueryResult:
        matches = self.match_names(q)
        start = q.page * q.page_size
        page = [self.records[name] for name in matches[start : start + q.page_size]]
        stats = label_histogram(self.records[name] for name in matches)
        return QueryResult(total=len(matches), page=page, stats=stats)


def label_histogram(records: Iterable[PatchRecord]) -> dict[str, int]:
    """Occurrences of each leaf over the records, one count per containing record."""
    counts: Counter[str] = Counter()
    for record in records:
        counts.update(record.labels)
    return dict(sorted(counts.items()))


def stats_with_colors(stats: Mapping[str, int], hierarchy: LabelHierarchy) -> dict[str, dict]:
    """Wire form of label statistics: label -> {count, color}."""
    return {
        label: {"count": count, "color": hierarchy.color(label)}
        for label, count in sorted(stats.items())
    }
