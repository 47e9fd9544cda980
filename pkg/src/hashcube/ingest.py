"""Archive construction: manifests, synthetic data, and the build pipeline.

A manifest is a JSON-lines file, one entry per patch. `build_archive` turns a
manifest into a persisted store: it trains (or accepts) a hashing head,
infers a binary code per entry, and writes the metadata, code, band, and
rendered-image collections plus the hierarchy and head files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Sequence

import numpy as np

from . import store as store_mod
from .catalog import Catalog, PatchRecord, season_from_month
from .codes import HashCode
from .geo import Rect
from .hamming_index import BALL_RADIUS_CAP, CodeTable, save_code_table
from .hashing import (
    HashingHead,
    Triplet,
    binarize_batch,
    extract_features,
    forward_batch,
    save_head,
    train,
)
from .labels import LabelHierarchy, UnknownLabel, default_hierarchy, write_hierarchy
from .store import ArchiveStore

# Bounding box used for synthetic data; covers the archive's ten European
# countries with room to spare.
EUROPE_LON = (-10.0, 30.0)
EUROPE_LAT = (35.0, 70.0)

SYNTHETIC_COUNTRIES = (
    "Austria",
    "Belgium",
    "Finland",
    "Ireland",
    "Kosovo",
    "Lithuania",
    "Luxembourg",
    "Portugal",
    "Serbia",
    "Switzerland",
)

_PATCH_HALF_DEG = 0.0055  # ~1.2 km squares


class ManifestError(ValueError):
    """Manifest parsing or validation failure; the message cites the location."""


@dataclass(slots=True)
class ManifestEntry:
    patch_name: str
    bounds: Rect
    labels: frozenset[str]
    acquisition_date: date
    satellite: str
    country: str
    season: str | None = None
    features: np.ndarray | None = None
    bands: dict[str, np.ndarray] | None = None
    band_files: dict[str, str] | None = None
    rgb_bands: tuple[str, str, str] | None = None


@dataclass
class Manifest:
    entries: list[ManifestEntry] = field(default_factory=list)
    base_dir: Path | None = None  # resolves relative band-file references

    def __len__(self) -> int:
        return len(self.entries)

    def feature_dim(self) -> int | None:
        for entry in self.entries:
            if entry.features is not None:
                return int(entry.features.shape[0])
        return None


def load_manifest(path, hierarchy: LabelHierarchy | None = None) -> Manifest:
    """Parses and validates a JSONL manifest; errors cite line numbers."""
    path = Path(path)
    hierarchy = hierarchy or default_hierarchy()
    entries: list[ManifestEntry] = []
    seen: dict[str, int] = {}
    dim: int | None = None
    dim_line = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}:{lineno}: not valid JSON: {exc}") from None
            try:
                entry = _entry_from_json(doc)
            except (KeyError, ValueError, TypeError) as exc:
                raise ManifestError(f"{path}:{lineno}: {exc}") from None
            if entry.patch_name in seen:
                raise ManifestError(
                    f"{path}:{lineno}: duplicate patch_name {entry.patch_name!r} "
                    f"(first on line {seen[entry.patch_name]})"
                )
            seen[entry.patch_name] = lineno
            try:
                hierarchy.check_labels(entry.labels)
            except UnknownLabel as exc:
                raise ManifestError(f"{path}:{lineno}: unknown label {exc.args[0]!r}") from None
            if entry.features is not None:
                if dim is None:
                    dim = entry.features.shape[0]
                    dim_line = lineno
                elif entry.features.shape[0] != dim:
                    raise ManifestError(
                        f"{path}:{lineno}: feature dimension {entry.features.shape[0]} "
                        f"!= {dim} (line {dim_line})"
                    )
            entries.append(entry)
    return Manifest(entries=entries, base_dir=path.parent)


def _entry_from_json(doc: dict) -> ManifestEntry:
    bounds = doc["bounds"]
    if not isinstance(bounds, (list, tuple)) or len(bounds) != 4:
        raise ValueError("bounds must be [min_lon, min_lat, max_lon, max_lat]")
    labels = frozenset(doc["labels"])
    if not labels:
        raise ValueError("labels must be non-empty")
    features = None
    if doc.get("features") is not None:
        features = np.asarray(doc["features"], dtype=np.float64)
        if features.ndim != 1:
            raise ValueError("features must be a flat list of numbers")
        if not np.isfinite(features).all():
            raise ValueError("features must be finite")
    rgb = tuple(doc["rgb_bands"]) if doc.get("rgb_bands") else None
    if rgb is not None and len(rgb) != 3:
        raise ValueError("rgb_bands must name exactly three bands")
    return ManifestEntry(
        patch_name=str(doc["patch_name"]),
        bounds=Rect(bounds[0], bounds[1], bounds[2], bounds[3]),
        labels=labels,
        acquisition_date=date.fromisoformat(doc["acquisition_date"]),
        satellite=str(doc["satellite"]),
        country=str(doc["country"]),
        season=doc.get("season"),
        features=features,
        band_files=dict(doc["band_files"]) if doc.get("band_files") else None,
        rgb_bands=rgb,
    )


def save_manifest(manifest: Manifest, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in manifest.entries:
            doc: dict = {
                "patch_name": entry.patch_name,
                "bounds": [
                    entry.bounds.min_lon,
                    entry.bounds.min_lat,
                    entry.bounds.max_lon,
                    entry.bounds.max_lat,
                ],
                "labels": sorted(entry.labels),
                "acquisition_date": entry.acquisition_date.isoformat(),
                "satellite": entry.satellite,
                "country": entry.country,
            }
            if entry.season:
                doc["season"] = entry.season
            if entry.features is not None:
                doc["features"] = [float(v) for v in entry.features]
            if entry.band_files:
                doc["band_files"] = entry.band_files
            if entry.rgb_bands:
                doc["rgb_bands"] = list(entry.rgb_bands)
            fh.write(json.dumps(doc, ensure_ascii=False) + "\n")


def generate_synthetic(
    seed: int,
    n: int,
    clusters: int,
    dim: int = 128,
    cluster_std: float = 0.4,
    labels_per_cluster: int = 3,
    with_bands: bool = False,
    hierarchy: LabelHierarchy | None = None,
) -> Manifest:
    """Deterministic clustered archive stand-in.

    Cluster k draws features from its own Gaussian center and carries its own
    label bundle; bounds land inside the European box. Same seed, same
    manifest.
    """
    if not n >= clusters >= 1:
        raise ValueError("need n >= clusters >= 1")
    hierarchy = hierarchy or default_hierarchy()
    rng = np.random.default_rng(seed)

    centers = rng.standard_normal((clusters, dim))
    leaves = list(hierarchy.leaves)
    bundles = []
    for k in range(clusters):
        picks = rng.choice(len(leaves), size=min(labels_per_cluster, len(leaves)), replace=False)
        bundles.append(frozenset(leaves[i] for i in sorted(picks)))

    assignment = rng.integers(0, clusters, size=n)
    assignment[:clusters] = np.arange(clusters)  # every cluster non-empty
    features = (
        centers[assignment] + rng.standard_normal((n, dim)) * cluster_std
    ).astype(np.float32)

    lons = rng.uniform(EUROPE_LON[0] + 0.1, EUROPE_LON[1] - 0.1, size=n)
    lats = rng.uniform(EUROPE_LAT[0] + 0.1, EUROPE_LAT[1] - 0.1, size=n)
    start = date(2017, 6, 1)
    day_offsets = rng.integers(0, 365, size=n)
    satellites = rng.integers(0, 2, size=n)
    countries = rng.integers(0, len(SYNTHETIC_COUNTRIES), size=n)

    width = len(str(max(n - 1, 1)))
    entries = []
    for i in range(n):
        k = int(assignment[i])
        bands = None
        rgb = None
        if with_bands:
            base = rng.uniform(0.2, 0.8, size=3)
            bands = {
                name: (base[j] + 0.1 * rng.standard_normal((8, 8))).astype(np.float32)
                for j, name in enumerate(("B02", "B03", "B04"))
            }
            rgb = ("B04", "B03", "B02")
        entries.append(
            ManifestEntry(
                patch_name=f"patch_{i:0{width}d}",
                bounds=Rect(
                    float(lons[i]) - _PATCH_HALF_DEG,
                    float(lats[i]) - _PATCH_HALF_DEG,
                    float(lons[i]) + _PATCH_HALF_DEG,
                    float(lats[i]) + _PATCH_HALF_DEG,
                ),
                labels=bundles[k],
                acquisition_date=start + timedelta(days=int(day_offsets[i])),
                satellite="S2" if satellites[i] else "S1",
                country=SYNTHETIC_COUNTRIES[countries[i]],
                features=features[i],
                bands=bands,
                rgb_bands=rgb,
            )
        )
    return Manifest(entries=entries)


def plant_entries(manifest: Manifest, entries: Sequence[ManifestEntry]) -> Manifest:
    """Adds hand-built entries (e.g. known label combinations) to a manifest."""
    known = {e.patch_name for e in manifest.entries}
    for entry in entries:
        if entry.patch_name in known:
            raise ManifestError(f"planted entry duplicates patch_name {entry.patch_name!r}")
    return Manifest(entries=list(manifest.entries) + list(entries), base_dir=manifest.base_dir)


@dataclass(frozen=True)
class IngestConfig:
    seed: int = 0
    bits: int = 128
    dim: int = 128  # used when no head and no explicit features fix it
    train_steps: int = 300
    learning_rate: float = 0.1
    triplets_per_anchor: int = 10
    max_anchors: int = 400
    candidate_pool: int = 256
    jaccard_positive: float = 0.5
    ball_cap: int = BALL_RADIUS_CAP
    audit: bool = True


def _jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def mine_triplets(
    entries: Sequence[ManifestEntry],
    features: np.ndarray,
    config: IngestConfig,
) -> list[Triplet]:
    """Label-overlap triplets: positives share >= half their labels with the
    anchor (Jaccard), negatives are label-disjoint."""
    rng = np.random.default_rng(config.seed + 1)
    n = len(entries)
    if n < 3:
        return []
    anchor_ids = rng.permutation(n)[: config.max_anchors]
    triplets: list[Triplet] = []
    for a in anchor_ids:
        pool = rng.permutation(n)[: config.candidate_pool]
        positives = []
        negatives = []
        a_labels = entries[a].labels
        for c in pool:
            if c == a:
                continue
            c_labels = entries[c].labels
            if not (a_labels & c_labels):
                negatives.append(c)
            elif _jaccard(a_labels, c_labels) >= config.jaccard_positive:
                positives.append(c)
        if not positives or not negatives:
            continue
        count = min(config.triplets_per_anchor, len(positives), len(negatives))
        pos_pick = rng.choice(len(positives), size=count, replace=False)
        neg_pick = rng.choice(len(negatives), size=count, replace=False)
        for p, g in zip(pos_pick, neg_pick):
            triplets.append(
                Triplet(features[a], features[positives[p]], features[negatives[g]])
            )
    return triplets


def _resolve_features(manifest: Manifest, dim: int) -> np.ndarray:
    """One (N, dim) matrix; entries without explicit features fall back to the
    baseline extractor over their band grids."""
    out = np.empty((len(manifest.entries), dim), dtype=np.float64)
    for i, entry in enumerate(manifest.entries):
        if entry.features is not None:
            if entry.features.shape[0] != dim:
                raise ManifestError(
                    f"{entry.patch_name}: feature dimension {entry.features.shape[0]} != {dim}"
                )
            out[i] = entry.features
        else:
            bands = _load_entry_bands(entry, manifest.base_dir)
            if not bands:
                raise ManifestError(
                    f"{entry.patch_name}: no features and no band data to extract them from"
                )
            out[i] = extract_features(bands, dim=dim)
    return out


def _load_entry_bands(entry: ManifestEntry, base_dir: Path | None) -> dict[str, np.ndarray]:
    if entry.bands is not None:
        return entry.bands
    if entry.band_files:
        base = base_dir or Path(".")
        return {name: np.load(base / rel) for name, rel in entry.band_files.items()}
    return {}


def build_archive(
    manifest: Manifest,
    out_dir,
    head: HashingHead | None = None,
    config: IngestConfig = IngestConfig(),
) -> ArchiveStore:
    """Builds and persists the archive; returns the loaded-equivalent store."""
    hierarchy = default_hierarchy()
    for entry in manifest.entries:
        hierarchy.check_labels(entry.labels)

    if head is not None:
        dim = head.dim
    else:
        dim = manifest.feature_dim() or config.dim

    if manifest.entries:
        features = _resolve_features(manifest, dim)
    else:
        features = np.empty((0, dim))

    if head is None:
        triplets = mine_triplets(manifest.entries, features, config)
        head = HashingHead.random(dim=dim, bits=config.bits, seed=config.seed)
        if triplets:
            head = train(head, triplets, config.train_steps, config.learning_rate)

    code_table = CodeTable(width=head.bits, ball_cap=config.ball_cap)
    catalog = Catalog(hierarchy)
    chunk = 8192
    for lo in range(0, len(manifest.entries), chunk):
        hi = min(lo + chunk, len(manifest.entries))
        soft = forward_batch(head, features[lo:hi])
        values = binarize_batch(soft)
        for i, value in enumerate(values):
            entry = manifest.entries[lo + i]
            code_table.insert(entry.patch_name, HashCode(value, head.bits))
            catalog.add(_record_from_entry(entry))
    code_table.freeze()
    catalog.freeze()

    root = store_mod.init_store_dir(out_dir)
    write_head_and_codes(root, head, code_table)
    store_mod.save_metadata(catalog, hierarchy, root / store_mod.METADATA_FILE)
    write_hierarchy(hierarchy, root / store_mod.HIERARCHY_FILE)
    _persist_blobs(manifest, root)

    archive = ArchiveStore(
        root=root, hierarchy=hierarchy, head=head, code_table=code_table, catalog=catalog
    )
    if config.audit:
        audit_archive(archive, expected=len(manifest.entries))
    return archive


def _record_from_entry(entry: ManifestEntry) -> PatchRecord:
    season = entry.season or season_from_month(entry.acquisition_date.month)
    return PatchRecord(
        patch_name=entry.patch_name,
        bounds=entry.bounds,
        labels=entry.labels,
        acquisition_date=entry.acquisition_date,
        season=season,
        satellite=entry.satellite,
        country=entry.country,
    )


def write_head_and_codes(root: Path, head: HashingHead, code_table: CodeTable) -> None:
    save_head(head, root / store_mod.HEAD_FILE)
    save_code_table(code_table, root / store_mod.CODES_FILE)


def _persist_blobs(manifest: Manifest, root: Path) -> None:
    for entry in manifest.entries:
        bands = _load_entry_bands(entry, manifest.base_dir)
        if not bands:
            continue
        np.savez(root / store_mod.BANDS_DIR / f"{entry.patch_name}.npz", **bands)
        if entry.rgb_bands and all(b in bands for b in entry.rgb_bands):
            image = store_mod.render_composite(bands, entry.rgb_bands)
            image.save(root / store_mod.RENDERED_DIR / f"{entry.patch_name}.png")


def audit_archive(archive: ArchiveStore, expected: int | None = None) -> None:
    """Counts equal across stores, buckets and block tables consistent, and
    no record missing from the spatial index."""
    n_codes = len(archive.code_table)
    n_records = len(archive.catalog)
    if n_codes != n_records:
        raise AssertionError(f"code count {n_codes} != record count {n_records}")
    if expected is not None and n_codes != expected:
        raise AssertionError(f"store size {n_codes} != manifest size {expected}")
    for name in archive.code_table.names():
        if name not in archive.catalog.records:
            raise AssertionError(f"{name!r} has a code but no metadata record")
    archive.code_table.audit()
    archive.catalog.geo_index.audit(archive.catalog.records)
