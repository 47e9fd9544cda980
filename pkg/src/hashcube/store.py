"""File-backed archive store.

Layout under the store root:
  metadata.jsonl   one record per patch (labels stored in compact ASCII form)
  codes.bin        binary code store
  head.bin         hashing head parameters
  hierarchy.txt    three-level label hierarchy
  bands/           per-patch raw band grids ({name}.npz)
  rendered/        per-patch RGB composites ({name}.png)
  feedback.jsonl   anonymous text feedback, append-only
"""

from __future__ import annotations

import io
import json
import zipfile
from dataclasses import dataclass
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from PIL import Image

from .catalog import Catalog, PatchRecord
from .geo import Rect
from .hamming_index import CodeTable, load_code_table
from .hashing import HashingHead, load_head
from .labels import LabelHierarchy, read_hierarchy

METADATA_FILE = "metadata.jsonl"
CODES_FILE = "codes.bin"
HEAD_FILE = "head.bin"
HIERARCHY_FILE = "hierarchy.txt"
BANDS_DIR = "bands"
RENDERED_DIR = "rendered"
FEEDBACK_FILE = "feedback.jsonl"


def record_to_json(record: PatchRecord, hierarchy: LabelHierarchy) -> dict:
    return {
        "patch_name": record.patch_name,
        "bounds": [
            record.bounds.min_lon,
            record.bounds.min_lat,
            record.bounds.max_lon,
            record.bounds.max_lat,
        ],
        "labels_enc": hierarchy.encode(record.labels),
        "acquisition_date": record.acquisition_date.isoformat(),
        "season": record.season,
        "satellite": record.satellite,
        "country": record.country,
    }


def record_from_json(doc: Mapping, hierarchy: LabelHierarchy) -> PatchRecord:
    bounds = doc["bounds"]
    return PatchRecord(
        patch_name=doc["patch_name"],
        bounds=Rect(bounds[0], bounds[1], bounds[2], bounds[3]),
        labels=hierarchy.decode(doc["labels_enc"]),
        acquisition_date=date.fromisoformat(doc["acquisition_date"]),
        season=doc["season"],
        satellite=doc["satellite"],
        country=doc["country"],
    )


def render_composite(bands: Mapping[str, np.ndarray], rgb_bands: Iterable[str]) -> Image.Image:
    """RGB composite: per-band min-max stretch to 8 bits, channels stacked."""
    channels = []
    for name in rgb_bands:
        grid = np.asarray(bands[name], dtype=np.float64)
        low, high = grid.min(), grid.max()
        if high > low:
            stretched = (grid - low) / (high - low) * 255.0
        else:
            stretched = np.zeros_like(grid)
        channels.append(stretched.astype(np.uint8))
    return Image.fromarray(np.stack(channels, axis=-1), "RGB")


@dataclass
class ArchiveStore:
    """A loaded archive: indexes in memory, blobs on disk."""

    root: Path
    hierarchy: LabelHierarchy
    head: HashingHead
    code_table: CodeTable
    catalog: Catalog

    @property
    def size(self) -> int:
        return len(self.code_table)

    # --- blobs -----------------------------------------------------------

    def bands_path(self, patch_name: str) -> Path:
        return self.root / BANDS_DIR / f"{patch_name}.npz"

    def rendered_path(self, patch_name: str) -> Path:
        return self.root / RENDERED_DIR / f"{patch_name}.png"

    def load_bands(self, patch_name: str) -> dict[str, np.ndarray]:
        path = self.bands_path(patch_name)
        if not path.exists():
            return {}
        with np.load(path) as data:
            return {name: data[name] for name in data.files}

    def bands_zip(self, patch_name: str) -> bytes:
        """All stored band grids of one patch, zipped as {band}.npy members."""
        buffer = io.BytesIO()
        with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as zf:
            for band, grid in sorted(self.load_bands(patch_name).items()):
                member = io.BytesIO()
                np.save(member, grid)
                zf.writestr(zipfile.ZipInfo(f"{band}.npy"), member.getvalue())
        return buffer.getvalue()

    # --- feedback --------------------------------------------------------

    def append_feedback(self, text: str, timestamp: str | None = None) -> int:
        if not text:
            raise ValueError("feedback text must be non-empty")
        if timestamp is None:
            timestamp = datetime.now(timezone.utc).isoformat()
        entry = {"timestamp": timestamp, "text": text}
        with open(self.root / FEEDBACK_FILE, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, ensure_ascii=False) + "\n")
        return self.feedback_count()

    def read_feedback(self) -> list[dict]:
        path = self.root / FEEDBACK_FILE
        if not path.exists():
            return []
        with open(path, "r", encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]

    def feedback_count(self) -> int:
        return len(self.read_feedback())


def save_metadata(catalog: Catalog, hierarchy: LabelHierarchy, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for name in catalog.sorted_names:
            doc = record_to_json(catalog.records[name], hierarchy)
            fh.write(json.dumps(doc, ensure_ascii=False) + "\n")


def load_metadata(path: Path, hierarchy: LabelHierarchy) -> Catalog:
    catalog = Catalog(hierarchy)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: bad metadata line: {exc}") from None
            catalog.add(record_from_json(doc, hierarchy))
    catalog.freeze()
    return catalog


def load_store(root) -> ArchiveStore:
    """Rebuilds the in-memory indexes from a persisted archive directory."""
    root = Path(root)
    if not (root / METADATA_FILE).exists():
        raise FileNotFoundError(f"{root} does not look like an archive store")
    hierarchy = read_hierarchy(root / HIERARCHY_FILE)
    head = load_head(root / HEAD_FILE)
    code_table = load_code_table(root / CODES_FILE)
    catalog = load_metadata(root / METADATA_FILE, hierarchy)
    if len(code_table) != len(catalog):
        raise ValueError(
            f"store is inconsistent: {len(code_table)} codes vs {len(catalog)} records"
        )
    return ArchiveStore(
        root=root, hierarchy=hierarchy, head=head, code_table=code_table, catalog=catalog
    )


def init_store_dir(root) -> Path:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    (root / BANDS_DIR).mkdir(exist_ok=True)
    (root / RENDERED_DIR).mkdir(exist_ok=True)
    (root / FEEDBACK_FILE).touch()
    return root
