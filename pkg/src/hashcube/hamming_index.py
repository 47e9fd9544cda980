"""In-memory binary-code index with exact Hamming-radius and k-NN retrieval.

Small radii probe the enumerated Hamming ball directly against exact-code
buckets. Larger radii switch to multi-index candidate generation: the code
splits into 4 blocks, and any code within distance r of the query must match
the query on some block within floor(r/4) bit flips (pigeonhole), so probing
per-block sub-tables yields a candidate superset that exact verification
then filters. Results are always exact and deterministically ordered by
(distance, patch name).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterator

import numpy as np

from .codes import HashCode

CODES_MAGIC = b"HQCT"
CODES_VERSION = 1

BALL_RADIUS_CAP = 2
BLOCK_COUNT = 4

_POPCOUNT8 = np.array([bin(v).count("1") for v in range(256)], dtype=np.uint16)


class RadiusTooLarge(ValueError):
    """Ball enumeration refused; the caller should use the multi-index path."""


class DuplicateName(KeyError):
    """A patch name was inserted twice."""


@dataclass(frozen=True)
class Neighbor:
    patch_name: str
    distance: int


def hamming_distance(a: HashCode, b: HashCode) -> int:
    """Number of differing bits; a metric on equal-width codes."""
    if a.width != b.width:
        raise ValueError(f"code widths differ: {a.width} vs {b.width}")
    return (a.value ^ b.value).bit_count()


def _ball_values(center: int, width: int, radius: int) -> Iterator[tuple[int, int]]:
    """Yields (code value, distance) for every code within `radius` of center."""
    yield center, 0
    masks = [1 << j for j in range(width)]
    for k in range(1, radius + 1):
        for positions in combinations(masks, k):
            flipped = center
            for m in positions:
                flipped ^= m
            yield flipped, k


def ball_size(width: int, radius: int) -> int:
    return sum(comb(width, k) for k in range(radius + 1))


def enumerate_ball(center: HashCode, radius: int, cap: int = BALL_RADIUS_CAP) -> set[HashCode]:
    """All codes within Hamming distance `radius` of the center.

    Sizes grow as the binomial sum, so radii above `cap` are refused.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius > cap:
        raise RadiusTooLarge(
            f"radius {radius} exceeds the enumeration cap {cap}; "
            "use the multi-index query path instead"
        )
    return {HashCode(v, center.width) for v, _ in _ball_values(center.value, center.width, radius)}


class CodeTable:
    """Patch-name -> code table with exact-code buckets and block sub-tables.

    Build single-threaded, then `freeze()`; a frozen table is immutable and
    safe for concurrent readers.
    """

    def __init__(self, width: int = 128, ball_cap: int = BALL_RADIUS_CAP):
        if width < 1:
            raise ValueError("width must be >= 1")
        if width % BLOCK_COUNT != 0:
            raise ValueError(f"width must be a multiple of {BLOCK_COUNT}, got {width}")
        self.width = width
        self.ball_cap = ball_cap
        self.block_bits = width // BLOCK_COUNT
        self._block_mask = (1 << self.block_bits) - 1
        self._name_to_code: dict[str, int] = {}
        self._buckets: dict[int, list[str]] = {}
        self._block_tables: list[dict[int, list[str]]] = [{} for _ in range(BLOCK_COUNT)]
        self._frozen = False
        self._scan_names: list[str] | None = None
        self._scan_codes: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self._name_to_code)

    def __contains__(self, name: str) -> bool:
        return name in self._name_to_code

    def names(self) -> Iterator[str]:
        return iter(self._name_to_code)

    def _blocks(self, value: int) -> list[int]:
        return [(value >> (i * self.block_bits)) & self._block_mask for i in range(BLOCK_COUNT)]

    def insert(self, name: str, code: HashCode) -> None:
        if self._frozen:
            raise RuntimeError("table is frozen")
        if code.width != self.width:
            raise ValueError(f"code width {code.width} != table width {self.width}")
        if name in self._name_to_code:
            raise DuplicateName(name)
        value = code.value
        self._name_to_code[name] = value
        self._buckets.setdefault(value, []).append(name)
        for i, block in enumerate(self._blocks(value)):
            self._block_tables[i].setdefault(block, []).append(name)

    def lookup(self, name: str) -> HashCode:
        return HashCode(self._name_to_code[name], self.width)

    def freeze(self) -> None:
        """Sorts buckets for deterministic output and builds the scan arrays."""
        if self._frozen:
            return
        for bucket in self._buckets.values():
            bucket.sort()
        self._scan_names = sorted(self._name_to_code)
        if self.width % 8 == 0 and self._scan_names:
            nbytes = self.width // 8
            packed = np.empty((len(self._scan_names), nbytes), dtype=np.uint8)
            for row, name in enumerate(self._scan_names):
                packed[row] = np.frombuffer(
                    self._name_to_code[name].to_bytes(nbytes, "little"), dtype=np.uint8
                )
            self._scan_codes = packed
        self._frozen = True

    @property
    def frozen(self) -> bool:
        return self._frozen

    def audit(self) -> None:
        """Cross-checks buckets and every block table against name_to_code."""
        total = 0
        for value, names in self._buckets.items():
            for name in names:
                if self._name_to_code.get(name) != value:
                    raise AssertionError(f"bucket disagrees with name table for {name!r}")
            total += len(names)
        if total != len(self._name_to_code):
            raise AssertionError(f"bucket membership count {total} != {len(self._name_to_code)}")
        for i, table in enumerate(self._block_tables):
            count = 0
            for block, names in table.items():
                for name in names:
                    actual = self._blocks(self._name_to_code[name])[i]
                    if actual != block:
                        raise AssertionError(f"block table {i} disagrees for {name!r}")
                count += len(names)
            if count != len(self._name_to_code):
                raise AssertionError(f"block table {i} count {count} != {len(self._name_to_code)}")

    # --- retrieval -------------------------------------------------------

    def query_radius(self, query: HashCode, radius: int) -> list[Neighbor]:
        """All stored names within `radius`, ordered by (distance, name)."""
        if query.width != self.width:
            raise ValueError(f"query width {query.width} != table width {self.width}")
        if not 0 <= radius <= self.width:
            raise ValueError(f"radius must be in [0, {self.width}]")
        if radius <= self.ball_cap:
            hits = self._radius_by_enumeration(query.value, radius)
        else:
            block_radius = radius // BLOCK_COUNT
            # Probing cost ~ 4 * C(block_bits, <=block_radius); a full scan of the
            # packed code matrix is cheaper once that exceeds the table size.
            if ball_size(self.block_bits, block_radius) * BLOCK_COUNT > max(len(self), 1):
                hits = self._radius_by_scan(query.value, radius)
            else:
                hits = self._radius_by_blocks(query.value, radius)
        hits.sort()
        return [Neighbor(name, dist) for dist, name in hits]

    def _radius_by_enumeration(self, value: int, radius: int) -> list[tuple[int, str]]:
        hits: list[tuple[int, str]] = []
        buckets = self._buckets
        for candidate, dist in _ball_values(value, self.width, radius):
            names = buckets.get(candidate)
            if names:
                hits.extend((dist, name) for name in names)
        return hits

    def _radius_by_blocks(self, value: int, radius: int) -> list[tuple[int, str]]:
        block_radius = radius // BLOCK_COUNT
        seen: set[str] = set()
        for i, table in enumerate(self._block_tables):
            query_block = (value >> (i * self.block_bits)) & self._block_mask
            for candidate, _ in _ball_values(query_block, self.block_bits, block_radius):
                names = table.get(candidate)
                if names:
                    seen.update(names)
        hits = []
        for name in seen:
            dist = (self._name_to_code[name] ^ value).bit_count()
            if dist <= radius:
                hits.append((dist, name))
        return hits

    def _radius_by_scan(self, value: int, radius: int) -> list[tuple[int, str]]:
        if self._frozen and self._scan_codes is not None:
            packed = np.frombuffer(value.to_bytes(self.width // 8, "little"), dtype=np.uint8)
            dists = _POPCOUNT8[self._scan_codes ^ packed].sum(axis=1)
            idx = np.nonzero(dists <= radius)[0]
            names = self._scan_names
            return [(int(dists[i]), names[i]) for i in idx]
        return [
            (dist, name)
            for name, stored in self._name_to_code.items()
            if (dist := (stored ^ value).bit_count()) <= radius
        ]

    def query_knn(self, query: HashCode, k: int) -> list[Neighbor]:
        """The k nearest stored names (fewer if the table is smaller), found by
        growing the search radius until enough neighbors accumulate."""
        if k < 1:
            raise ValueError("k must be >= 1")
        radius = self.ball_cap
        while True:
            result = self.query_radius(query, radius)
            if len(result) >= min(k, len(self)) or radius >= self.width:
                return result[:k]
            radius = min(self.width, radius * 2 if radius > 0 else 1)


def save_code_table(table: CodeTable, path) -> None:
    """Code store file: magic, version, width, count, then (name, code) records."""
    if table.width % 8 != 0:
        raise ValueError("persisting requires the width to be a whole number of bytes")
    nbytes = table.width // 8
    names = sorted(table.names())
    with open(path, "wb") as fh:
        fh.write(CODES_MAGIC)
        fh.write(struct.pack("<HIQ", CODES_VERSION, table.width, len(names)))
        for name in names:
            raw = name.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(table.lookup(name).to_bytes())


def load_code_table(path, ball_cap: int = BALL_RADIUS_CAP) -> CodeTable:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CODES_MAGIC:
            raise ValueError(f"not a code store file: bad magic {magic!r}")
        version, width, count = struct.unpack("<HIQ", fh.read(14))
        if version != CODES_VERSION:
            raise ValueError(f"unsupported code store version {version}")
        table = CodeTable(width=width, ball_cap=ball_cap)
        nbytes = width // 8
        for _ in range(count):
            (name_len,) = struct.unpack("<H", fh.read(2))
            name = fh.read(name_len).decode("utf-8")
            code = HashCode.from_bytes(fh.read(nbytes), width)
            table.insert(name, code)
    table.freeze()
    return table
