"""Geohash cells and shape/rectangle intersection tests (WGS84 degrees).

Cell ids are the raw interleaved bit values of a fixed-precision geohash
(5 base32 characters = 25 bits: 13 longitude, 12 latitude); `cell_to_base32`
renders the conventional string form. Circle tests use an equirectangular
local approximation of meters at the circle's center latitude, so the error
grows near the poles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Union

GEOHASH_PRECISION = 5
_LON_BITS = 13  # ceil(5 * 5 / 2): interleave starts with longitude
_LAT_BITS = 12
_BASE32 = "0123456789bcdefghjkmnpqrstuvwxyz"

EARTH_RADIUS_M = 6_371_000.0
M_PER_DEG_LAT = math.pi * EARTH_RADIUS_M / 180.0


def _check_lon(lon: float) -> None:
    if not -180.0 <= lon <= 180.0:
        raise ValueError(f"longitude {lon} out of range [-180, 180]")


def _check_lat(lat: float) -> None:
    if not -90.0 <= lat <= 90.0:
        raise ValueError(f"latitude {lat} out of range [-90, 90]")


@dataclass(frozen=True)
class Rect:
    """Axis-aligned geographic rectangle, corners inclusive."""

    min_lon: float
    min_lat: float
    max_lon: float
    max_lat: float

    def __post_init__(self) -> None:
        _check_lon(self.min_lon)
        _check_lon(self.max_lon)
        _check_lat(self.min_lat)
        _check_lat(self.max_lat)
        if self.min_lon > self.max_lon or self.min_lat > self.max_lat:
            raise ValueError("rectangle corners must satisfy min <= max on both axes")

    def intersects(self, other: Rect) -> bool:
        return not (
            self.max_lon < other.min_lon
            or other.max_lon < self.min_lon
            or self.max_lat < other.min_lat
            or other.max_lat < self.min_lat
        )

    def contains_point(self, lon: float, lat: float) -> bool:
        return self.min_lon <= lon <= self.max_lon and self.min_lat <= lat <= self.max_lat


@dataclass(frozen=True)
class Circle:
    center_lon: float
    center_lat: float
    radius_m: float

    def __post_init__(self) -> None:
        _check_lon(self.center_lon)
        _check_lat(self.center_lat)
        if self.radius_m <= 0:
            raise ValueError("circle radius must be > 0")


@dataclass(frozen=True)
class Polygon:
    """Closed, non-self-intersecting ring; the first vertex is not repeated."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        verts = tuple((float(lon), float(lat)) for lon, lat in self.vertices)
        if len(verts) >= 2 and verts[0] == verts[-1]:
            verts = verts[:-1]  # accept an explicitly closed ring
        if len(verts) < 3:
            raise ValueError("polygon needs at least 3 distinct vertices")
        for lon, lat in verts:
            _check_lon(lon)
            _check_lat(lat)
        if len(set(verts)) != len(verts):
            raise ValueError("polygon has repeated vertices")
        object.__setattr__(self, "vertices", verts)
        if self._self_intersects():
            raise ValueError("polygon is self-intersecting")

    def edges(self) -> Iterator[tuple[tuple[float, float], tuple[float, float]]]:
        verts = self.vertices
        for i in range(len(verts)):
            yield verts[i], verts[(i + 1) % len(verts)]

    def _self_intersects(self) -> bool:
        edges = list(self.edges())
        n = len(edges)
        for i in range(n):
            for j in range(i + 1, n):
                adjacent = j == i + 1 or (i == 0 and j == n - 1)
                if adjacent:
                    continue
                if segments_intersect(*edges[i], *edges[j]):
                    return True
        return False


Shape = Union[Rect, Circle, Polygon]


# --- exact shape/rectangle predicates -------------------------------------


def meters_per_deg_lon(lat: float) -> float:
    return M_PER_DEG_LAT * math.cos(math.radians(lat))


def circle_intersects_rect(circle: Circle, rect: Rect) -> bool:
    """Distance from center to the rectangle, in the local meter frame."""
    m_lon = meters_per_deg_lon(circle.center_lat)
    x0 = (rect.min_lon - circle.center_lon) * m_lon
    x1 = (rect.max_lon - circle.center_lon) * m_lon
    y0 = (rect.min_lat - circle.center_lat) * M_PER_DEG_LAT
    y1 = (rect.max_lat - circle.center_lat) * M_PER_DEG_LAT
    nearest_x = min(max(0.0, x0), x1)
    nearest_y = min(max(0.0, y0), y1)
    return nearest_x * nearest_x + nearest_y * nearest_y <= circle.radius_m**2


def _orientation(p, q, r) -> int:
    v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    if v > 0:
        return 1
    if v < 0:
        return -1
    return 0


def _on_segment(p, q, r) -> bool:
    """Whether r lies on segment pq, assuming the three are collinear."""
    return min(p[0], q[0]) <= r[0] <= max(p[0], q[0]) and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])


def segments_intersect(a1, a2, b1, b2) -> bool:
    """Inclusive segment intersection (touching endpoints count)."""
    o1 = _orientation(a1, a2, b1)
    o2 = _orientation(a1, a2, b2)
    o3 = _orientation(b1, b2, a1)
    o4 = _orientation(b1, b2, a2)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and _on_segment(a1, a2, b1):
        return True
    if o2 == 0 and _on_segment(a1, a2, b2):
        return True
    if o3 == 0 and _on_segment(b1, b2, a1):
        return True
    if o4 == 0 and _on_segment(b1, b2, a2):
        return True
    return False


def point_in_polygon(lon: float, lat: float, polygon: Polygon) -> bool:
    """Even-odd ray cast; boundary points are not guaranteed either way."""
    inside = False
    for (x1, y1), (x2, y2) in polygon.edges():
        if (y1 > lat) != (y2 > lat):
            x_cross = x1 + (lat - y1) * (x2 - x1) / (y2 - y1)
            if lon < x_cross:
                inside = not inside
    return inside


def polygon_intersects_rect(polygon: Polygon, rect: Rect) -> bool:
    for lon, lat in polygon.vertices:
        if rect.contains_point(lon, lat):
            return True
    corners = [
        (rect.min_lon, rect.min_lat),
        (rect.min_lon, rect.max_lat),
        (rect.max_lon, rect.max_lat),
        (rect.max_lon, rect.min_lat),
    ]
    for corner in corners:
        if point_in_polygon(corner[0], corner[1], polygon):
            return True
    rect_edges = [(corners[i], corners[(i + 1) % 4]) for i in range(4)]
    for edge in polygon.edges():
        for r_edge in rect_edges:
            if segments_intersect(edge[0], edge[1], r_edge[0], r_edge[1]):
                return True
    return False


def shape_intersects_rect(shape: Shape, rect: Rect) -> bool:
    if isinstance(shape, Rect):
        return shape.intersects(rect)
    if isinstance(shape, Circle):
        return circle_intersects_rect(shape, rect)
    if isinstance(shape, Polygon):
        return polygon_intersects_rect(shape, rect)
    raise ValueError(f"unsupported shape type {type(shape).__name__}")


def shape_bbox(shape: Shape) -> Rect:
    if isinstance(shape, Rect):
        return shape
    if isinstance(shape, Circle):
        d_lat = shape.radius_m / M_PER_DEG_LAT
        m_lon = meters_per_deg_lon(shape.center_lat)
        d_lon = 180.0 if m_lon < 1e-9 else shape.radius_m / m_lon
        return Rect(
            max(-180.0, shape.center_lon - d_lon),
            max(-90.0, shape.center_lat - d_lat),
            min(180.0, shape.center_lon + d_lon),
            min(90.0, shape.center_lat + d_lat),
        )
    if isinstance(shape, Polygon):
        lons = [v[0] for v in shape.vertices]
        lats = [v[1] for v in shape.vertices]
        return Rect(min(lons), min(lats), max(lons), max(lats))
    raise ValueError(f"unsupported shape type {type(shape).__name__}")


# --- geohash cells ---------------------------------------------------------


def _cell_coords(lon: float, lat: float) -> tuple[int, int]:
    ix = int((lon + 180.0) / 360.0 * (1 << _LON_BITS))
    iy = int((lat + 90.0) / 180.0 * (1 << _LAT_BITS))
    return min(ix, (1 << _LON_BITS) - 1), min(iy, (1 << _LAT_BITS) - 1)


def _interleave(ix: int, iy: int) -> int:
    """MSB-first alternation starting with a longitude bit."""
    value = 0
    for k in range(_LON_BITS):
        value |= ((ix >> (_LON_BITS - 1 - k)) & 1) << (24 - 2 * k)
    for k in range(_LAT_BITS):
        value |= ((iy >> (_LAT_BITS - 1 - k)) & 1) << (23 - 2 * k)
    return value


def cell_of(lon: float, lat: float) -> int:
    """25-bit geohash cell id for a point."""
    ix, iy = _cell_coords(lon, lat)
    return _interleave(ix, iy)


def cell_to_base32(cell: int) -> str:
    chars = []
    for group in range(GEOHASH_PRECISION):
        shift = 5 * (GEOHASH_PRECISION - 1 - group)
        chars.append(_BASE32[(cell >> shift) & 0x1F])
    return "".join(chars)


def covering_cell_count(rect: Rect) -> int:
    ix0, iy0 = _cell_coords(rect.min_lon, rect.min_lat)
    ix1, iy1 = _cell_coords(rect.max_lon, rect.max_lat)
    return (ix1 - ix0 + 1) * (iy1 - iy0 + 1)


def covering_cells(rect: Rect) -> Iterator[int]:
    """Every precision-5 cell the rectangle touches."""
    ix0, iy0 = _cell_coords(rect.min_lon, rect.min_lat)
    ix1, iy1 = _cell_coords(rect.max_lon, rect.max_lat)
    for ix in range(ix0, ix1 + 1):
        for iy in range(iy0, iy1 + 1):
            yield _interleave(ix, iy)
