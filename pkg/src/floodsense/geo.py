"""Points, polygons, areas and the lat/lon grid.

Coordinates are (lat, lon) degrees on the public surface; internally rings are
handled as (lon, lat) = (x, y) like GeoJSON. Areas are the integral of
cos(lat) over the region in lat/lon space, scaled by 111.32 km per degree,
which is additive under clipping (cells of a grid sum exactly to the whole).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import shapely
from shapely.geometry import MultiPolygon as _ShpMultiPolygon
from shapely.geometry import Point as _ShpPoint
from shapely.geometry import Polygon as _ShpPolygon
from shapely.geometry import shape as _shp_from_geojson

KM_PER_DEG = 111.32
EARTH_RADIUS_KM = KM_PER_DEG * 180.0 / math.pi

# (lat_min, lat_max, lon_min, lon_max)
ENGLAND_WALES_BBOX = (49.9, 55.9, -6.5, 1.8)

Ring = Tuple[Tuple[float, float], ...]  # closed, (lat, lon) vertices


class GeometryError(ValueError):
    pass


def _close(ring) -> Ring:
    ring = tuple((float(a), float(b)) for a, b in ring)
    if len(ring) and ring[0] != ring[-1]:
        ring = ring + (ring[0],)
    return ring


def _ring_area_xy(xs, ys) -> float:
    """Signed area (km^2) of a closed ring given lon (xs) and lat (ys) in degrees."""
    lam = np.radians(np.asarray(xs, dtype=float))
    phi = np.radians(np.asarray(ys, dtype=float))
    dlam = lam[1:] - lam[:-1]
    dphi = phi[1:] - phi[:-1]
    phim = 0.5 * (phi[1:] + phi[:-1])
    # exact line integral of -sin(phi) dlam along straight lat/lon edges
    s = -np.sum(dlam * np.sin(phim) * np.sinc(dphi / (2.0 * math.pi)))
    return float(s) * EARTH_RADIUS_KM ** 2


def _ring_area_pts(pts: Sequence[Tuple[float, float]]) -> float:
    """Unsigned area of an (x, y) vertex list, not necessarily closed; pure Python for small rings."""
    n = len(pts)
    if n < 3:
        return 0.0
    s = 0.0
    x0, y0 = pts[-1]
    for x1, y1 in pts:
        dphi = math.radians(y1 - y0)
        half = 0.5 * dphi
        sinc = math.sin(half) / half if half != 0.0 else 1.0
        s -= math.radians(x1 - x0) * math.sin(math.radians(0.5 * (y0 + y1))) * sinc
        x0, y0 = x1, y1
    return abs(s) * EARTH_RADIUS_KM ** 2


@dataclass(frozen=True)
class Point:
    lat: float
    lon: float

    def __post_init__(self):
        if not (-90.0 <= self.lat <= 90.0 and -180.0 <= self.lon <= 180.0):
            raise GeometryError(f"point ({self.lat}, {self.lon}) outside WGS84 bounds")

    @cached_property
    def shp(self):
        return _ShpPoint(self.lon, self.lat)

    @property
    def bounds(self):
        return (self.lat, self.lat, self.lon, self.lon)


@dataclass(frozen=True)
class Polygon:
    exterior: Ring
    holes: Tuple[Ring, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "exterior", _close(self.exterior))
        object.__setattr__(self, "holes", tuple(_close(h) for h in self.holes))
        for ring in (self.exterior,) + self.holes:
            if len(ring) < 4:
                raise GeometryError("polygon ring needs at least 3 distinct vertices")
            for lat, lon in ring:
                if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
                    raise GeometryError(f"vertex ({lat}, {lon}) outside WGS84 bounds")
        if area(self) <= 0.0:
            raise GeometryError("polygon has zero area")

    @classmethod
    def box(cls, lat_min, lat_max, lon_min, lon_max) -> "Polygon":
        return cls(((lat_min, lon_min), (lat_min, lon_max), (lat_max, lon_max),
                    (lat_max, lon_min), (lat_min, lon_min)))

    @cached_property
    def shp(self):
        return _ShpPolygon([(lo, la) for la, lo in self.exterior],
                           [[(lo, la) for la, lo in h] for h in self.holes])

    @property
    def polygons(self):
        return (self,)

    @cached_property
    def bounds(self):
        lats = [p[0] for p in self.exterior]
        lons = [p[1] for p in self.exterior]
        return (min(lats), max(lats), min(lons), max(lons))


@dataclass(frozen=True)
class MultiPolygon:
    polygons: Tuple[Polygon, ...]

    def __post_init__(self):
        object.__setattr__(self, "polygons", tuple(self.polygons))
        if not self.polygons:
            raise GeometryError("empty multipolygon")

    @cached_property
    def shp(self):
        return _ShpMultiPolygon([p.shp for p in self.polygons])

    @cached_property
    def bounds(self):
        b = [p.bounds for p in self.polygons]
        return (min(x[0] for x in b), max(x[1] for x in b),
                min(x[2] for x in b), max(x[3] for x in b))


GeoShape = Union[Point, Polygon, MultiPolygon]


def area(shape: GeoShape) -> float:
    """Area in km^2; points have zero area."""
    if isinstance(shape, Point):
        return 0.0
    total = 0.0
    for poly in shape.polygons:
        a = abs(_ring_area_xy([p[1] for p in poly.exterior], [p[0] for p in poly.exterior]))
        for h in poly.holes:
            a -= abs(_ring_area_xy([p[1] for p in h], [p[0] for p in h]))
        total += a
    return total


def from_shapely(geom) -> Optional[GeoShape]:
    """Convert a shapely geometry back; empty or zero-dimensional-only results map to None/Point."""
    if geom.is_empty:
        return None
    if geom.geom_type == "Point":
        return Point(geom.y, geom.x)
    polys = []
    parts = getattr(geom, "geoms", [geom])
    for g in parts:
        if g.geom_type == "Polygon" and not g.is_empty and g.area > 0:
            polys.append(Polygon([(y, x) for x, y in g.exterior.coords],
                                 tuple([(y, x) for x, y in r.coords] for r in g.interiors)))
        elif g.geom_type in ("MultiPolygon", "GeometryCollection"):
            sub = from_shapely(g)
            if isinstance(sub, Polygon):
                polys.append(sub)
            elif isinstance(sub, MultiPolygon):
                polys.extend(sub.polygons)
    if not polys:
        return None
    return polys[0] if len(polys) == 1 else MultiPolygon(tuple(polys))


def intersection_area(a: GeoShape, b: GeoShape) -> float:
    if isinstance(a, Point) or isinstance(b, Point):
        return 0.0
    if not bounds_overlap(a.bounds, b.bounds):
        return 0.0
    inter = from_shapely(shapely.intersection(a.shp, b.shp))
    if inter is None or isinstance(inter, Point):
        return 0.0
    return min(area(inter), area(a), area(b))


def intersects(a: GeoShape, b: GeoShape) -> bool:
    """Boundary-inclusive intersection test; covers point-in-polygon and point equality."""
    if not bounds_overlap(a.bounds, b.bounds):
        return False
    return bool(a.shp.intersects(b.shp))


def bounds_overlap(a, b) -> bool:
    return not (a[1] < b[0] or b[1] < a[0] or a[3] < b[2] or b[3] < a[2])


def representative_point(shape: GeoShape) -> Point:
    if isinstance(shape, Point):
        return shape
    p = shape.shp.representative_point()
    return Point(p.y, p.x)


# -- GeoJSON -----------------------------------------------------------------

def to_geojson(shape: GeoShape) -> dict:
    def ring(r):
        return [[lon, lat] for lat, lon in r]

    if isinstance(shape, Point):
        return {"type": "Point", "coordinates": [shape.lon, shape.lat]}
    if isinstance(shape, Polygon):
        return {"type": "Polygon", "coordinates": [ring(shape.exterior)] + [ring(h) for h in shape.holes]}
    return {"type": "MultiPolygon",
            "coordinates": [[ring(p.exterior)] + [ring(h) for h in p.holes] for p in shape.polygons]}


def from_geojson(obj: dict) -> GeoShape:
    t = obj.get("type")
    c = obj.get("coordinates")
    if t == "Point":
        return Point(float(c[1]), float(c[0]))
    if t == "Polygon":
        rings = [[(float(y), float(x)) for x, y, *_ in r] for r in c]
        return Polygon(rings[0], tuple(rings[1:]))
    if t == "MultiPolygon":
        return MultiPolygon(tuple(from_geojson({"type": "Polygon", "coordinates": p}) for p in c))
    if t == "Feature":
        return from_geojson(obj["geometry"])
    if t is not None:
        # anything else shapely understands, e.g. GeometryCollection
        out = from_shapely(_shp_from_geojson(obj))
        if out is not None:
            return out
    raise GeometryError(f"unsupported GeoJSON geometry {t!r}")


# -- Grid --------------------------------------------------------------------

@dataclass
class Grid:
    bbox: Tuple[float, float, float, float]
    n_rows: int
    n_cols: int
    heights: np.ndarray = field(repr=False)
    # True where the cell is masked (e.g. zero population); None = nothing masked
    masked: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        lat0, lat1, lon0, lon1 = self.bbox
        if not (lat0 < lat1 and lon0 < lon1):
            raise GeometryError(f"bbox {self.bbox} is not well ordered")
        if self.n_rows < 1 or self.n_cols < 1:
            raise GeometryError("grid needs at least one row and one column")
        if self.heights.shape != (self.n_rows, self.n_cols):
            raise GeometryError("heights shape does not match grid dimensions")

    @property
    def lat_edges(self) -> np.ndarray:
        return np.linspace(self.bbox[0], self.bbox[1], self.n_rows + 1)

    @property
    def lon_edges(self) -> np.ndarray:
        return np.linspace(self.bbox[2], self.bbox[3], self.n_cols + 1)

    def spec(self) -> "GridSpec":
        return GridSpec(tuple(self.bbox), self.n_rows, self.n_cols)

    def copy(self, heights=None) -> "Grid":
        return Grid(self.bbox, self.n_rows, self.n_cols,
                    self.heights.copy() if heights is None else heights,
                    None if self.masked is None else self.masked.copy())

    def cell_polygon(self, i: int, j: int) -> Polygon:
        la, lo = self.lat_edges, self.lon_edges
        return Polygon.box(la[i], la[i + 1], lo[j], lo[j + 1])

    def cell_of(self, lat: float, lon: float) -> Optional[Tuple[int, int]]:
        return self.spec().cell_of(lat, lon)


@dataclass(frozen=True)
class GridSpec:
    bbox: Tuple[float, float, float, float] = ENGLAND_WALES_BBOX
    n_rows: int = 64
    n_cols: int = 64

    @cached_property
    def lat_edges(self) -> np.ndarray:
        return np.linspace(self.bbox[0], self.bbox[1], self.n_rows + 1)

    @cached_property
    def lon_edges(self) -> np.ndarray:
        return np.linspace(self.bbox[2], self.bbox[3], self.n_cols + 1)

    def cell_of(self, lat: float, lon: float) -> Optional[Tuple[int, int]]:
        """Containing cell; low edges closed, high edges open except on the bbox boundary."""
        lat0, lat1, lon0, lon1 = self.bbox
        if not (lat0 <= lat <= lat1 and lon0 <= lon <= lon1):
            return None
        i = min(int(np.searchsorted(self.lat_edges, lat, side="right")) - 1, self.n_rows - 1)
        j = min(int(np.searchsorted(self.lon_edges, lon, side="right")) - 1, self.n_cols - 1)
        return i, j

    def cell_area(self, i: int) -> float:
        la, lo = self.lat_edges, self.lon_edges
        return _ring_area_pts([(lo[0], la[i]), (lo[1], la[i]), (lo[1], la[i + 1]), (lo[0], la[i + 1])])


def make_grid(bbox=ENGLAND_WALES_BBOX, n_rows: int = 64, n_cols: int = 64) -> Grid:
    return Grid(tuple(float(v) for v in bbox), int(n_rows), int(n_cols),
                np.zeros((int(n_rows), int(n_cols))))


def _clip_axis(pts, axis: int, lo: float, hi: float):
    """Sutherland-Hodgman clip of an open (x, y) vertex list to lo <= coord[axis] <= hi."""
    for bound, keep_above in ((lo, True), (hi, False)):
        if not pts:
            return pts
        out = []
        prev = pts[-1]
        pv = prev[axis]
        p_in = pv >= bound if keep_above else pv <= bound
        for cur in pts:
            cv = cur[axis]
            c_in = cv >= bound if keep_above else cv <= bound
            if c_in != p_in:
                t = (bound - pv) / (cv - pv)
                if axis == 0:
                    out.append((bound, prev[1] + t * (cur[1] - prev[1])))
                else:
                    out.append((prev[0] + t * (cur[0] - prev[0]), bound))
            if c_in:
                out.append(cur)
            prev, pv, p_in = cur, cv, c_in
        pts = out
    return pts


def _ring_cell_areas(ring_xy, spec: GridSpec, acc: Dict[Tuple[int, int], float], sign: float):
    ys = [p[1] for p in ring_xy]
    xs = [p[0] for p in ring_xy]
    la, lo = spec.lat_edges, spec.lon_edges
    r0 = max(int(np.searchsorted(la, min(ys), side="right")) - 1, 0)
    r1 = min(int(np.searchsorted(la, max(ys), side="left")), spec.n_rows)
    c0 = max(int(np.searchsorted(lo, min(xs), side="right")) - 1, 0)
    c1 = min(int(np.searchsorted(lo, max(xs), side="left")), spec.n_cols)
    for i in range(r0, r1):
        band = _clip_axis(ring_xy, 1, la[i], la[i + 1])
        if len(band) < 3:
            continue
        bx = [p[0] for p in band]
        j0 = max(int(np.searchsorted(lo, min(bx), side="right")) - 1, c0)
        j1 = min(int(np.searchsorted(lo, max(bx), side="left")), c1)
        for j in range(j0, j1):
            piece = _clip_axis(band, 0, lo[j], lo[j + 1])
            if len(piece) < 3:
                continue
            a = _ring_area_pts(piece)
            if a > 0.0:
                acc[(i, j)] = acc.get((i, j), 0.0) + sign * a


def cell_overlap_areas(shape: GeoShape, spec: GridSpec) -> Dict[Tuple[int, int], float]:
    """Area (km^2) of shape within each grid cell it overlaps; the bbox clips the shape."""
    acc: Dict[Tuple[int, int], float] = {}
    if isinstance(shape, Point):
        return acc
    bb = spec.bbox
    if not bounds_overlap(shape.bounds, bb):
        return acc
    for poly in shape.polygons:
        _ring_cell_areas([(lon, lat) for lat, lon in poly.exterior[:-1]], spec, acc, 1.0)
        for h in poly.holes:
            _ring_cell_areas([(lon, lat) for lat, lon in h[:-1]], spec, acc, -1.0)
    return {k: v for k, v in acc.items() if v > 0.0}
