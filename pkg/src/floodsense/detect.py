"""Grid accumulation, population scaling, normalization and county declarations."""
from __future__ import annotations

import csv
import enum
import json
import logging
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import geo
from .geo import GeoShape, Grid, GridSpec, Point

log = logging.getLogger(__name__)


class Mode(str, enum.Enum):
    RELATIVE = "relative"
    ABSOLUTE = "absolute"


class NoSignalError(ValueError):
    """Relative normalization of a grid with no positive cell."""


@dataclass(frozen=True)
class DetectParams:
    alpha: float = 0.15
    T: float = 0.1
    mode: Mode = Mode.RELATIVE
    window: Optional[Tuple[datetime, datetime]] = None  # half-open [start, end)
    reference_max: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.T < 0:
            raise ValueError("T must be nonnegative")
        if self.mode is Mode.RELATIVE and self.T > 1:
            raise ValueError("relative threshold T must lie in [0, 1]")


@dataclass(frozen=True)
class Region:
    name: str
    shape: GeoShape
    population: float = 0.0


@dataclass(frozen=True)
class CountyDeclaration:
    county_name: str
    flooded: bool
    max_cell_height: float


@dataclass
class PopulationRaster:
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("population raster must be two-dimensional")
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise ValueError("population values must be finite and nonnegative")

    @classmethod
    def uniform(cls, spec: GridSpec, value: float = 1.0) -> "PopulationRaster":
        return cls(np.full((spec.n_rows, spec.n_cols), float(value)))

    @classmethod
    def from_csv(cls, path) -> "PopulationRaster":
        """Row 0 is the southernmost row; one comma-separated row per line."""
        return cls(np.loadtxt(path, delimiter=",", ndmin=2))

    def to_csv(self, path) -> None:
        np.savetxt(path, self.values, delimiter=",", fmt="%.17g")


@dataclass
class AccumulationReport:
    points: int = 0
    polygons: int = 0
    outside: int = 0
    mass: float = 0.0


# -- accumulation ------------------------------------------------------------

@lru_cache(maxsize=200_000)
def shape_contributions(shape: GeoShape, spec: GridSpec) -> Tuple[Tuple[Tuple[int, int], float], ...]:
    """Per-cell increments of one located shape: Area(g & p) / Area(p), or 1 for a point."""
    if isinstance(shape, Point):
        cell = spec.cell_of(shape.lat, shape.lon)
        return () if cell is None else ((cell, 1.0),)
    lat0, lat1, lon0, lon1 = shape.bounds
    lo_cell = spec.cell_of(lat0, lon0)
    if lo_cell is not None and lo_cell == spec.cell_of(lat1, lon1):
        return ((lo_cell, 1.0),)
    total = geo.area(shape)
    overlaps = geo.cell_overlap_areas(shape, spec)
    return tuple(sorted((k, v / total) for k, v in overlaps.items()))


def _located_shapes(located) -> List[GeoShape]:
    out = []
    for item in located:
        if item is None:
            continue
        out.append(item.shape if hasattr(item, "shape") else item)
    return out


def accumulate(grid: Grid, located: Iterable, report: Optional[AccumulationReport] = None,
               workers: int = 1) -> Grid:
    """Add each located shape's cell increments to a copy of ``grid``.

    Accepts InferredLocations or bare shapes. Per-cell sums use math.fsum, so
    the result does not depend on input order or on ``workers``.
    """
    spec = grid.spec()
    shapes = _located_shapes(located)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            contribs = list(ex.map(lambda s: shape_contributions(s, spec), shapes))
    else:
        contribs = [shape_contributions(s, spec) for s in shapes]

    per_cell: Dict[Tuple[int, int], List[float]] = defaultdict(list)
    rep = report if report is not None else AccumulationReport()
    for s, cs in zip(shapes, contribs):
        if isinstance(s, Point):
            rep.points += 1
        else:
            rep.polygons += 1
        if not cs:
            rep.outside += 1
        for cell, v in cs:
            per_cell[cell].append(v)

    heights = grid.heights.copy()
    for (i, j), vals in per_cell.items():
        heights[i, j] = math.fsum([heights[i, j]] + vals)
    rep.mass = math.fsum(v for vals in per_cell.values() for v in vals)
    if rep.outside:
        log.info("%d located shapes fell outside the grid bbox", rep.outside)
    return grid.copy(heights=heights)


# -- scaling and normalization -------------------------------------------------

def population_scale(grid: Grid, raster: PopulationRaster, alpha: float) -> Grid:
    """g_h / N_g**alpha on populated cells; zero-population cells are masked to 0."""
    pop = raster.values
    if pop.shape != grid.heights.shape:
        raise ValueError(f"raster shape {pop.shape} does not match grid {grid.heights.shape}")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    unpopulated = pop <= 0
    heights = grid.heights.copy()
    if alpha != 0:
        populated = ~unpopulated
        heights[populated] = heights[populated] / np.power(pop[populated], alpha)
    heights[unpopulated] = 0.0
    masked = unpopulated if grid.masked is None else (grid.masked | unpopulated)
    out = grid.copy(heights=heights)
    out.masked = masked
    return out


def normalize_relative(grid: Grid, reference_max: Optional[float] = None) -> Grid:
    """Divide by the grid maximum (or a supplied reference, e.g. the daily max)."""
    peak = float(grid.heights.max()) if reference_max is None else float(reference_max)
    if not peak > 0:
        raise NoSignalError("no signal: grid has no positive cell")
    return grid.copy(heights=grid.heights / peak)


# -- counties ------------------------------------------------------------------

class CountyOverlay:
    """Boolean county x cell overlap table (positive-area overlap)."""

    def __init__(self, counties: Sequence[Region], spec: GridSpec):
        self.counties = list(counties)
        self.spec = spec
        n_cells = spec.n_rows * spec.n_cols
        self.mask = np.zeros((len(self.counties), n_cells), dtype=bool)
        for k, c in enumerate(self.counties):
            for (i, j), a in geo.cell_overlap_areas(c.shape, spec).items():
                if a > 1e-9 * spec.cell_area(i):
                    self.mask[k, i * spec.n_cols + j] = True

    def max_heights(self, heights: np.ndarray) -> np.ndarray:
        flat = heights.reshape(-1)
        out = np.zeros(len(self.counties))
        for k in range(len(self.counties)):
            sel = flat[self.mask[k]]
            out[k] = sel.max() if sel.size else 0.0
        return out


_overlay_cache: Dict[tuple, CountyOverlay] = {}


def county_overlay(counties: Sequence[Region], spec: GridSpec) -> CountyOverlay:
    key = (tuple(counties), spec)
    ov = _overlay_cache.get(key)
    if ov is None:
        ov = _overlay_cache[key] = CountyOverlay(counties, spec)
    return ov


def declare_counties(grid: Grid, counties: Sequence[Region], T: float,
                     overlay: Optional[CountyOverlay] = None) -> List[CountyDeclaration]:
    """A county is flooded iff some overlapping cell has height strictly greater than T."""
    ov = overlay if overlay is not None else county_overlay(counties, grid.spec())
    heights = grid.heights
    if grid.masked is not None:
        heights = np.where(grid.masked, 0.0, heights)
    peaks = ov.max_heights(heights)
    return [CountyDeclaration(c.name, bool(p > T), float(p)) for c, p in zip(ov.counties, peaks)]


# -- window pipeline -----------------------------------------------------------

def in_window(messages, window) -> list:
    if window is None:
        return list(messages)
    start, end = window
    return [m for m in messages if start <= m.timestamp < end]


def detection_grid(located, spec: GridSpec, raster: PopulationRaster, params: DetectParams,
                   workers: int = 1) -> Grid:
    """accumulate -> population_scale -> (normalize if relative)."""
    grid = accumulate(geo.make_grid(spec.bbox, spec.n_rows, spec.n_cols), located, workers=workers)
    grid = population_scale(grid, raster, params.alpha)
    if params.mode is Mode.RELATIVE:
        grid = normalize_relative(grid, params.reference_max)
    return grid


def run_window(messages, backend, inference_params, params: DetectParams, spec: GridSpec,
               raster: PopulationRaster, counties: Sequence[Region], workers: int = 1):
    """locate -> accumulate -> scale -> normalize -> declare for one time window.

    Raises NoSignalError in relative mode when nothing was located.
    """
    from .locate import infer_batch

    msgs = in_window(messages, params.window)
    results, stats = infer_batch(msgs, backend, inference_params, workers=workers)
    grid = detection_grid([loc for _, loc in results], spec, raster, params, workers)
    return grid, declare_counties(grid, counties, params.T)


# -- outputs -------------------------------------------------------------------

def grid_feature_collection(grid: Grid) -> dict:
    la, lo = grid.lat_edges, grid.lon_edges
    feats = []
    for i in range(grid.n_rows):
        for j in range(grid.n_cols):
            ring = [[lo[j], la[i]], [lo[j + 1], la[i]], [lo[j + 1], la[i + 1]],
                    [lo[j], la[i + 1]], [lo[j], la[i]]]
            props = {"row": i, "col": j, "height": float(grid.heights[i, j])}
            if grid.masked is not None:
                props["masked"] = bool(grid.masked[i, j])
            feats.append({"type": "Feature", "properties": props,
                          "geometry": {"type": "Polygon", "coordinates": [ring]}})
    return {"type": "FeatureCollection", "bbox": [grid.bbox[2], grid.bbox[0], grid.bbox[3], grid.bbox[1]],
            "features": feats}


def grid_from_feature_collection(doc: dict) -> Grid:
    lon0, lat0, lon1, lat1 = doc["bbox"]
    feats = doc["features"]
    n_rows = 1 + max(f["properties"]["row"] for f in feats)
    n_cols = 1 + max(f["properties"]["col"] for f in feats)
    grid = geo.make_grid((lat0, lat1, lon0, lon1), n_rows, n_cols)
    masked = np.zeros((n_rows, n_cols), dtype=bool)
    for f in feats:
        p = f["properties"]
        grid.heights[p["row"], p["col"]] = p["height"]
        masked[p["row"], p["col"]] = p.get("masked", False)
    grid.masked = masked if masked.any() else None
    return grid


def read_grid_geojson(path) -> Grid:
    with open(path, encoding="utf-8") as fh:
        return grid_from_feature_collection(json.load(fh))


def write_grid_geojson(grid: Grid, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(grid_feature_collection(grid), fh)


def write_grid_csv(grid: Grid, path) -> None:
    """Height matrix, row 0 southernmost, repr-exact floats."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        for row in grid.heights:
            w.writerow([repr(float(v)) for v in row])


def write_declarations_csv(rows: Iterable[Tuple[str, CountyDeclaration]], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "county", "flooded", "max_cell_height"])
        for day, d in rows:
            w.writerow([day, d.county_name, int(d.flooded), repr(d.max_cell_height)])


def load_regions(path) -> List[Region]:
    """GeoJSON FeatureCollection with ``name`` and optional ``population`` properties."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    out = []
    for k, f in enumerate(doc.get("features", [])):
        props = f.get("properties") or {}
        if "name" not in props:
            raise ValueError(f"{path}: feature {k} has no 'name' property")
        out.append(Region(props["name"], geo.from_geojson(f["geometry"]),
                          float(props.get("population", 0.0))))
    return out


def write_regions(regions: Iterable[Region], path) -> None:
    feats = [{"type": "Feature", "properties": {"name": r.name, "population": r.population},
              "geometry": geo.to_geojson(r.shape)} for r in regions]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"type": "FeatureCollection", "features": feats}, fh)


def rasterize_population(regions: Sequence[Region], spec: GridSpec) -> PopulationRaster:
    """Spread each region's population over cells in proportion to overlap area."""
    cells: Dict[Tuple[int, int], List[float]] = defaultdict(list)
    for reg in regions:
        if reg.population <= 0:
            continue
        total = geo.area(reg.shape)
        for cell, a in geo.cell_overlap_areas(reg.shape, spec).items():
            cells[cell].append(reg.population * a / total)
    vals = np.zeros((spec.n_rows, spec.n_cols))
    for (i, j), v in cells.items():
        vals[i, j] = math.fsum(v)
    return PopulationRaster(vals)
