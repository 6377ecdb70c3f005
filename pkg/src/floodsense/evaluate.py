"""Validation against ground-truth flood records: metrics, F-beta, parameter sweep, correlation."""
from __future__ import annotations

import csv
import enum
import itertools
import json
import math
import string
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import detect, geo
from .corpus import Message
from .detect import DetectParams, Mode, NoSignalError, PopulationRaster, Region
from .geo import GridSpec
from .locate import InferenceParams, collect_candidates, infer_from_candidates


class Severity(enum.IntEnum):
    MINOR = 1
    SIGNIFICANT = 2
    SEVERE = 3


SEVERITY_ALIASES = {
    "minor": Severity.MINOR,
    "significant": Severity.SIGNIFICANT,
    "major": Severity.SIGNIFICANT,
    "severe": Severity.SEVERE,
    "1": Severity.MINOR,
    "2": Severity.SIGNIFICANT,
    "3": Severity.SEVERE,
}

DEFAULT_SEVERITY_FACTORS = {Severity.MINOR: 1.0, Severity.SIGNIFICANT: 2.0, Severity.SEVERE: 3.0}


@dataclass(frozen=True)
class EventRecord:
    date: date
    county_name: str
    severity: Severity = Severity.MINOR


_STRIP = str.maketrans("", "", string.punctuation)


def normalize_county(name: str) -> str:
    return " ".join(name.casefold().translate(_STRIP).split())


class CountyRegistry:
    """Resolves free-form county names (plus aliases) to canonical region names."""

    def __init__(self, names: Iterable[str], aliases: Optional[Mapping[str, str]] = None):
        self._canon = {normalize_county(n): n for n in names}
        for alias, target in (aliases or {}).items():
            canonical = self._canon.get(normalize_county(target))
            if canonical is None:
                raise ValueError(f"alias {alias!r} points at unknown county {target!r}")
            self._canon[normalize_county(alias)] = canonical

    def resolve(self, name: str) -> Optional[str]:
        return self._canon.get(normalize_county(name))

    @classmethod
    def from_regions(cls, regions: Sequence[Region], alias_path=None) -> "CountyRegistry":
        aliases = {}
        if alias_path:
            with open(alias_path, encoding="utf-8", newline="") as fh:
                for row in csv.reader(fh):
                    if row and not row[0].startswith("#"):
                        aliases[row[0]] = row[1]
        return cls([r.name for r in regions], aliases)


def read_truth_csv(path) -> List[EventRecord]:
    """CSV with header ``date,county,severity``; severity minor/significant(major)/severe."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.DictReader(fh), start=2):
            try:
                sev = SEVERITY_ALIASES[row["severity"].strip().lower()]
                out.append(EventRecord(date.fromisoformat(row["date"].strip()), row["county"].strip(), sev))
            except (KeyError, ValueError, AttributeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad truth row: {exc}") from None
    return out


def write_truth_csv(records: Iterable[EventRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "county", "severity"])
        for r in records:
            w.writerow([r.date.isoformat(), r.county_name, r.severity.name.lower()])


@dataclass
class DayMetrics:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    precision_defined: bool = True
    recall_defined: bool = True


def day_metrics(declarations, truth: Iterable[EventRecord],
                registry: Optional[CountyRegistry] = None) -> DayMetrics:
    """TP/FP/FN over counties for one day; undefined precision or recall is reported as 0 and flagged.

    ``declarations`` are CountyDeclarations (only flooded ones count) or plain county names.
    """
    declared = set()
    for d in declarations:
        if isinstance(d, str):
            declared.add(d)
        elif d.flooded:
            declared.add(d.county_name)
    truth_names = {t.county_name for t in truth}
    if registry is not None:
        unresolved = sorted(n for n in truth_names if registry.resolve(n) is None)
        if unresolved:
            raise ValueError(f"unknown county names in truth: {unresolved}")
        truth_names = {registry.resolve(n) for n in truth_names}
        declared = {registry.resolve(n) or n for n in declared}
    tp = len(declared & truth_names)
    fp = len(declared - truth_names)
    fn = len(truth_names - declared)
    return DayMetrics(
        tp, fp, fn,
        precision=tp / (tp + fp) if tp + fp else 0.0,
        recall=tp / (tp + fn) if tp + fn else 0.0,
        precision_defined=bool(tp + fp),
        recall_defined=bool(tp + fn),
    )


def f_beta(precision: float, recall: float, beta: float) -> float:
    """(1 + b^2) P R / (b^2 P + R); 0 when both are 0."""
    b2 = beta * beta
    denom = b2 * precision + recall
    if denom == 0:
        return 0.0
    return (1.0 + b2) * precision * recall / denom


# -- sweep ---------------------------------------------------------------------

@dataclass
class DayData:
    day: date
    messages: List[Message]
    truth: List[EventRecord]


@dataclass(frozen=True)
class ParamGrid:
    rs: Tuple[float, ...] = (1.0,)
    alphas: Tuple[float, ...] = (0.15,)
    Ts: Tuple[float, ...] = (0.1,)
    modes: Tuple[Mode, ...] = (Mode.RELATIVE,)

    def __post_init__(self):
        for name in ("rs", "alphas", "Ts", "modes"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "modes", tuple(Mode(m) for m in self.modes))

    def __len__(self):
        return len(self.rs) * len(self.alphas) * len(self.Ts) * len(self.modes)


@dataclass
class SweepResult:
    r: float
    alpha: float
    T: float
    mode: Mode
    avg_precision: float
    avg_recall: float
    f_beta: Dict[float, float] = field(default_factory=dict)

    @property
    def params(self):
        return (self.r, self.alpha, self.T, self.mode.value)


def _day_metrics_for_r(args):
    """All (mode, alpha, T) metrics for one r over all days; picklable for process pools."""
    r, days, candidates, spec, raster, counties, grid, registry = args
    overlay = detect.county_overlay(counties, spec)
    out = {}
    params = InferenceParams(r=r)
    for d, day in enumerate(days):
        located = infer_from_candidates(day.messages, candidates[d], params)
        shapes = [loc.shape for locs in located for loc in locs]
        raw = detect.accumulate(geo.make_grid(spec.bbox, spec.n_rows, spec.n_cols), shapes)
        for alpha in grid.alphas:
            scaled = detect.population_scale(raw, raster, alpha)
            for mode in grid.modes:
                g = scaled
                if mode is Mode.RELATIVE:
                    try:
                        g = detect.normalize_relative(scaled)
                    except NoSignalError:
                        g = scaled  # all zero: declares nothing
                for T in grid.Ts:
                    decl = detect.declare_counties(g, counties, T, overlay)
                    out[(mode, alpha, T, d)] = day_metrics(decl, day.truth, registry)
    return r, out


def sweep(days: Sequence[DayData], backend, spec: GridSpec, raster: PopulationRaster,
          counties: Sequence[Region], grid: ParamGrid, betas: Sequence[float] = (1.0, 2.0),
          registry: Optional[CountyRegistry] = None, workers: int = 1):
    """Evaluate every (r, alpha, T, mode); per-day P/R averaged with equal day weight.

    Returns (results in parameter order, {(mode, beta): best result}). Ties in
    F-beta go to the earliest parameter set in sweep order.
    """
    if len(grid) == 0:
        raise ValueError("empty parameter grid")
    if not days:
        raise ValueError("sweep needs at least one day")
    for d in days:
        if not d.truth:
            raise ValueError(f"day {d.day} has no truth records")
    if registry is None:
        registry = CountyRegistry([c.name for c in counties])

    candidates = [collect_candidates(d.messages, backend)[0] for d in days]
    tasks = [(r, list(days), candidates, spec, raster, list(counties), grid, registry) for r in grid.rs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            per_r = dict(ex.map(_day_metrics_for_r, tasks))
    else:
        per_r = dict(map(_day_metrics_for_r, tasks))

    results = []
    n = len(days)
    for mode, r, alpha, T in itertools.product(grid.modes, grid.rs, grid.alphas, grid.Ts):
        ms = [per_r[r][(mode, alpha, T, d)] for d in range(n)]
        p = math.fsum(m.precision for m in ms) / n
        rc = math.fsum(m.recall for m in ms) / n
        results.append(SweepResult(r, alpha, T, mode, p, rc, {b: f_beta(p, rc, b) for b in betas}))

    best = {}
    for res in results:
        for b in betas:
            key = (res.mode, b)
            if key not in best or res.f_beta[b] > best[key].f_beta[b]:
                best[key] = res
    return results, best


def _beta_label(b: float) -> str:
    return f"F{b:g}"


def write_sweep_csv(results: Sequence[SweepResult], betas: Sequence[float], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "alpha", "T", "mode", "avg_precision", "avg_recall"] + [_beta_label(b) for b in betas])
        for s in results:
            w.writerow([repr(s.r), repr(s.alpha), repr(s.T), s.mode.value,
                        repr(s.avg_precision), repr(s.avg_recall)] + [repr(s.f_beta[b]) for b in betas])


def sweep_summary(best: Mapping[Tuple[Mode, float], SweepResult]) -> list:
    rows = []
    for (mode, b), s in sorted(best.items(), key=lambda kv: (kv[0][0].value, kv[0][1])):
        rows.append({"mode": mode.value, "beta": b, "max_f_beta": s.f_beta[b],
                     "precision": s.avg_precision, "recall": s.avg_recall,
                     "r": s.r, "alpha": s.alpha, "T": s.T})
    return rows


def write_sweep_summary(best, path, extra: Optional[dict] = None) -> None:
    doc = {"argmax": sweep_summary(best)}
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)


# -- daily correlation ---------------------------------------------------------

def ffc_daily_scores(truth: Iterable[EventRecord], county_populations: Mapping[str, float],
                     factors: Mapping[Severity, float] = DEFAULT_SEVERITY_FACTORS) -> Dict[date, float]:
    """Per day: sum over flooded counties of population x severity factor (worst report per county)."""
    worst: Dict[Tuple[date, str], Severity] = {}
    for t in truth:
        key = (t.date, t.county_name)
        worst[key] = max(worst.get(key, t.severity), t.severity)
    scores: Dict[date, List[float]] = {}
    for (d, county), sev in sorted(worst.items()):
        if county not in county_populations:
            raise ValueError(f"no population for county {county!r}")
        scores.setdefault(d, []).append(county_populations[county] * factors[sev])
    return {d: math.fsum(v) for d, v in scores.items()}


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("need two equal-length series with at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ValueError("zero variance in a correlated series")
    return float(dx @ dy) / math.sqrt(sxx * syy)


def daily_correlation(per_day_counts: Mapping[date, float], truth: Iterable[EventRecord],
                      county_populations: Mapping[str, float],
                      factors: Mapping[Severity, float] = DEFAULT_SEVERITY_FACTORS) -> float:
    """Pearson r between daily message counts and the population-weighted flood score.

    Uses every day in the overlap of the two series' date spans; missing days count as 0.
    """
    scores = ffc_daily_scores(truth, county_populations, factors)
    if not per_day_counts or not scores:
        raise ValueError("both series must be nonempty")
    start = max(min(per_day_counts), min(scores))
    end = min(max(per_day_counts), max(scores))
    if end <= start:
        raise ValueError("series overlap on fewer than 2 days")
    days = [start + timedelta(days=k) for k in range((end - start).days + 1)]
    return pearson([per_day_counts.get(d, 0) for d in days], [scores.get(d, 0.0) for d in days])
