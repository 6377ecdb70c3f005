"""Per-message location inference by quality-weighted intersection voting."""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import geo
from .corpus import Message
from .gazetteer import (BackendUnavailable, GazetteerBackend, LocationCandidate, Source,
                        extract_text_toponyms, parse_location_field)
from .geo import GeoShape, Point


@dataclass(frozen=True)
class InferenceParams:
    r: float = 1.0
    keep_all: bool = False

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("r must be nonnegative")


@dataclass(frozen=True)
class InferredLocation:
    shape: GeoShape
    weight_sum: float
    contributing: Tuple[LocationCandidate, ...]


@dataclass
class LocationStats:
    total: int = 0
    any_location: int = 0
    geotag: int = 0
    loc_gps: int = 0
    loc_toponym: int = 0
    text_toponym: int = 0
    located: int = 0
    backend_errors: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _weight(c: LocationCandidate, r: float) -> float:
    return c.quality * r if c.source is Source.TEXT_TOPONYM else c.quality


def candidate_scores(candidates: Sequence[LocationCandidate], r: float) -> List[float]:
    """score(c) = sum of weights of all candidates whose shapes intersect c (c included)."""
    weights = [_weight(c, r) for c in candidates]
    n = len(candidates)
    scores = list(weights)
    for a in range(n):
        for b in range(a + 1, n):
            if geo.intersects(candidates[a].shape, candidates[b].shape):
                scores[a] += weights[b]
                scores[b] += weights[a]
    return scores


def _rank_key(c: LocationCandidate, score: float):
    # higher score, then smaller area, then name
    return (-score, geo.area(c.shape), c.matched_name)


def infer(message: Message, candidates: Sequence[LocationCandidate],
          params: InferenceParams = InferenceParams()) -> Optional[InferredLocation]:
    if message.geotag is not None:
        pt = Point(*message.geotag)
        cand = LocationCandidate(pt, 1.0, Source.GEOTAG, "geotag")
        return InferredLocation(pt, math.inf, (cand,))
    if not candidates:
        return None
    scores = candidate_scores(candidates, params.r)
    best = min(range(len(candidates)), key=lambda k: _rank_key(candidates[k], scores[k]))
    if scores[best] <= 0.0:
        # r = 0 with only text candidates: nothing carries weight
        return None
    return InferredLocation(candidates[best].shape, scores[best], tuple(candidates))


def infer_all(message: Message, candidates: Sequence[LocationCandidate],
              params: InferenceParams = InferenceParams()) -> List[InferredLocation]:
    """Keep-all variant: every positively weighted candidate, best first."""
    if message.geotag is not None:
        return [infer(message, (), params)]
    scores = candidate_scores(candidates, params.r)
    order = sorted(range(len(candidates)), key=lambda k: _rank_key(candidates[k], scores[k]))
    return [InferredLocation(candidates[k].shape, scores[k], tuple(candidates))
            for k in order if scores[k] > 0.0]


def gather_candidates(message: Message, backend: GazetteerBackend) -> List[LocationCandidate]:
    """Location-field then text candidates; empty for geotagged messages (fast path)."""
    if message.geotag is not None:
        return []
    return (parse_location_field(message.author_location_field, backend)
            + extract_text_toponyms(message.text, backend))


def _gather_safe(message, backend):
    try:
        return gather_candidates(message, backend), False
    except BackendUnavailable:
        return [], True


def collect_candidates(messages: Sequence[Message], backend: GazetteerBackend,
                       workers: int = 1) -> Tuple[List[List[LocationCandidate]], LocationStats]:
    """Candidate lists per message (input order) plus per-source counts."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(lambda m: _gather_safe(m, backend), messages))
    else:
        results = [_gather_safe(m, backend) for m in messages]
    stats = LocationStats(total=len(messages))
    out = []
    for m, (cands, failed) in zip(messages, results):
        out.append(cands)
        stats.backend_errors += failed
        sources = {c.source for c in cands}
        has_geotag = m.geotag is not None
        stats.geotag += has_geotag
        stats.loc_gps += Source.LOC_FIELD_GPS in sources
        stats.loc_toponym += Source.LOC_FIELD_TOPONYM in sources
        stats.text_toponym += Source.TEXT_TOPONYM in sources
        stats.any_location += bool(has_geotag or cands)
    return out, stats


def infer_from_candidates(messages: Sequence[Message], candidates: Sequence[Sequence[LocationCandidate]],
                          params: InferenceParams) -> List[List[InferredLocation]]:
    """Per message, the selected location(s): zero or one, or several in keep-all mode."""
    out = []
    for m, cands in zip(messages, candidates):
        if params.keep_all:
            out.append(infer_all(m, cands, params))
        else:
            loc = infer(m, cands, params)
            out.append([loc] if loc is not None else [])
    return out


def infer_batch(messages: Sequence[Message], backend: GazetteerBackend,
                params: InferenceParams = InferenceParams(), workers: int = 1):
    """Return [(message, InferredLocation | None)] in input order, and LocationStats."""
    cands, stats = collect_candidates(messages, backend, workers)
    results = []
    for m, c in zip(messages, cands):
        loc = infer(m, c, params)
        stats.located += loc is not None
        results.append((m, loc))
    return results, stats


def location_record(message: Message, loc: Optional[InferredLocation]) -> dict:
    rec = {"id": message.id, "shape": None, "weight_sum": None, "sources": {}}
    if loc is not None:
        rec["shape"] = geo.to_geojson(loc.shape)
        # geotag fast path carries an infinite weight, written as null
        rec["weight_sum"] = loc.weight_sum if math.isfinite(loc.weight_sum) else None
        counts: Dict[str, int] = {}
        for c in loc.contributing:
            counts[c.source.value] = counts.get(c.source.value, 0) + 1
        rec["sources"] = dict(sorted(counts.items()))
    return rec


def write_locations(results, fh) -> None:
    for m, loc in results:
        fh.write(json.dumps(location_record(m, loc), sort_keys=True) + "\n")
