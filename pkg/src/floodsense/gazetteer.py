"""Place-name resolution against pluggable gazetteer backends.

The bundled :class:`FixtureBackend` reads one JSON object per line::

    {"name": "Cumbria", "aliases": ["Cumbria, UK"], "country": "GB",
     "feature_class": "region", "geometry": {...GeoJSON...}, "default_score": 1.0}
"""
from __future__ import annotations

import enum
import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Protocol, Sequence, Tuple

from . import geo
from .geo import GeoShape, Point

log = logging.getLogger(__name__)

UK_COUNTRIES = frozenset({"GB", "UK"})
POLYGON_CLASSES = frozenset({"region", "area", "city", "state"})

_SPLIT_RE = re.compile(r"[,/\-]")
_COORD_RE = re.compile(r"([-+]?\d{1,2}(?:\.\d+)?)\s*,\s*([-+]?\d{1,3}(?:\.\d+)?)")
_WORD_RE = re.compile(r"\w+(?:['’]\w+)*")


class FeatureClass(str, enum.Enum):
    REGION = "region"
    AREA = "area"
    CITY = "city"
    STATE = "state"
    TOWN = "town"
    POI = "poi"


class Source(str, enum.Enum):
    GEOTAG = "Geotag"
    LOC_FIELD_GPS = "LocFieldGPS"
    LOC_FIELD_TOPONYM = "LocFieldToponym"
    TEXT_TOPONYM = "TextToponym"


class BackendUnavailable(RuntimeError):
    """The backend could not answer (as opposed to answering with no match)."""


@dataclass(frozen=True)
class GazetteerEntry:
    name: str
    aliases: Tuple[str, ...]
    country: str
    feature_class: FeatureClass
    shape: GeoShape
    default_score: float = 1.0

    def __post_init__(self):
        if not self.name:
            raise ValueError("gazetteer entry name must be nonempty")
        if not 0.0 < self.default_score <= 1.0:
            raise ValueError(f"{self.name}: default_score must lie in (0, 1]")

    def resolved_shape(self) -> GeoShape:
        """Polygon for region/area/city/state entries when one is known, otherwise a point."""
        if self.feature_class.value in POLYGON_CLASSES or isinstance(self.shape, Point):
            return self.shape
        return geo.representative_point(self.shape)


@dataclass(frozen=True)
class LocationCandidate:
    shape: GeoShape
    quality: float
    source: Source
    matched_name: str

    def __post_init__(self):
        if not 0.0 < self.quality <= 1.0:
            raise ValueError(f"candidate quality {self.quality} outside (0, 1]")
        if self.source in (Source.GEOTAG, Source.LOC_FIELD_GPS):
            if self.quality != 1.0 or not isinstance(self.shape, Point):
                raise ValueError("GPS-derived candidates must be points of quality 1")


class GazetteerBackend(Protocol):
    def lookup(self, query: str) -> List[GazetteerEntry]:
        """All entries whose name or alias matches ``query``; [] on a miss.

        Raises BackendUnavailable when the service cannot be reached.
        """

    def names(self) -> Iterable[str]:
        """Every name and alias known to the backend (used for text scanning)."""


def normalize_name(s: str) -> str:
    return " ".join(_WORD_RE.findall(s.casefold()))


class FixtureBackend:
    """Immutable in-memory gazetteer; exact case-insensitive name/alias lookup."""

    def __init__(self, entries: Sequence[GazetteerEntry]):
        self.entries = tuple(entries)
        index: Dict[str, List[GazetteerEntry]] = {}
        for e in self.entries:
            for n in (e.name,) + tuple(e.aliases):
                key = normalize_name(n)
                if key:
                    bucket = index.setdefault(key, [])
                    if e not in bucket:
                        bucket.append(e)
        self._index = index
        self._max_tokens = max((len(k.split()) for k in index), default=0)

    @classmethod
    def from_file(cls, path) -> "FixtureBackend":
        entries = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    entries.append(entry_from_record(json.loads(line)))
                except (ValueError, KeyError, TypeError) as exc:
                    raise ValueError(f"{path}:{lineno}: bad gazetteer record: {exc}") from None
        return cls(entries)

    def lookup(self, query: str) -> List[GazetteerEntry]:
        return list(self._index.get(normalize_name(query), ()))

    def names(self) -> Iterable[str]:
        return self._index.keys()

    @property
    def max_name_tokens(self) -> int:
        return self._max_tokens


def entry_from_record(rec: dict) -> GazetteerEntry:
    return GazetteerEntry(
        name=rec["name"],
        aliases=tuple(rec.get("aliases", ())),
        country=rec["country"],
        feature_class=FeatureClass(rec["feature_class"]),
        shape=geo.from_geojson(rec["geometry"]),
        default_score=float(rec.get("default_score", 1.0)),
    )


def entry_to_record(e: GazetteerEntry) -> dict:
    return {
        "name": e.name,
        "aliases": list(e.aliases),
        "country": e.country,
        "feature_class": e.feature_class.value,
        "geometry": geo.to_geojson(e.shape),
        "default_score": e.default_score,
    }


def write_fixture(entries: Iterable[GazetteerEntry], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(json.dumps(entry_to_record(e), ensure_ascii=False) + "\n")


class CachingBackend:
    """Memoizes lookups, optionally persisted as JSON keyed by normalized query."""

    def __init__(self, inner: GazetteerBackend, path: Optional[Path] = None):
        self.inner = inner
        self.path = Path(path) if path else None
        self._cache: Dict[str, List[GazetteerEntry]] = {}
        if self.path and self.path.exists():
            raw = json.loads(self.path.read_text(encoding="utf-8"))
            self._cache = {k: [entry_from_record(r) for r in v] for k, v in raw.items()}

    def lookup(self, query: str) -> List[GazetteerEntry]:
        key = normalize_name(query)
        if key not in self._cache:
            self._cache[key] = self.inner.lookup(query)
        return list(self._cache[key])

    def names(self) -> Iterable[str]:
        return self.inner.names()

    def flush(self) -> None:
        if self.path:
            doc = {k: [entry_to_record(e) for e in v] for k, v in sorted(self._cache.items())}
            self.path.write_text(json.dumps(doc, ensure_ascii=False), encoding="utf-8")


class GeonamesBackend:
    """Placeholder for a live Geonames client; no network access is attempted."""

    def __init__(self, username: str):
        self.username = username

    def lookup(self, query: str) -> List[GazetteerEntry]:
        raise BackendUnavailable("live Geonames lookups are not available in this build")

    def names(self) -> Iterable[str]:
        raise BackendUnavailable("live Geonames lookups are not available in this build")


def parse_coordinates(text: str) -> Optional[Point]:
    m = _COORD_RE.search(text)
    if not m:
        return None
    lat, lon = float(m.group(1)), float(m.group(2))
    if -90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0:
        return Point(lat, lon)
    return None


def _candidates(entries, name, source, countries) -> List[LocationCandidate]:
    out = []
    for e in entries:
        if countries is not None and e.country not in countries:
            continue
        out.append(LocationCandidate(e.resolved_shape(), e.default_score, source, e.name))
    return out


def parse_location_field(field_text: Optional[str], backend: GazetteerBackend,
                         countries=UK_COUNTRIES) -> List[LocationCandidate]:
    """Candidates from a profile location field.

    A "lat, lon" pair short-circuits to one GPS point. Otherwise the whole
    field is looked up, then (on a miss) each part split on , / or -.
    Only entries in ``countries`` are kept.
    """
    if not field_text or not field_text.strip():
        return []
    pt = parse_coordinates(field_text)
    if pt is not None:
        return [LocationCandidate(pt, 1.0, Source.LOC_FIELD_GPS, field_text.strip())]

    whole = _candidates(backend.lookup(field_text), field_text, Source.LOC_FIELD_TOPONYM, countries)
    if whole:
        return whole
    out = []
    for part in _SPLIT_RE.split(field_text):
        if not part.strip():
            continue
        for c in _candidates(backend.lookup(part), part, Source.LOC_FIELD_TOPONYM, countries):
            if c not in out:
                out.append(c)
    return out


def _phrase_table(backend) -> Tuple[frozenset, int]:
    cached = getattr(backend, "_floodsense_phrases", None)
    if cached is None:
        names = frozenset(n for n in (normalize_name(x) for x in backend.names()) if n)
        longest = max((len(n.split()) for n in names), default=0)
        cached = (names, longest)
        try:
            backend._floodsense_phrases = cached
        except AttributeError:
            pass
    return cached


def extract_text_toponyms(text: str, backend: GazetteerBackend,
                          countries=UK_COUNTRIES) -> List[LocationCandidate]:
    """Longest-match, left-to-right dictionary scan of ``text`` for known place names."""
    phrases, longest = _phrase_table(backend)
    tokens = normalize_name(text).split()
    out: List[LocationCandidate] = []
    i = 0
    while i < len(tokens):
        for n in range(min(longest, len(tokens) - i), 0, -1):
            phrase = " ".join(tokens[i:i + n])
            if phrase in phrases:
                for c in _candidates(backend.lookup(phrase), phrase, Source.TEXT_TOPONYM, countries):
                    if c not in out:
                        out.append(c)
                i += n
                break
        else:
            i += 1
    return out
