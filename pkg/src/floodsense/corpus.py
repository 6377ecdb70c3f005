"""Message model and newline-delimited JSON ingestion.

Accepted record keys (anything else is ignored)::

    id / id_str         message id (string or integer)
    created_at          ISO-8601 or the platform's "Wed Oct 28 10:15:00 +0000 2015"
    text / full_text    message body
    user.id / user.id_str / user.screen_name   author id
    user.time_zone      author timezone label
    user.location       free-text profile location
    coordinates         GeoJSON point {"type": "Point", "coordinates": [lon, lat]}
    retweeted_status / retweeted / is_retweet   retweet markers
"""
from __future__ import annotations

import io
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from typing import IO, Iterable, Iterator, Optional, Sequence, Tuple, Union

log = logging.getLogger(__name__)

_PLATFORM_TIME_FORMAT = "%a %b %d %H:%M:%S %z %Y"


@dataclass(frozen=True)
class Message:
    id: str
    timestamp: datetime
    text: str
    author_id: str
    author_timezone: Optional[str] = None
    author_location_field: Optional[str] = None
    geotag: Optional[Tuple[float, float]] = None  # (lat, lon)
    is_retweet: bool = False

    def __post_init__(self):
        if not self.id:
            raise ValueError("message id must be nonempty")
        if self.timestamp.tzinfo is None:
            raise ValueError(f"message {self.id}: timestamp must be timezone-aware")
        if self.geotag is not None:
            lat, lon = self.geotag
            if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
                raise ValueError(f"message {self.id}: geotag {self.geotag} out of range")

    @property
    def day(self) -> date:
        return self.timestamp.astimezone(timezone.utc).date()

    def to_record(self) -> dict:
        """Serialize back to the accepted input schema."""
        rec = {
            "id": self.id,
            "created_at": self.timestamp.astimezone(timezone.utc).isoformat(),
            "text": self.text,
            "user": {"id": self.author_id},
        }
        if self.author_timezone is not None:
            rec["user"]["time_zone"] = self.author_timezone
        if self.author_location_field is not None:
            rec["user"]["location"] = self.author_location_field
        if self.geotag is not None:
            rec["coordinates"] = {"type": "Point", "coordinates": [self.geotag[1], self.geotag[0]]}
        if self.is_retweet:
            rec["retweeted"] = True
        return rec


@dataclass
class IngestReport:
    parsed: int = 0
    skipped: int = 0
    duplicates: int = 0
    diagnostics: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {"parsed": self.parsed, "skipped": self.skipped, "duplicates": self.duplicates},
            sort_keys=True,
        )


@dataclass
class CorpusStats:
    total_count: int
    per_day_counts: dict
    per_author_counts: dict


def parse_timestamp(value) -> datetime:
    if isinstance(value, (int, float)):
        # epoch milliseconds, as in timestamp_ms
        return datetime.fromtimestamp(value / 1000.0, tz=timezone.utc)
    if not isinstance(value, str):
        raise ValueError(f"unparseable timestamp {value!r}")
    try:
        ts = datetime.strptime(value, _PLATFORM_TIME_FORMAT)
    except ValueError:
        ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def is_retweet_text(text: str) -> bool:
    return text.startswith("RT @")


def record_to_message(rec: dict) -> Message:
    """Map one decoded JSON record to a Message; raises ValueError/KeyError/TypeError when invalid."""
    if not isinstance(rec, dict):
        raise TypeError("record is not a JSON object")
    msg_id = rec.get("id_str", rec.get("id"))
    if msg_id is None:
        raise KeyError("id")
    text = rec.get("full_text", rec.get("text"))
    if not isinstance(text, str):
        raise KeyError("text")
    user = rec.get("user") or {}
    author = user.get("id_str", user.get("id", user.get("screen_name")))
    if author is None:
        raise KeyError("user.id")

    geotag = None
    coords = rec.get("coordinates")
    if isinstance(coords, dict):
        coords = coords.get("coordinates")
    if coords is not None:
        lon, lat = coords
        geotag = (float(lat), float(lon))

    tz = user.get("time_zone")
    retweet = bool(rec.get("retweeted_status") or rec.get("retweeted") or rec.get("is_retweet"))
    return Message(
        id=str(msg_id),
        timestamp=parse_timestamp(rec.get("created_at", rec.get("timestamp_ms"))),
        text=text,
        author_id=str(author),
        author_timezone=tz.strip() if isinstance(tz, str) else None,
        author_location_field=user.get("location"),
        geotag=geotag,
        is_retweet=retweet or is_retweet_text(text),
    )


def iter_ingest(source: IO, report: IngestReport, dedupe: bool = True) -> Iterator[Message]:
    seen = set()
    for lineno, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8", errors="replace")
        line = raw.strip()
        if not line:
            continue
        try:
            msg = record_to_message(json.loads(line))
        except (ValueError, KeyError, TypeError) as exc:
            report.skipped += 1
            report.diagnostics.append(f"line {lineno}: {type(exc).__name__}: {exc}")
            log.debug("skipping line %d: %s", lineno, exc)
            continue
        if dedupe:
            if msg.id in seen:
                report.duplicates += 1
                report.diagnostics.append(f"line {lineno}: duplicate id {msg.id}")
                continue
            seen.add(msg.id)
        report.parsed += 1
        yield msg


def ingest(source: Union[IO, bytes, str], dedupe: bool = True) -> Tuple[list, IngestReport]:
    """Read newline-delimited JSON records into Messages.

    Malformed lines are skipped and reported; duplicated ids within the
    batch are dropped (first occurrence wins). Output preserves input order.
    """
    if isinstance(source, (bytes, str)):
        source = io.BytesIO(source.encode("utf-8") if isinstance(source, str) else source)
    report = IngestReport()
    messages = list(iter_ingest(source, report, dedupe=dedupe))
    return messages, report


def ingest_path(path, dedupe: bool = True) -> Tuple[list, IngestReport]:
    with open(path, "rb") as fh:
        return ingest(fh, dedupe=dedupe)


def write_messages(messages: Iterable[Message], fh: IO[str]) -> None:
    for m in messages:
        fh.write(json.dumps(m.to_record(), ensure_ascii=False, sort_keys=True))
        fh.write("\n")


def compute_stats(messages: Sequence[Message]) -> CorpusStats:
    per_day = Counter(m.day for m in messages)
    per_author = Counter(m.author_id for m in messages)
    return CorpusStats(
        total_count=len(messages),
        per_day_counts=dict(sorted(per_day.items())),
        per_author_counts=dict(sorted(per_author.items())),
    )
