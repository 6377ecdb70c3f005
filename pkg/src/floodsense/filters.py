"""Deterministic filter cascade: timezone, bot, retweet, blocklist (+ optional classifier)."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field, fields
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from .corpus import Message

DEFAULT_TIMEZONES = frozenset({"London", "Edinburgh", "UTC"})

DEFAULT_BLOCKLIST = (
    "flood with",
    "flood of",
    "flood in",
    "flood it",
    "flooded with",
    "flooded by",
    "flooding back",
    "immigrant",
    "migrant",
    "migration",
    "market",
    "tears",
    "flood-hit",
)


@dataclass
class FilterConfig:
    allowed_timezones: frozenset = DEFAULT_TIMEZONES
    bot_threshold_fraction: float = 0.01
    bot_denylist: frozenset = frozenset()
    blocklist_phrases: tuple = DEFAULT_BLOCKLIST

    def __post_init__(self):
        self.allowed_timezones = frozenset(s.strip() for s in self.allowed_timezones)
        self.bot_denylist = frozenset(self.bot_denylist)
        self.blocklist_phrases = tuple(self.blocklist_phrases)
        if not self.allowed_timezones:
            raise ValueError("allowed_timezones must be nonempty")
        if not 0.0 < self.bot_threshold_fraction <= 1.0:
            raise ValueError("bot_threshold_fraction must lie in (0, 1]")
        if any(not p for p in self.blocklist_phrases):
            raise ValueError("blocklist phrases must be nonempty strings")

    @classmethod
    def from_dict(cls, d: dict) -> "FilterConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})

    def to_dict(self) -> dict:
        return {
            "allowed_timezones": sorted(self.allowed_timezones),
            "bot_threshold_fraction": self.bot_threshold_fraction,
            "bot_denylist": sorted(self.bot_denylist),
            "blocklist_phrases": list(self.blocklist_phrases),
        }


@dataclass
class FilterTrace:
    counts_after_each_stage: List[Tuple[str, int]] = field(default_factory=list)

    def record(self, stage: str, n: int) -> None:
        self.counts_after_each_stage.append((stage, n))

    def to_json(self) -> str:
        return json.dumps(
            [{"stage": s, "remaining": n} for s, n in self.counts_after_each_stage], indent=1
        )


def timezone_filter(messages: Iterable[Message], allowed_timezones) -> list:
    allowed = frozenset(s.strip() for s in allowed_timezones)
    return [
        m for m in messages
        if m.author_timezone is not None and m.author_timezone.strip() in allowed
    ]


def detect_bots(messages: Sequence[Message], bot_threshold_fraction: float) -> set:
    """Authors whose message count strictly exceeds fraction * total."""
    if not messages:
        return set()
    limit = bot_threshold_fraction * len(messages)
    counts = Counter(m.author_id for m in messages)
    return {a for a, c in counts.items() if c > limit}


def bot_filter(messages: Iterable[Message], authors) -> list:
    authors = frozenset(authors)
    return [m for m in messages if m.author_id not in authors]


def retweet_filter(messages: Iterable[Message]) -> list:
    return [m for m in messages if not (m.is_retweet or m.text.startswith("RT @"))]


def blocklist_filter(messages: Iterable[Message], blocklist_phrases=DEFAULT_BLOCKLIST) -> list:
    phrases = tuple({p.lower() for p in blocklist_phrases})
    out = []
    for m in messages:
        low = m.text.lower()
        for p in phrases:
            if p in low:
                break
        else:
            out.append(m)
    return out


def run_cascade(
    messages: Sequence[Message],
    config: FilterConfig,
    classifier: Optional[Callable[[str], bool]] = None,
) -> Tuple[list, FilterTrace]:
    """Apply timezone -> bot -> retweet -> blocklist (-> classifier) in order.

    ``classifier`` maps message text to True when relevant. Bot volume is
    measured on the messages reaching the bot stage.
    """
    trace = FilterTrace()
    trace.record("input", len(messages))
    cur = timezone_filter(messages, config.allowed_timezones)
    trace.record("timezone", len(cur))
    flagged = detect_bots(cur, config.bot_threshold_fraction) | config.bot_denylist
    cur = bot_filter(cur, flagged)
    trace.record("bot", len(cur))
    cur = retweet_filter(cur)
    trace.record("retweet", len(cur))
    cur = blocklist_filter(cur, config.blocklist_phrases)
    trace.record("blocklist", len(cur))
    if classifier is not None:
        cur = [m for m in cur if classifier(m.text)]
        trace.record("classifier", len(cur))
    return cur, trace
