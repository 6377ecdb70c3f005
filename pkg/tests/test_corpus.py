import io
import json
from datetime import datetime, timezone

import pytest
from hypothesis import given, strategies as st

from floodsense.corpus import Message, compute_stats, ingest, write_messages

from conftest import make_message


def test_single_geotagged_line():
    line = json.dumps({"id": "1", "created_at": "2015-10-28T10:00:00Z", "text": "flooded outside",
                       "user": {"id": "u"}, "coordinates": {"type": "Point", "coordinates": [-2.93, 54.89]}})
    msgs, rep = ingest(line + "\n")
    assert rep.parsed == 1 and rep.skipped == 0
    assert msgs[0].geotag == (54.89, -2.93)
    assert msgs[0].text == "flooded outside"


def test_empty_input():
    msgs, rep = ingest(b"")
    assert msgs == [] and rep.parsed == 0 and rep.skipped == 0


def test_truncated_line_is_skipped_with_line_number():
    good = {"id": "1", "created_at": "Wed Oct 28 10:15:00 +0000 2015", "text": "x", "user": {"id": "u"}}
    lines = [json.dumps(good), '{"id": "2", "text": "trunc', json.dumps(dict(good, id="3"))]
    msgs, rep = ingest("\n".join(lines))
    assert [m.id for m in msgs] == ["1", "3"]
    assert rep.skipped == 1
    assert rep.diagnostics[0].startswith("line 2:")


def test_platform_fields_and_retweet_markers():
    rec = {"id_str": "9", "created_at": "Wed Oct 28 10:15:00 +0000 2015", "text": "RT @bob: flooded",
           "user": {"id_str": "42", "time_zone": " London ", "location": "Cumbria / London"}}
    (m,), _ = ingest(json.dumps(rec))
    assert m.author_timezone == "London"
    assert m.author_location_field == "Cumbria / London"
    assert m.is_retweet
    assert m.timestamp == datetime(2015, 10, 28, 10, 15, tzinfo=timezone.utc)
    rec2 = dict(rec, text="rt @bob lowercase is not a marker", retweeted_status={"id": 1})
    (m2,), _ = ingest(json.dumps(rec2))
    assert m2.is_retweet


def test_out_of_range_geotag_skipped():
    rec = {"id": "1", "created_at": "2015-10-28T10:00:00Z", "text": "x", "user": {"id": "u"},
           "coordinates": [200.0, 54.0]}
    msgs, rep = ingest(json.dumps(rec))
    assert msgs == [] and rep.skipped == 1


def test_duplicate_ids_dropped():
    rec = {"id": "1", "created_at": "2015-10-28T10:00:00Z", "text": "x", "user": {"id": "u"}}
    msgs, rep = ingest(json.dumps(rec) + "\n" + json.dumps(rec))
    assert len(msgs) == 1 and rep.duplicates == 1
    assert json.loads(rep.to_json()) == {"parsed": 1, "skipped": 0, "duplicates": 1}


def test_stats_examples():
    assert compute_stats([]).total_count == 0
    ms = [make_message(f"m{k}") for k in range(5)]
    s = compute_stats(ms)
    day = ms[0].day
    assert s.per_day_counts == {day: 5} and s.per_author_counts == {"a": 5}


def test_midnight_boundary_two_buckets():
    a = make_message("a", ts=datetime(2015, 12, 5, 23, 59, tzinfo=timezone.utc))
    b = make_message("b", ts=datetime(2015, 12, 6, 0, 1, tzinfo=timezone.utc))
    s = compute_stats([a, b])
    assert len(s.per_day_counts) == 2
    assert sorted(s.per_day_counts.values()) == [1, 1]


messages_st = st.builds(
    Message,
    id=st.text(min_size=1, max_size=8),
    timestamp=st.datetimes(min_value=datetime(2000, 1, 1), max_value=datetime(2030, 1, 1),
                           timezones=st.just(timezone.utc)),
    text=st.text(max_size=40),
    author_id=st.text(min_size=1, max_size=6),
    author_timezone=st.one_of(st.none(), st.sampled_from(["London", "UTC", "Casablanca"])),
    author_location_field=st.one_of(st.none(), st.text(max_size=20)),
    geotag=st.one_of(st.none(), st.tuples(st.floats(-90, 90), st.floats(-180, 180))),
    is_retweet=st.booleans(),
)


@given(st.lists(messages_st, max_size=8, unique_by=lambda m: m.id))
def test_roundtrip_idempotent(msgs):
    msgs = [m if not m.text.startswith("RT @") else
            Message(m.id, m.timestamp, m.text, m.author_id, m.author_timezone,
                    m.author_location_field, m.geotag, True) for m in msgs]
    buf = io.StringIO()
    write_messages(msgs, buf)
    back, rep = ingest(buf.getvalue())
    assert rep.skipped == 0
    assert back == msgs
    buf2 = io.StringIO()
    write_messages(back, buf2)
    assert buf2.getvalue() == buf.getvalue()


@given(st.lists(messages_st, max_size=12), st.randoms())
def test_stats_permutation_invariant(msgs, rnd):
    s1 = compute_stats(msgs)
    shuffled = list(msgs)
    rnd.shuffle(shuffled)
    s2 = compute_stats(shuffled)
    assert s1 == s2
    assert sum(s1.per_day_counts.values()) == s1.total_count == sum(s1.per_author_counts.values())
