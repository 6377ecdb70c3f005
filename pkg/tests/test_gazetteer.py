import json

import pytest
from hypothesis import given, strategies as st

from floodsense.gazetteer import (BackendUnavailable, CachingBackend, FixtureBackend, GeonamesBackend,
                                  LocationCandidate, Source, extract_text_toponyms,
                                  parse_location_field, write_fixture)
from floodsense.geo import Point, Polygon
from floodsense import synthetic


def names(cands):
    return [c.matched_name for c in cands]


def entry_names(entries):
    return [e.name for e in entries]


def test_cumbria_slash_london(uk_backend):
    cands = parse_location_field("Cumbria / London", uk_backend)
    assert names(cands) == ["Cumbria", "London"]
    assert all(isinstance(c.shape, Polygon) for c in cands)
    assert {c.source for c in cands} == {Source.LOC_FIELD_TOPONYM}


def test_gps_fast_path(uk_backend):
    (c,) = parse_location_field("54.89, -2.93", uk_backend)
    assert c.source is Source.LOC_FIELD_GPS and c.quality == 1.0
    assert c.shape == Point(54.89, -2.93)


def test_uk_filter_boston(uk_backend):
    cands = parse_location_field("Boston", uk_backend)
    assert len(uk_backend.lookup("boston")) == 2
    assert len(cands) == 1 and isinstance(cands[0].shape, Point)
    assert parse_location_field("Paris", uk_backend) == []
    assert extract_text_toponyms("raining in Paris", uk_backend) == []


def test_empty_and_whole_field(uk_backend):
    assert parse_location_field(None, uk_backend) == []
    assert parse_location_field("   ", uk_backend) == []
    # the whole field matches before splitting on the hyphen
    assert names(parse_location_field("Newcastle-under-Lyme", uk_backend)) == ["Newcastle"]
    assert names(parse_location_field("Somewhere, Devon", uk_backend)) == ["Devon"]


def test_lookup_examples(uk_backend):
    assert entry_names(uk_backend.lookup("carlisle")) == ["Carlisle"]
    assert uk_backend.lookup("Atlantis") == []
    assert entry_names(uk_backend.lookup("Ldn")) == ["London"]


def test_text_examples(uk_backend):
    assert names(extract_text_toponyms("Terrible flooding in Carlisle today", uk_backend)) == ["Carlisle"]
    got = extract_text_toponyms("Train from Exeter to Totnes cancelled", uk_backend)
    assert names(got) == ["Exeter", "Totnes"]
    assert all(c.source is Source.TEXT_TOPONYM for c in got)
    assert extract_text_toponyms("water everywhere", uk_backend) == []


def test_longest_match(uk_backend):
    got = extract_text_toponyms("Flooding in Newcastle upon Tyne city centre", uk_backend)
    assert names(got) == ["Newcastle upon Tyne"]
    assert names(extract_text_toponyms("Newcastle flooded", uk_backend)) == ["Newcastle"]


def test_uk_ambiguity_kept(uk_backend):
    assert len(extract_text_toponyms("Cambridge under water", uk_backend)) == 2


@given(st.sampled_from(["Terrible flooding in Carlisle today", "Exeter to Totnes",
                        "newcastle upon tyne and Leeds", "ldn is wet", "Boston"]),
       st.lists(st.booleans(), min_size=40, max_size=40))
def test_text_case_invariance(uk_backend, text, flips):
    mixed = "".join(ch.upper() if f else ch.lower() for ch, f in zip(text, flips + [False] * len(text)))
    assert extract_text_toponyms(mixed, uk_backend) == extract_text_toponyms(text, uk_backend)


def test_candidate_validation():
    with pytest.raises(ValueError):
        LocationCandidate(Point(1, 1), 0.0, Source.TEXT_TOPONYM, "x")
    with pytest.raises(ValueError):
        LocationCandidate(Point(1, 1), 0.5, Source.GEOTAG, "x")


def test_fixture_file_roundtrip(tmp_path, uk_backend):
    p = tmp_path / "g.jsonl"
    write_fixture(synthetic.uk_fixture_entries(), p)
    back = FixtureBackend.from_file(p)
    assert back.entries == uk_backend.entries
    p.write_text('{"name": "X"}\n')
    with pytest.raises(ValueError, match=":1:"):
        FixtureBackend.from_file(p)


def test_caching_backend(tmp_path, uk_backend):
    calls = []

    class Counting:
        def lookup(self, q):
            calls.append(q)
            return uk_backend.lookup(q)

        def names(self):
            return uk_backend.names()

    path = tmp_path / "cache.json"
    cb = CachingBackend(Counting(), path)
    assert cb.lookup("Carlisle") == cb.lookup("carlisle")
    assert len(calls) == 1
    cb.flush()
    assert "carlisle" in json.loads(path.read_text())
    again = CachingBackend(Counting(), path)
    assert entry_names(again.lookup("CARLISLE")) == ["Carlisle"] and len(calls) == 1


def test_unavailable_backend():
    with pytest.raises(BackendUnavailable):
        GeonamesBackend("demo").lookup("London")
