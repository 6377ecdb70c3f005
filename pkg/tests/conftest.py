from datetime import datetime, timezone

import pytest

from floodsense import synthetic
from floodsense.corpus import Message
from floodsense.gazetteer import FixtureBackend


def make_message(mid="m1", text="flooded outside", author="a", tz="London", loc=None,
                 geotag=None, rt=False, ts=None):
    ts = ts or datetime(2015, 10, 28, 12, 0, tzinfo=timezone.utc)
    return Message(mid, ts, text, author, tz, loc, geotag, rt)


@pytest.fixture(scope="session")
def uk_backend():
    return FixtureBackend(synthetic.uk_fixture_entries())


@pytest.fixture(scope="session")
def world():
    return synthetic.checkerboard_world()


@pytest.fixture(scope="session")
def world_backend(world):
    return FixtureBackend(world.entries)


# -- acceptance reporting --------------------------------------------------------

_acceptance = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    n, title = mark.kwargs["n"], mark.kwargs["title"]
    failed = call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception)
    prev = _acceptance.get(n, (title, True))
    _acceptance[n] = (title, prev[1] and not failed)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance):
        title, ok = _acceptance[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {title}")
