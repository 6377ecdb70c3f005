"""Deterministic synthetic data: a small UK fixture gazetteer, a checkerboard
world of rectangular counties, and message corpora with planted flood events."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .corpus import Message
from .detect import PopulationRaster, Region
from .evaluate import EventRecord, Severity
from .gazetteer import FeatureClass, GazetteerEntry
from .geo import ENGLAND_WALES_BBOX, GridSpec, Point, Polygon
from .relevance import Label, LabeledExample


def _box(lat0, lat1, lon0, lon1):
    return Polygon.box(lat0, lat1, lon0, lon1)


def uk_fixture_entries() -> List[GazetteerEntry]:
    """Crude rectangles for a handful of UK areas plus point towns; good enough for tests."""
    E = GazetteerEntry
    R, C, T = FeatureClass.REGION, FeatureClass.CITY, FeatureClass.TOWN
    return [
        E("Cumbria", (), "GB", R, _box(54.2, 55.2, -3.6, -2.5)),
        E("Northumberland", (), "GB", R, _box(55.1, 55.8, -2.6, -1.5)),
        E("Tyne and Wear", (), "GB", R, _box(54.8, 55.1, -1.9, -1.3)),
        E("Lancashire", (), "GB", R, _box(53.5, 54.2, -3.1, -2.5)),
        E("North Yorkshire", (), "GB", R, _box(53.7, 54.6, -2.4, -0.3)),
        E("Devon", (), "GB", R, _box(50.2, 51.25, -4.7, -2.9)),
        E("Lincolnshire", (), "GB", R, _box(52.6, 53.6, -0.8, 0.35)),
        E("Cambridgeshire", (), "GB", R, _box(52.0, 52.6, -0.5, 0.5)),
        E("Gloucestershire", (), "GB", R, _box(51.6, 52.1, -2.7, -1.6)),
        E("Wales", (), "GB", R, _box(51.4, 53.4, -5.3, -3.0)),
        E("South West", ("South-West UK",), "GB", R, _box(49.9, 51.6, -6.5, -2.0), 0.6),
        E("London", ("Ldn", "Greater London"), "GB", C, _box(51.28, 51.70, -0.51, 0.33)),
        E("Carlisle", (), "GB", T, Point(54.89, -2.93)),
        E("Kendal", (), "GB", T, Point(54.33, -2.75)),
        E("Exeter", (), "GB", T, Point(50.72, -3.53)),
        E("Totnes", (), "GB", T, Point(50.43, -3.69)),
        E("Boston", (), "GB", T, Point(52.98, -0.02)),
        E("Boston", (), "US", C, _box(42.23, 42.40, -71.19, -70.92)),
        E("Newcastle", ("Newcastle-under-Lyme",), "GB", T, Point(53.01, -2.23)),
        E("Newcastle upon Tyne", ("Toon",), "GB", C, _box(54.95, 55.05, -1.75, -1.55)),
        E("Cambridge", (), "GB", T, Point(52.205, 0.12)),
        E("Cambridge", (), "GB", T, Point(51.73, -2.37)),
        E("Leeds", (), "GB", T, Point(53.80, -1.55)),
        E("Wareham", (), "GB", T, Point(50.69, -2.11)),
        E("Loughborough", (), "GB", T, Point(52.77, -1.21)),
        E("Paris", (), "FR", C, _box(48.81, 48.90, 2.25, 2.42)),
    ]


# -- checkerboard world -------------------------------------------------------

_PREFIXES = ["Ash", "Brad", "Carl", "Dun", "Elm", "Fen", "Glen", "Hal",
             "Ing", "Kirk", "Lang", "Mel", "Nor", "Oak", "Pen", "Quen"]
_SUFFIXES = ["by", "ford", "ham", "ton", "wick", "ley", "mouth", "bridge"]


def place_names(n: int) -> List[str]:
    names = [p + s for s, p in itertools.product(_SUFFIXES, _PREFIXES)]
    if n > len(names):
        raise ValueError(f"at most {len(names)} synthetic names available")
    return names[:n]


@dataclass
class World:
    spec: GridSpec
    counties: List[Region]
    towns: Dict[str, Point]  # county name -> town point at its centre
    town_names: Dict[str, str]  # county name -> town name
    entries: List[GazetteerEntry]
    raster: PopulationRaster
    city_county: str
    city_name: str = "Metropolis"

    def town_of(self, county: str) -> Tuple[str, Point]:
        return self.town_names[county], self.towns[county]


def checkerboard_world(spec: GridSpec = GridSpec(), county_rows: int = 8, county_cols: int = 8,
                       rural_population: float = 100.0, city_population: float = 1e6) -> World:
    """Rectangular counties aligned with the grid, one town at each centre.

    The county at index (county_rows // 2, county_cols // 2) holds a city whose
    single grid cell carries ``city_population``; every other cell has
    ``rural_population``.
    """
    if spec.n_rows % county_rows or spec.n_cols % county_cols:
        raise ValueError("county blocks must tile the grid exactly")
    la, lo = spec.lat_edges, spec.lon_edges
    br, bc = spec.n_rows // county_rows, spec.n_cols // county_cols
    names = place_names(county_rows * county_cols)
    counties, towns, town_names, entries = [], {}, {}, []
    city_rc = (county_rows // 2, county_cols // 2)
    city_cell = None
    for a in range(county_rows):
        for b in range(county_cols):
            base = names[a * county_cols + b]
            cname = base + "shire"
            shape = _box(la[a * br], la[(a + 1) * br], lo[b * bc], lo[(b + 1) * bc])
            counties.append(Region(cname, shape, rural_population * br * bc))
            # town at the centre of the block's centre cell
            ci, cj = a * br + br // 2, b * bc + bc // 2
            pt = Point(0.5 * (la[ci] + la[ci + 1]), 0.5 * (lo[cj] + lo[cj + 1]))
            towns[cname] = pt
            town_names[cname] = base
            entries.append(GazetteerEntry(cname, (), "GB", FeatureClass.REGION, shape))
            if (a, b) == city_rc:
                city_cell = (ci, cj)
                entries.append(GazetteerEntry("Metropolis", ("Metro City",), "GB", FeatureClass.TOWN, pt))
            else:
                entries.append(GazetteerEntry(base, (), "GB", FeatureClass.TOWN, pt))
    pop = np.full((spec.n_rows, spec.n_cols), float(rural_population))
    pop[city_cell] = city_population
    city_county = names[city_rc[0] * county_cols + city_rc[1]] + "shire"
    counties = [Region(c.name, c.shape, float(pop[_block(spec, c.shape)].sum())) for c in counties]
    return World(spec, counties, towns, town_names, entries, PopulationRaster(pop), city_county)


def _block(spec: GridSpec, shape: Polygon):
    lat0, lat1, lon0, lon1 = shape.bounds
    i0 = int(np.argmin(np.abs(spec.lat_edges - lat0)))
    i1 = int(np.argmin(np.abs(spec.lat_edges - lat1)))
    j0 = int(np.argmin(np.abs(spec.lon_edges - lon0)))
    j1 = int(np.argmin(np.abs(spec.lon_edges - lon1)))
    return slice(i0, i1), slice(j0, j1)


# -- corpora ------------------------------------------------------------------

IMMEDIATE_TEMPLATES = [
    "It is flooded outside {place}",
    "Road closed due to flooding in {place} right now",
    "Our street in {place} is flooded this morning",
    "Flooding on the high street {place} cars stuck",
    "Can't believe my garden is flooded {place}",
    "Water everywhere, {place} station flooded, trains cancelled",
    "Flooding under the bridge at {place} avoid the area",
    "We are closed tonight due to flooding {place}",
]

OTHER_TEMPLATES = [
    "Charity raffle for flood victims {place}",
    "River level update: chance of flooding near {place}",
    "Remember the great flood years ago {place}",
    "Flood warning issued for {place} tomorrow",
    "New flood defence funding announced {place}",
    "Documentary about flooding history of {place}",
    "Insurance advice after last winter's flooding {place}",
    "Flood alert may be issued for {place} later this week",
]

BLOCKED_TEMPLATES = [
    "I was in floods of tears {place}",
    "The market was flooded with copies {place}",
    "Memories flooding back {place}",
]


def training_corpus(n: int, seed: int = 0, noise: float = 0.0) -> List[LabeledExample]:
    """Balanced Immediate/Other examples from templates; ``noise`` flips labels at random."""
    rng = np.random.default_rng(seed)
    places = place_names(40)
    out = []
    for k in range(n):
        imm = k % 2 == 0
        tmpl = (IMMEDIATE_TEMPLATES if imm else OTHER_TEMPLATES)[rng.integers(8)]
        text = tmpl.format(place=places[rng.integers(len(places))])
        lab = Label.IMMEDIATE if imm else Label.OTHER
        if noise and rng.random() < noise:
            lab = Label.OTHER if imm else Label.IMMEDIATE
        out.append(LabeledExample(text, lab))
    return out


def _msg(mid, ts, text, author, tz="London", loc=None, geotag=None, rt=False) -> Message:
    return Message(mid, ts, text, author, tz, loc, geotag, rt)


def planted_days(world: World, days: Sequence[date], planted: Sequence[str], seed: int = 0,
                 n_event: int = 50, n_city: int = 200, n_scatter: int = 300):
    """Per day: ``n_event`` messages whose text names the planted county's town while the
    author's location field names the city; ``n_city`` geotagged messages in the city;
    ``n_scatter`` geotagged messages at random points in other, non-planted counties.

    Returns (messages, truth records).
    """
    rng = np.random.default_rng(seed)
    messages, truth = [], []
    others_by_day = []
    for d, county in zip(days, planted):
        start = datetime(d.year, d.month, d.day, tzinfo=timezone.utc)
        town, _ = world.town_of(county)
        truth.append(EventRecord(d, county, Severity.SIGNIFICANT))
        stamp = lambda: start + timedelta(seconds=int(rng.integers(86400)))
        for k in range(n_event):
            text = IMMEDIATE_TEMPLATES[k % len(IMMEDIATE_TEMPLATES)].format(place=town)
            messages.append(_msg(f"{d:%Y%m%d}-e{k}", stamp(), text, f"u-e{k % 37}",
                                 loc=world.city_name))
        city = world.towns[world.city_county]
        for k in range(n_city):
            messages.append(_msg(f"{d:%Y%m%d}-c{k}", stamp(), "Flooded road again", f"u-c{k % 41}",
                                 geotag=(city.lat, city.lon)))
        others = [c for c in world.counties if c.name not in (county, world.city_county)]
        for k in range(n_scatter):
            reg = others[rng.integers(len(others))]
            lat0, lat1, lon0, lon1 = reg.shape.bounds
            lat = lat0 + (lat1 - lat0) * (0.02 + 0.96 * rng.random())
            lon = lon0 + (lon1 - lon0) * (0.02 + 0.96 * rng.random())
            messages.append(_msg(f"{d:%Y%m%d}-s{k}", stamp(), "Puddles and flooding here", f"u-s{k % 53}",
                                 geotag=(float(lat), float(lon))))
    messages.sort(key=lambda m: (m.timestamp, m.id))
    return messages, truth


def raw_corpus(world: World, day: date, n: int, seed: int = 0, event_county: Optional[str] = None) -> List[Message]:
    """Unfiltered stream for one day: wrong timezones, a bot, retweets, blocklisted and
    irrelevant texts mixed with relevant reports (biased towards ``event_county``)."""
    rng = np.random.default_rng(seed)
    start = datetime(day.year, day.month, day.day, tzinfo=timezone.utc)
    names = list(world.town_names.values())
    counties = [c.name for c in world.counties]
    out = []
    for k in range(n):
        ts = start + timedelta(seconds=int(rng.integers(86400)))
        u = rng.random()
        county = event_county if (event_county and rng.random() < 0.5) else counties[rng.integers(len(counties))]
        place = world.town_names[county] if county != world.city_county else world.city_name
        tz = "London" if rng.random() < 0.7 else ["Casablanca", "Eastern Time (US & Canada)", None][rng.integers(3)]
        author = f"user{rng.integers(400)}"
        rt = False
        if u < 0.05:
            author, text = "FloodAlertsBot", f"Flood alert in force for {place}"
        elif u < 0.25:
            text = "RT @someone: " + IMMEDIATE_TEMPLATES[rng.integers(8)].format(place=place)
            rt = bool(rng.random() < 0.5)
        elif u < 0.4:
            text = BLOCKED_TEMPLATES[rng.integers(3)].format(place=place)
        elif u < 0.6:
            text = OTHER_TEMPLATES[rng.integers(8)].format(place=place)
        else:
            text = IMMEDIATE_TEMPLATES[rng.integers(8)].format(place=place)
        loc = None
        geotag = None
        v = rng.random()
        if v < 0.05:
            pt = world.towns[county]
            geotag = (pt.lat, pt.lon)
        elif v < 0.1:
            pt = world.towns[county]
            loc = f"{pt.lat:.3f},{pt.lon:.3f}"
        elif v < 0.6:
            loc = names[rng.integers(len(names))] if rng.random() < 0.3 else place
        out.append(_msg(f"{day:%Y%m%d}-{k:06d}", ts, text, author, tz, loc, geotag, rt))
    return out


DEMO_DAYS = (date(2015, 12, 5), date(2015, 12, 6), date(2015, 12, 7))
DEMO_PLANTED = (3, 20, 50)  # county indices in the 8x8 checkerboard


def write_demo_dataset(out, seed: int = 0, n_per_day: int = 3000) -> Dict[str, str]:
    """Write a self-consistent synthetic dataset for the CLI; returns {kind: path}."""
    import json
    from pathlib import Path

    from .corpus import write_messages
    from .detect import write_regions
    from .evaluate import write_truth_csv
    from .gazetteer import write_fixture

    out = Path(out)
    world = checkerboard_world()
    planted = [world.counties[k].name for k in DEMO_PLANTED]
    paths = {
        "gazetteer": out / "gazetteer.jsonl",
        "uk_gazetteer": out / "uk_gazetteer.jsonl",
        "counties": out / "counties.geojson",
        "population": out / "population.csv",
        "training": out / "training.tsv",
        "corpus": out / "corpus.jsonl",
        "relevant": out / "relevant.jsonl",
        "truth": out / "truth.csv",
        "config": out / "config.json",
    }
    write_fixture(world.entries, paths["gazetteer"])
    write_fixture(uk_fixture_entries(), paths["uk_gazetteer"])
    write_regions(world.counties, paths["counties"])
    world.raster.to_csv(paths["population"])
    with open(paths["training"], "w", encoding="utf-8") as fh:
        for ex in training_corpus(600, seed=seed, noise=0.05):
            fh.write(f"{ex.label.value}\t{ex.text}\n")
    raw = []
    for k, (d, county) in enumerate(zip(DEMO_DAYS, planted)):
        raw.extend(raw_corpus(world, d, n_per_day, seed=seed + k, event_county=county))
    with open(paths["corpus"], "w", encoding="utf-8") as fh:
        write_messages(raw, fh)
    relevant, truth = planted_days(world, DEMO_DAYS, planted, seed=seed)
    with open(paths["relevant"], "w", encoding="utf-8") as fh:
        write_messages(relevant, fh)
    write_truth_csv(truth, paths["truth"])
    paths["config"].write_text(json.dumps({
        "r": 2.0, "alpha": 0.5, "T": 0.5, "mode": "relative", "window_hours": 24,
        "sweep_r": [0.5, 2.0], "sweep_alpha": [0.0, 0.5], "sweep_T": [0.01, 0.5, 1.0],
        "sweep_mode": ["relative"], "seed": seed,
    }, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return {k: str(v) for k, v in paths.items()}
