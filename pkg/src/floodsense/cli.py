"""``floodsense`` command line: every stage as a subcommand plus the end-to-end pipeline."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import __version__, corpus, detect, evaluate, filters, geo, relevance
from .detect import DetectParams, Mode, NoSignalError
from .gazetteer import FixtureBackend
from .geo import GridSpec
from .locate import InferenceParams, collect_candidates, infer, location_record

log = logging.getLogger("floodsense")

DEFAULTS = {
    "allowed_timezones": sorted(filters.DEFAULT_TIMEZONES),
    "bot_threshold_fraction": 0.01,
    "bot_denylist": [],
    "blocklist_phrases": list(filters.DEFAULT_BLOCKLIST),
    "alpha_smooth": 0.5,
    "r": 1.0,
    "alpha": 0.15,
    "T": 0.1,
    "mode": "relative",
    "grid_rows": 64,
    "grid_cols": 64,
    "bbox": list(geo.ENGLAND_WALES_BBOX),
    "window_hours": 24,
    "reference_max": None,
    "keep_all": False,
    "seed": 0,
    "workers": 1,
    "k": 6,
    "train_fraction": 0.75,
    "betas": [1.0, 2.0],
    "sweep_r": [1.0, 2.0],
    "sweep_alpha": [0.0, 0.15, 0.35, 0.4],
    "sweep_T": [0.075, 0.1, 0.25],
    "sweep_mode": ["relative", "absolute"],
}

LIST_KEYS = {"allowed_timezones", "bot_denylist", "blocklist_phrases", "bbox", "betas",
             "sweep_r", "sweep_alpha", "sweep_T", "sweep_mode"}
FLOAT_LISTS = {"bbox", "betas", "sweep_r", "sweep_alpha", "sweep_T"}


class CLIError(Exception):
    pass


# -- config -----------------------------------------------------------------------

def _split(value: str) -> List[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def effective_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise CLIError(f"{args.config}: config must be a flat JSON object")
        unknown = sorted(set(doc) - set(DEFAULTS))
        if unknown:
            raise CLIError(f"{args.config}: unknown config keys {unknown}")
        cfg.update(doc)
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is None:
            continue
        if key in LIST_KEYS and isinstance(v, str):
            v = _split(v)
            if key in FLOAT_LISTS:
                v = [float(x) for x in v]
        cfg[key] = v
    return cfg


def grid_spec(cfg) -> GridSpec:
    return GridSpec(tuple(float(v) for v in cfg["bbox"]), int(cfg["grid_rows"]), int(cfg["grid_cols"]))


def filter_config(cfg) -> filters.FilterConfig:
    return filters.FilterConfig(
        allowed_timezones=frozenset(cfg["allowed_timezones"]),
        bot_threshold_fraction=float(cfg["bot_threshold_fraction"]),
        bot_denylist=frozenset(cfg["bot_denylist"]),
        blocklist_phrases=tuple(cfg["blocklist_phrases"]),
    )


# -- io helpers --------------------------------------------------------------------

def _require(*paths):
    for p in paths:
        if p is not None and not Path(p).exists():
            raise CLIError(f"input path does not exist: {p}")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True, default=str) + "\n", encoding="utf-8")


def _load_messages(path):
    messages, report = corpus.ingest_path(path)
    for d in report.diagnostics[:20]:
        log.warning("%s: %s", path, d)
    return messages, report


def _load_model(path) -> relevance.NBModel:
    if path is None:
        return None
    if not Path(path).exists():
        raise CLIError(f"model file {path} not found; run `floodsense train` first")
    return relevance.NBModel.load(path)


# -- subcommands -------------------------------------------------------------------

def cmd_ingest_stats(args, cfg):
    _require(args.input)
    messages, report = _load_messages(args.input)
    stats = corpus.compute_stats(messages)
    out = _outdir(args)
    _write_json(out / "ingest_report.json", json.loads(report.to_json()))
    _write_json(out / "corpus_stats.json", {
        "total_count": stats.total_count,
        "per_day_counts": {d.isoformat(): c for d, c in stats.per_day_counts.items()},
        "per_author_counts": stats.per_author_counts,
    })
    print(report.to_json())


def cmd_filter(args, cfg):
    _require(args.input, args.model)
    model = _load_model(args.model)
    messages, _ = _load_messages(args.input)
    kept, trace = filters.run_cascade(messages, filter_config(cfg), model.is_relevant if model else None)
    out = _outdir(args)
    with open(out / "filtered.jsonl", "w", encoding="utf-8") as fh:
        corpus.write_messages(kept, fh)
    (out / "filter_trace.json").write_text(trace.to_json() + "\n", encoding="utf-8")
    print(trace.to_json())


def cmd_train(args, cfg):
    _require(args.training)
    examples = relevance.read_training_file(args.training)
    model = relevance.train(examples, float(cfg["alpha_smooth"]))
    out = _outdir(args)
    model.save(out / "model.json")
    print(f"trained on {len(examples)} examples, |V|={len(model.vocabulary)} -> {out / 'model.json'}")


def cmd_classify(args, cfg):
    _require(args.input)
    model = _load_model(args.model)
    messages, _ = _load_messages(args.input)
    out = _outdir(args)
    kept = []
    with open(out / "labels.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "label", "margin"])
        for m in messages:
            label, margin = relevance.predict(model, m.text)
            w.writerow([m.id, label.value, repr(margin)])
            if label is relevance.Label.IMMEDIATE:
                kept.append(m)
    with open(out / "relevant.jsonl", "w", encoding="utf-8") as fh:
        corpus.write_messages(kept, fh)
    print(f"{len(kept)}/{len(messages)} classified Immediate")


def cmd_cross_validate(args, cfg):
    _require(args.training)
    examples = relevance.read_training_file(args.training)
    seed, k = int(cfg["seed"]), int(cfg["k"])
    cm = relevance.cross_validate(examples, k, seed, float(cfg["alpha_smooth"]))
    acc = relevance.evaluate_split(examples, float(cfg["train_fraction"]), seed, float(cfg["alpha_smooth"]))
    doc = {"k": k, "seed": seed, "n": len(examples),
           "confusion": {"tn": cm.tn, "fp": cm.fp, "fn": cm.fn, "tp": cm.tp},
           "precision": cm.precision, "recall": cm.recall, "accuracy": cm.accuracy,
           "split_train_fraction": float(cfg["train_fraction"]), "split_accuracy": acc}
    _write_json(_outdir(args) / "cross_validation.json", doc)
    print(json.dumps(doc, sort_keys=True))


def cmd_locate(args, cfg):
    _require(args.input, args.gazetteer)
    backend = FixtureBackend.from_file(args.gazetteer)
    messages, _ = _load_messages(args.input)
    params = InferenceParams(r=float(cfg["r"]), keep_all=bool(cfg["keep_all"]))
    cands, stats = collect_candidates(messages, backend, int(cfg["workers"]))
    out = _outdir(args)
    with open(out / "locations.jsonl", "w", encoding="utf-8") as fh:
        for m, c in zip(messages, cands):
            loc = infer(m, c, params)
            stats.located += loc is not None
            fh.write(json.dumps(location_record(m, loc), sort_keys=True) + "\n")
    _write_json(out / "location_stats.json", stats.to_dict())
    print(json.dumps(stats.to_dict(), sort_keys=True))


def _read_location_shapes(path) -> list:
    shapes = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                if rec.get("shape"):
                    shapes.append(geo.from_geojson(rec["shape"]))
    return shapes


def _population(args, spec):
    if getattr(args, "population", None):
        raster = detect.PopulationRaster.from_csv(args.population)
        if raster.values.shape != (spec.n_rows, spec.n_cols):
            raise CLIError(f"population raster {raster.values.shape} does not match grid "
                           f"{(spec.n_rows, spec.n_cols)}")
        return raster
    return detect.PopulationRaster.uniform(spec)


def _detect_params(cfg) -> DetectParams:
    ref = cfg["reference_max"]
    return DetectParams(float(cfg["alpha"]), float(cfg["T"]), Mode(cfg["mode"]),
                        reference_max=None if ref is None else float(ref))


def _write_grid(grid, out: Path, stem: str, png: bool = True) -> None:
    from .render import render_png

    detect.write_grid_geojson(grid, out / f"{stem}.geojson")
    detect.write_grid_csv(grid, out / f"{stem}.csv")
    if png:
        render_png(grid, out / f"{stem}.png")


def cmd_grid(args, cfg):
    _require(args.locations, getattr(args, "population", None))
    spec = grid_spec(cfg)
    raster = _population(args, spec)
    shapes = _read_location_shapes(args.locations)
    params = _detect_params(cfg)
    try:
        grid = detect.detection_grid(shapes, spec, raster, params, int(cfg["workers"]))
    except NoSignalError as exc:
        raise CLIError(str(exc)) from None
    out = _outdir(args)
    _write_grid(grid, out, "grid", png=not args.no_png)
    print(f"grid {spec.n_rows}x{spec.n_cols} from {len(shapes)} located shapes -> {out}")


def cmd_declare(args, cfg):
    _require(args.grid, args.counties)
    grid = detect.read_grid_geojson(args.grid)
    counties = detect.load_regions(args.counties)
    decl = detect.declare_counties(grid, counties, float(cfg["T"]))
    out = _outdir(args)
    label = args.date or "grid"
    detect.write_declarations_csv(((label, d) for d in decl), out / "declarations.csv")
    print(f"{sum(d.flooded for d in decl)}/{len(decl)} counties flooded at T={cfg['T']}")


def _read_declarations(path) -> Dict[str, List[str]]:
    by_day: Dict[str, List[str]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            by_day.setdefault(row["date"], [])
            if int(row["flooded"]):
                by_day[row["date"]].append(row["county"])
    return by_day


def cmd_validate(args, cfg):
    _require(args.declarations, args.truth, args.counties)
    registry = evaluate.CountyRegistry.from_regions(detect.load_regions(args.counties), args.aliases)
    declared = _read_declarations(args.declarations)
    truth = evaluate.read_truth_csv(args.truth)
    rows, summary = validate_days(declared, truth, registry, [float(b) for b in cfg["betas"]])
    out = _outdir(args)
    _write_validation(out, rows, summary)
    print(json.dumps(summary, sort_keys=True))


def validate_days(declared: Dict[str, List[str]], truth, registry, betas):
    """Per-day metrics for every declared day that also has truth records."""
    truth_by_day: Dict[str, list] = {}
    for t in truth:
        truth_by_day.setdefault(t.date.isoformat(), []).append(t)
    rows = []
    for day in sorted(declared):
        if day[:10] not in truth_by_day or len(day) != 10:
            continue
        m = evaluate.day_metrics(declared[day], truth_by_day[day], registry)
        rows.append((day, m))
    if not rows:
        raise CLIError("no overlapping dates between declarations and truth")
    p = math.fsum(m.precision for _, m in rows) / len(rows)
    r = math.fsum(m.recall for _, m in rows) / len(rows)
    summary = {"days": len(rows), "avg_precision": p, "avg_recall": r}
    for b in betas:
        summary[f"F{b:g}"] = evaluate.f_beta(p, r, b)
    return rows, summary


def _write_validation(out: Path, rows, summary) -> None:
    with open(out / "validation.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "tp", "fp", "fn", "precision", "recall", "precision_defined"])
        for day, m in rows:
            w.writerow([day, m.tp, m.fp, m.fn, repr(m.precision), repr(m.recall), int(m.precision_defined)])
    _write_json(out / "validation_summary.json", summary)


def cmd_sweep(args, cfg):
    _require(args.input, args.truth, args.gazetteer, args.counties, getattr(args, "population", None))
    spec = grid_spec(cfg)
    raster = _population(args, spec)
    counties = detect.load_regions(args.counties)
    registry = evaluate.CountyRegistry.from_regions(counties, args.aliases)
    backend = FixtureBackend.from_file(args.gazetteer)
    messages, _ = _load_messages(args.input)
    truth = evaluate.read_truth_csv(args.truth)
    truth_days = {t.date for t in truth}
    by_day: Dict[date, list] = {}
    for m in messages:
        if m.day in truth_days:
            by_day.setdefault(m.day, []).append(m)
    if not by_day:
        raise CLIError("no overlapping dates between corpus and truth")
    days = [evaluate.DayData(d, by_day[d], [t for t in truth if t.date == d]) for d in sorted(by_day)]
    pg = evaluate.ParamGrid(tuple(float(x) for x in cfg["sweep_r"]), tuple(float(x) for x in cfg["sweep_alpha"]),
                            tuple(float(x) for x in cfg["sweep_T"]), tuple(Mode(m) for m in cfg["sweep_mode"]))
    betas = [float(b) for b in cfg["betas"]]
    results, best = evaluate.sweep(days, backend, spec, raster, counties, pg, betas, registry,
                                   workers=int(cfg["workers"]))
    out = _outdir(args)
    evaluate.write_sweep_csv(results, betas, out / "sweep.csv")
    evaluate.write_sweep_summary(best, out / "sweep_summary.json",
                                 {"seed": int(cfg["seed"]), "days": [d.day.isoformat() for d in days]})
    _write_json(out / "effective_config.json", cfg)
    for row in evaluate.sweep_summary(best):
        print(json.dumps(row, sort_keys=True))


def cmd_render(args, cfg):
    from .render import render_png

    _require(args.grid)
    grid = detect.read_grid_geojson(args.grid)
    out = _outdir(args)
    render_png(grid, out / (Path(args.grid).stem + ".png"), cell_px=args.cell_px)


def _windows(messages, hours: float):
    """Half-open UTC windows of ``hours`` aligned to midnight, covering every message day."""
    if not messages:
        return []
    step = timedelta(hours=hours)
    first = min(m.day for m in messages)
    last = max(m.day for m in messages)
    t = datetime(first.year, first.month, first.day, tzinfo=timezone.utc)
    end = datetime(last.year, last.month, last.day, tzinfo=timezone.utc) + timedelta(days=1)
    out = []
    while t < end:
        out.append((t, min(t + step, end)))
        t += step
    return out


def _window_label(start: datetime, hours: float) -> str:
    return start.strftime("%Y-%m-%d") if hours >= 24 and start.hour == 0 else start.strftime("%Y-%m-%dT%H")


def cmd_pipeline(args, cfg):
    _require(args.input, args.gazetteer, args.counties, args.model, args.training, args.truth,
             getattr(args, "population", None))
    if args.model and args.training:
        raise CLIError("give either --model or --training, not both")
    model = _load_model(args.model)
    if args.training:
        model = relevance.train(relevance.read_training_file(args.training), float(cfg["alpha_smooth"]))
    spec = grid_spec(cfg)
    raster = _population(args, spec)
    counties = detect.load_regions(args.counties)
    backend = FixtureBackend.from_file(args.gazetteer)
    workers = int(cfg["workers"])

    messages, report = _load_messages(args.input)
    kept, trace = filters.run_cascade(messages, filter_config(cfg), model.is_relevant if model else None)
    cands, stats = collect_candidates(kept, backend, workers)
    iparams = InferenceParams(r=float(cfg["r"]), keep_all=bool(cfg["keep_all"]))
    from .locate import infer_from_candidates

    located = infer_from_candidates(kept, cands, iparams)
    stats.located = sum(bool(x) for x in located)
    dparams = _detect_params(cfg)
    hours = float(cfg["window_hours"])

    out = _outdir(args)
    (out / "windows").mkdir(exist_ok=True)
    _write_json(out / "effective_config.json", cfg)
    _write_json(out / "ingest_report.json", json.loads(report.to_json()))
    (out / "filter_trace.json").write_text(trace.to_json() + "\n", encoding="utf-8")
    _write_json(out / "location_stats.json", stats.to_dict())
    with open(out / "locations.jsonl", "w", encoding="utf-8") as fh:
        for m, locs in zip(kept, located):
            fh.write(json.dumps(location_record(m, locs[0] if locs else None), sort_keys=True) + "\n")

    decl_rows, windows_meta = [], []
    for start, end in _windows(kept, hours):
        idx = [k for k, m in enumerate(kept) if start <= m.timestamp < end]
        shapes = [loc.shape for k in idx for loc in located[k]]
        label = _window_label(start, hours)
        grid = detect.accumulate(geo.make_grid(spec.bbox, spec.n_rows, spec.n_cols), shapes, workers=workers)
        grid = detect.population_scale(grid, raster, dparams.alpha)
        no_signal = False
        if dparams.mode is Mode.RELATIVE:
            try:
                grid = detect.normalize_relative(grid, dparams.reference_max)
            except NoSignalError:
                no_signal = True
        decl = detect.declare_counties(grid, counties, dparams.T)
        decl_rows.extend((label, d) for d in decl)
        _write_grid(grid, out / "windows", label, png=not args.no_png)
        windows_meta.append({"label": label, "start": start.isoformat(), "end": end.isoformat(),
                             "messages": len(idx), "located_shapes": len(shapes), "no_signal": no_signal,
                             "flooded": sorted(d.county_name for d in decl if d.flooded)})
    detect.write_declarations_csv(decl_rows, out / "declarations.csv")
    _write_json(out / "windows.json", windows_meta)

    if args.truth:
        registry = evaluate.CountyRegistry.from_regions(counties, args.aliases)
        declared: Dict[str, List[str]] = {}
        for label, d in decl_rows:
            declared.setdefault(label, [])
            if d.flooded:
                declared[label].append(d.county_name)
        try:
            rows, summary = validate_days(declared, evaluate.read_truth_csv(args.truth), registry,
                                          [float(b) for b in cfg["betas"]])
            _write_validation(out, rows, summary)
        except CLIError as exc:
            log.warning("validation skipped: %s", exc)

    artifacts = sorted(str(p.relative_to(out)) for p in out.rglob("*") if p.is_file())
    _write_json(out / "manifest.json", {
        "seed": int(cfg["seed"]),
        "inputs": {k: getattr(args, k) for k in ("input", "gazetteer", "counties", "population",
                                                 "model", "training", "truth", "config")},
        "artifacts": artifacts + ["manifest.json"],
    })
    print(trace.to_json())


def cmd_make_demo(args, cfg):
    from .synthetic import write_demo_dataset

    out = _outdir(args)
    paths = write_demo_dataset(out, seed=int(cfg["seed"]))
    for k, p in sorted(paths.items()):
        print(f"{k}: {p}")


# -- parser ------------------------------------------------------------------------

def _add_common(p, *keys):
    p.add_argument("--config", help="flat JSON config file; flags override its keys")
    p.add_argument("--out", required=True, help="output directory (created if missing)")
    p.add_argument("--seed", type=int, help="random seed recorded in outputs")
    p.add_argument("--workers", type=int, help="internal parallelism")
    flag_types = {
        "allowed_timezones": (str, "comma-separated timezone labels"),
        "bot_threshold_fraction": (float, "bot volume fraction threshold"),
        "bot_denylist": (str, "comma-separated author ids always removed"),
        "blocklist_phrases": (str, "comma-separated blocklist phrases"),
        "alpha_smooth": (float, "naive Bayes smoothing"),
        "r": (float, "text-candidate weight multiplier"),
        "alpha": (float, "population exponent"),
        "T": (float, "flood threshold"),
        "mode": (str, "relative or absolute floodiness"),
        "grid_rows": (int, "grid rows N"),
        "grid_cols": (int, "grid columns M"),
        "bbox": (str, "lat_min,lat_max,lon_min,lon_max"),
        "window_hours": (float, "window length in hours"),
        "reference_max": (float, "normalize relative grids by this max instead of the window max"),
        "k": (int, "cross-validation folds"),
        "train_fraction": (float, "train share for the split evaluation"),
        "betas": (str, "comma-separated F-beta betas"),
        "sweep_r": (str, "comma-separated r values"),
        "sweep_alpha": (str, "comma-separated alpha values"),
        "sweep_T": (str, "comma-separated T values"),
        "sweep_mode": (str, "comma-separated modes"),
    }
    for key in keys:
        typ, help_ = flag_types[key]
        p.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, help=help_)


FILTER_KEYS = ("allowed_timezones", "bot_threshold_fraction", "bot_denylist", "blocklist_phrases")
GRID_KEYS = ("grid_rows", "grid_cols", "bbox")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="floodsense", description="Flood event detection from short messages.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest-stats", help="parse a JSON-lines corpus and report counts")
    p.add_argument("input")
    _add_common(p)
    p.set_defaults(func=cmd_ingest_stats)

    p = sub.add_parser("filter", help="run the filter cascade")
    p.add_argument("input")
    p.add_argument("--model", help="relevance model; omit to stop after the blocklist")
    _add_common(p, *FILTER_KEYS)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("train", help="train the relevance classifier from a TSV corpus")
    p.add_argument("training")
    _add_common(p, "alpha_smooth")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="label messages Immediate/Other")
    p.add_argument("input")
    p.add_argument("--model", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("cross-validate", help="k-fold confusion matrix and split accuracy")
    p.add_argument("training")
    _add_common(p, "alpha_smooth", "k", "train_fraction")
    p.set_defaults(func=cmd_cross_validate)

    p = sub.add_parser("locate", help="infer message locations")
    p.add_argument("input")
    p.add_argument("--gazetteer", required=True, help="fixture gazetteer (JSON lines)")
    p.add_argument("--keep-all", dest="keep_all", action="store_true", default=None)
    _add_common(p, "r")
    p.set_defaults(func=cmd_locate)

    p = sub.add_parser("grid", help="accumulate located shapes into a floodiness grid")
    p.add_argument("locations", help="locations.jsonl from `locate`")
    p.add_argument("--population", help="population raster CSV (row 0 south)")
    p.add_argument("--no-png", action="store_true")
    _add_common(p, "alpha", "mode", "reference_max", *GRID_KEYS)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("declare", help="threshold a grid into county declarations")
    p.add_argument("grid", help="grid GeoJSON")
    p.add_argument("--counties", required=True, help="county GeoJSON FeatureCollection")
    p.add_argument("--date", help="label for the date column")
    _add_common(p, "T")
    p.set_defaults(func=cmd_declare)

    p = sub.add_parser("validate", help="precision/recall of declarations against truth")
    p.add_argument("declarations")
    p.add_argument("truth")
    p.add_argument("--counties", required=True)
    p.add_argument("--aliases", help="CSV alias,county for truth naming variants")
    _add_common(p, "betas")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="(r, alpha, T, mode) parameter sweep against truth")
    p.add_argument("input", help="filtered, relevant messages (JSON lines)")
    p.add_argument("truth")
    p.add_argument("--gazetteer", required=True)
    p.add_argument("--counties", required=True)
    p.add_argument("--population")
    p.add_argument("--aliases")
    _add_common(p, "betas", "sweep_r", "sweep_alpha", "sweep_T", "sweep_mode", *GRID_KEYS)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("render", help="PNG heatmap of a grid GeoJSON")
    p.add_argument("grid")
    p.add_argument("--cell-px", type=int, default=8)
    _add_common(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("pipeline", help="filter -> classify -> locate -> grid -> declare per window")
    p.add_argument("input")
    p.add_argument("--gazetteer", required=True)
    p.add_argument("--counties", required=True)
    p.add_argument("--population")
    p.add_argument("--model")
    p.add_argument("--training", help="train the classifier inline from this TSV")
    p.add_argument("--truth", help="optional truth CSV for validation")
    p.add_argument("--aliases")
    p.add_argument("--keep-all", dest="keep_all", action="store_true", default=None)
    p.add_argument("--no-png", action="store_true")
    _add_common(p, *FILTER_KEYS, "alpha_smooth", "r", "alpha", "T", "mode", "window_hours",
                "reference_max", *GRID_KEYS)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("make-demo", help="write a synthetic demo dataset")
    _add_common(p)
    p.set_defaults(func=cmd_make_demo)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = effective_config(args)
        args.func(args, cfg)
    except CLIError as exc:
        print(f"floodsense {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"floodsense {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
