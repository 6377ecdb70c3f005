"""Write the synthetic demo dataset and run the full pipeline on it.

    python scripts/make_demo.py --out demo_run
"""
import argparse
from pathlib import Path

from floodsense.cli import main


def run(out: Path, seed: int, workers: int) -> int:
    data = out / "data"
    if main(["make-demo", "--out", str(data), "--seed", str(seed)]):
        return 1
    return main([
        "pipeline", str(data / "corpus.jsonl"),
        "--gazetteer", str(data / "gazetteer.jsonl"),
        "--counties", str(data / "counties.geojson"),
        "--population", str(data / "population.csv"),
        "--training", str(data / "training.tsv"),
        "--truth", str(data / "truth.csv"),
        "--config", str(data / "config.json"),
        "--seed", str(seed), "--workers", str(workers),
        "--out", str(out / "pipeline"),
    ])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("demo_run"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    a = ap.parse_args()
    raise SystemExit(run(a.out, a.seed, a.workers))
