"""Throughput of the filter cascade plus relevance classification."""
import argparse
import time
from datetime import date

from floodsense import synthetic
from floodsense.filters import FilterConfig, run_cascade
from floodsense.relevance import train

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("-n", type=int, default=1_000_000, help="messages (a 100k base is tiled)")
ap.add_argument("--repeats", type=int, default=3)
a = ap.parse_args()

world = synthetic.checkerboard_world()
base = synthetic.raw_corpus(world, date(2015, 12, 5), min(a.n, 100_000), seed=11)
messages = (base * (a.n // len(base) + 1))[:a.n]
model = train(synthetic.training_corpus(2000, seed=1, noise=0.05))

rates = []
for _ in range(a.repeats):
    t0 = time.perf_counter()
    kept, trace = run_cascade(messages, FilterConfig(), model.is_relevant)
    rates.append(len(messages) / (time.perf_counter() - t0))
print(trace.to_json())
print(f"best {max(rates):,.0f} msg/s, median {sorted(rates)[len(rates) // 2]:,.0f} msg/s over {a.repeats} runs")
