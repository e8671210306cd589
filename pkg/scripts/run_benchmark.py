"""SynCut vs NCut error ratios on simulated networks.

    python3 scripts/run_benchmark.py --trials 50 --out results/desk.csv
    python3 scripts/run_benchmark.py --paper-scale --trials 1000 --jobs 8 --out results/paper.csv

Prints medians and a coarse text histogram of both error ratios.
"""

import argparse
from pathlib import Path

import numpy as np

from sync_geom.io import save_csv
from sync_geom.netgen import BENCH_COLUMNS, DESK_SCALE, PAPER_SCALE, SimConfig, run_benchmark


def histogram(values, bins=10):
    counts, edges = np.histogram(values, bins=bins, range=(0.0, 0.5))
    width = max(counts.max(), 1)
    for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
        print(f"  [{lo:.2f}, {hi:.2f})  {'#' * int(40 * c / width):<40} {c}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--paper-scale", action="store_true")
    ap.add_argument("--config", help="SimConfig JSON, overrides the preset")
    ap.add_argument("--out", default="results/benchmark.csv")
    args = ap.parse_args()

    config = SimConfig.from_json(args.config) if args.config else (PAPER_SCALE if args.paper_scale else DESK_SCALE)
    rows = run_benchmark(config, args.trials, args.seed, jobs=args.jobs)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_csv(out, BENCH_COLUMNS, ([r[c] for c in BENCH_COLUMNS] for r in rows))

    ok = [r for r in rows if not r["error"]]
    s = np.array([r["syncut_err"] for r in ok])
    n = np.array([r["ncut_err"] for r in ok])
    gap = np.array([r["gap"] for r in ok])
    print(f"{len(ok)}/{len(rows)} trials ok, config {config.to_dict()}")
    print(f"SynCut median {np.median(s):.4f} mean {s.mean():.4f}")
    print(f"NCut   median {np.median(n):.4f} mean {n.mean():.4f}")
    for name, err in (("syncut", s), ("ncut", n)):
        if len(ok) > 2 and gap.std() > 0 and err.std() > 0:
            print(f"corr(gap, {name}) {np.corrcoef(gap, err)[0, 1]:+.3f}")
    print("SynCut:")
    histogram(s)
    print("NCut:")
    histogram(n)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
