"""POF sweep on an Adult-style sample; prints objective and min cluster per level.

    python3 scripts/run_sweep.py --k 5 10 --objective util
"""
import argparse
import tempfile
from pathlib import Path

from fcbc.cli import load_dataset
from fcbc.pipeline import pof_sweep
from fcbc.search import Grid
from fcbc.synthetic import adult_style_frame

LEVELS = (1.0, 1.05, 1.1, 1.2, 1.3, 1.5, 2.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--k", type=int, nargs="+", default=[5, 10])
    ap.add_argument("--objective", default="util", choices=["util", "egal", "leximin"])
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--r", type=int, default=128, help="grid resolution, epsilon = 1/r")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "adult_style.csv"
        adult_style_frame(args.n, args.seed).to_csv(path, index=False)
        inst = load_dataset(path, "sex", delta=args.delta, p="means", standardize=True)

    for k in args.k:
        sw = pof_sweep(inst, k, args.objective, LEVELS, Grid(args.r), rng_seed=args.seed)
        print(f"k={k} colorblind cost={sw.baseline.cost:.4f} value={sw.baseline.value:.4f}")
        print(f"{'pof':>6} {'cost':>10} {'value':>8} {'min_cl':>6} {'lp':>4}")
        for lvl, rep in zip(LEVELS, sw.reports):
            print(f"{lvl:6.2f} {rep.cost:10.4f} {rep.value:8.4f} {rep.min_cluster:6d} {rep.lp_runs:4d}")


if __name__ == "__main__":
    main()
