"""Command-line runner: load a delimited dataset, sweep budgets, write CSV."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import platform
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
import scipy

from .core import Instance, Objective, parse_p, proportional_bounds
from .errors import (BudgetInfeasibleError, ConfigError, DatasetError, EmptyDatasetError,
                     MissingColumnError, NonNumericFeatureError, PropertyViolation,
                     SolverError, StructuralError)
from .pipeline import pof_sweep
from .search import Grid

log = logging.getLogger("fcbc")

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_SOLVER = 0, 2, 3, 4
P_NAMES = {"center": math.inf, "median": 1.0, "means": 2.0}


@dataclass
class RunConfig:
    dataset: str
    color_col: str
    features: list[str] | None = None
    k: int = 5
    p: str = "means"
    objective: str = "util"
    delta: float = 0.1
    epsilon: float = 1 / 128
    pof_levels: list[float] = field(default_factory=lambda: [1.0])
    seed: int = 0
    subsample: int | None = None
    seed_method: str | None = None
    expand_budget: bool = False
    standardize: bool = False
    merge: dict[str, str] | None = None
    rounding: str = "flow"
    out: str = "results"
    omit_runtime: bool = False

    def validate(self) -> "RunConfig":
        if self.p not in P_NAMES:
            raise ConfigError(f"p must be one of {sorted(P_NAMES)}")
        try:
            Objective.parse(self.objective)
        except StructuralError as exc:
            raise ConfigError(str(exc)) from None
        if not 0 <= self.delta < 1:
            raise ConfigError("delta must lie in [0, 1)")
        if not 0 < self.epsilon < 1:
            raise ConfigError("epsilon must lie in (0, 1)")
        r = round(1 / self.epsilon)
        if r < 2 or abs(r * self.epsilon - 1) > 1e-9:
            raise ConfigError(f"epsilon={self.epsilon} is not 1/r for an integer r >= 2")
        if not self.pof_levels:
            raise ConfigError("at least one pof level is required")
        if sorted(self.pof_levels) != list(self.pof_levels) or min(self.pof_levels) < 1:
            raise ConfigError("pof levels must be ascending and at least 1")
        if self.k < 1:
            raise ConfigError("k must be positive")
        if self.subsample is not None and self.subsample < 1:
            raise ConfigError("subsample must be positive")
        if self.rounding not in ("flow", "random"):
            raise ConfigError("rounding must be 'flow' or 'random'")
        return self


def load_dataset(path, color_column: str, feature_columns: Sequence[str] | None = None,
                 subsample: int | None = None, seed: int = 0, *, delta: float = 0.1,
                 p="means", merge: dict | None = None, standardize: bool = False) -> Instance:
    """Rows become points; the color column is mapped to dense ids in sorted order.

    ``merge`` maps raw color values onto others before the ids are assigned.
    Bounds are ``(1 +/- delta)`` times the (subsampled) color proportions.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"dataset {path} not found")
    if not path.read_text().strip():
        raise EmptyDatasetError(f"{path} is empty")
    try:
        df = pd.read_csv(path, sep=None, engine="python", dtype=str, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise EmptyDatasetError(f"{path} is empty") from None
    except (csv.Error, pd.errors.ParserError) as exc:
        raise DatasetError(f"{path}: {exc}") from None
    if df.empty:
        raise EmptyDatasetError(f"{path} has a header but no rows")
    if color_column not in df.columns:
        raise MissingColumnError(f"color column {color_column!r} not in {list(df.columns)}")
    if feature_columns is None:
        feature_columns = [c for c in df.columns
                           if c != color_column and pd.to_numeric(df[c], errors="coerce").notna().all()]
        if not feature_columns:
            raise NonNumericFeatureError("no numeric feature columns found")
    missing = [c for c in feature_columns if c not in df.columns]
    if missing:
        raise MissingColumnError(f"feature columns not found: {missing}")
    feats = {}
    for c in feature_columns:
        vals = pd.to_numeric(df[c], errors="coerce")
        if vals.isna().any():
            raise NonNumericFeatureError(f"column {c!r} has non-numeric or missing values")
        feats[c] = vals.to_numpy(dtype=float)
    X = np.column_stack([feats[c] for c in feature_columns])
    raw = df[color_column].astype(str).str.strip()
    if merge:
        raw = raw.replace({str(a): str(b) for a, b in merge.items()})

    if subsample is not None and subsample < len(df):
        idx = np.sort(np.random.default_rng(seed).choice(len(df), subsample, replace=False))
        X, raw = X[idx], raw.iloc[idx]
    if standardize:
        sd = X.std(axis=0)
        X = (X - X.mean(axis=0)) / np.where(sd > 0, sd, 1.0)
    codes, names = pd.factorize(raw, sort=True)
    alpha, beta = proportional_bounds(codes, delta)
    return Instance(colors=codes, alpha=alpha, beta=beta, p=parse_p(P_NAMES.get(p, p)),
                    points=X, color_names=tuple(str(v) for v in names))


RESULT_HEAD = ["pof", "budget", "cost", "objective"]
RESULT_TAIL = ["min_cluster", "lp_runs", "runtime_ms"]


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _row(rep, base_cost, omit_runtime):
    return ([_fmt(rep.cost / base_cost), _fmt(rep.budget), _fmt(rep.cost), _fmt(rep.value)]
            + [_fmt(d) for d in rep.deltas]
            + [_fmt(rep.min_cluster), _fmt(rep.lp_runs),
               _fmt(0 if omit_runtime else round(rep.runtime_ms, 3))])


def run(config: RunConfig) -> dict[str, Path]:
    """Execute the sweep and write ``results.csv`` and ``manifest.json``."""
    config.validate()
    inst = load_dataset(config.dataset, config.color_col, config.features, config.subsample,
                        config.seed, delta=config.delta, p=config.p, merge=config.merge,
                        standardize=config.standardize)
    if config.k > inst.n:
        raise ConfigError(f"k={config.k} exceeds the number of points {inst.n}")
    grid = Grid.from_epsilon(config.epsilon)
    log.info("n=%d colors=%s k=%d", inst.n, inst.color_names, config.k)
    sweep = pof_sweep(inst, config.k, config.objective, config.pof_levels, grid,
                      config.seed_method, config.seed, config.rounding)
    if config.expand_budget:
        # report the theoretical budget alongside; the sweep itself uses U directly
        log.info("expand_budget: budgets scale by 2 + alpha = %.4g", 2 + sweep.seed.alpha)

    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    base = sweep.baseline.cost
    results = out / "results.csv"
    with results.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_HEAD + [f"delta_{c}" for c in inst.color_names] + RESULT_TAIL)
        w.writerow(_row(sweep.baseline, base, config.omit_runtime))
        for rep in sweep.reports:
            w.writerow(_row(rep, base, config.omit_runtime))

    manifest = {
        "config": asdict(config),
        "instance": {"n": inst.n, "colors": list(inst.color_names),
                     "proportions": inst.proportions.tolist(),
                     "alpha": inst.alpha.tolist(), "beta": inst.beta.tolist(), "p": config.p},
        "colorblind": {"method": sweep.seed.method, "alpha": sweep.seed.alpha,
                       "cost": sweep.seed.cost, "centers": list(sweep.seed.centers)},
        "seeds": {"rng_seed": config.seed, "subsample_seed": config.seed},
        "rows": ["colorblind"] + [f"pof={v}" for v in config.pof_levels],
        "versions": {"python": platform.python_version(), "numpy": np.__version__,
                     "scipy": scipy.__version__, "pandas": pd.__version__},
    }
    if config.expand_budget:
        manifest["expanded_budgets"] = [(2 + sweep.seed.alpha) * r.budget for r in sweep.reports]
    mpath = out / "manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return {"results": results, "manifest": mpath}


def _parse_merge(text: str | None):
    if not text:
        return None
    out = {}
    for item in text.split(","):
        if ":" not in item:
            raise ConfigError(f"merge entries look like old:new, got {item!r}")
        a, b = item.split(":", 1)
        out[a.strip()] = b.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fcbc", description=__doc__)
    ap.add_argument("--dataset", required=True)
    ap.add_argument("--color-col", required=True)
    ap.add_argument("--features", help="comma-separated numeric columns (default: all numeric)")
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--p", choices=sorted(P_NAMES), default="means")
    ap.add_argument("--objective", choices=["util", "egal", "leximin"], default="util")
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--epsilon", type=float, default=1 / 128)
    ap.add_argument("--pof", default="1.0", help="comma-separated ascending ratios >= 1")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--subsample", type=int)
    ap.add_argument("--seed-method", choices=["kmeans++", "gonzalez", "local-search"])
    ap.add_argument("--expand-budget", action="store_true")
    ap.add_argument("--standardize", action="store_true")
    ap.add_argument("--merge", help="color merges as old:new,old:new")
    ap.add_argument("--rounding", choices=["flow", "random"], default="flow")
    ap.add_argument("--omit-runtime", action="store_true",
                    help="write 0 in runtime_ms so reruns are byte-identical")
    ap.add_argument("--out", default="results")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    try:
        levels = [float(v) for v in ns.pof.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad --pof list {ns.pof!r}") from None
    return RunConfig(
        dataset=ns.dataset, color_col=ns.color_col,
        features=[c.strip() for c in ns.features.split(",")] if ns.features else None,
        k=ns.k, p=ns.p, objective=ns.objective, delta=ns.delta, epsilon=ns.epsilon,
        pof_levels=levels, seed=ns.seed, subsample=ns.subsample, seed_method=ns.seed_method,
        expand_budget=ns.expand_budget, standardize=ns.standardize,
        merge=_parse_merge(ns.merge), rounding=ns.rounding, out=ns.out,
        omit_runtime=ns.omit_runtime)


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        paths = run(config_from_args(ns))
    except (ConfigError, StructuralError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except BudgetInfeasibleError as exc:
        log.error("budget infeasible: %s", exc)
        return EXIT_BUDGET
    except (SolverError, PropertyViolation) as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER
    print(paths["results"])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
