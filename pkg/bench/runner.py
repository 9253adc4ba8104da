"""Wall-clock comparison of halfspace-mass and Mahalanobis depth computation.

For every (d, n) cell a synthetic Wishart-Gaussian dataset is drawn, each
method is fitted on it and the origin is scored. One untimed warm-up run
precedes the timed repeats of every (cell, method).
"""

import logging
import time
from dataclasses import dataclass

import numpy as np
import pandas as pd

from depth.halfspace_mass import fit_hm, score_hm
from depth.models import HmHyperParams
from depthguard.exceptions import ValidationError
from scorers.mahalanobis import fit_class_gaussian, quadratic_form

from .synthetic import gen_wishart_gaussian

logger = logging.getLogger(__name__)

TIMING_COLUMNS = ["method", "phase", "K", "d", "n", "repeat", "seconds", "threads"]
SUMMARY_KEYS = ["method", "K", "phase", "d", "n"]
SCALING_COLUMNS = ["check", "K", "d", "n", "ratio"]
_MIN_ELAPSED = time.get_clock_info("perf_counter").resolution


@dataclass(frozen=True)
class BenchGrid:
    dims: tuple
    sizes: tuple
    repeats: int
    k_values: tuple
    seed: int = 0
    n_s: int = 32
    lambda_: float = 0.5
    threads: int = 1

    def __post_init__(self):
        for name in ("dims", "sizes", "k_values"):
            values = tuple(int(v) for v in getattr(self, name))
            if not values or min(values) < 1:
                raise ValidationError(f"grid {name} must be nonempty positive integers, got {values}")
            object.__setattr__(self, name, values)
        if self.repeats < 2:
            raise ValidationError(f"repeats must be >= 2 for quantiles, got {self.repeats}")
        if self.threads < 1:
            raise ValidationError(f"threads must be >= 1, got {self.threads}")

    @property
    def methods(self):
        return [("hm", K) for K in self.k_values] + [("mahalanobis", None)]

    def replace(self, **changes):
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return BenchGrid(**values)


DESK_GRID = BenchGrid(dims=(64, 128, 256, 512), sizes=(100, 1000, 5000), repeats=3, k_values=(100, 1000))
FULL_GRID = BenchGrid(
    dims=(800, 1000, 1200, 1500, 2000, 2500, 5000),
    sizes=(100, 2500, 5000, 7500, 10000),
    repeats=10,
    k_values=(100, 1000, 10000),
)
GRIDS = {"desk": DESK_GRID, "paper": FULL_GRID}


@dataclass(frozen=True)
class TimingRecord:
    method: str
    K: int | None
    phase: str
    d: int
    n: int
    elapsed: float
    repeat_index: int
    threads: int = 1


def cell_seed(seed, d, n):
    return int(np.random.SeedSequence([seed, d, n]).generate_state(1, dtype=np.uint64)[0])


def _timed_run(method, K, X, grid):
    """(fit seconds, score seconds) of one fit plus one query at the origin."""
    query = np.zeros(X.shape[1])
    start = time.perf_counter()
    if method == "hm":
        model = fit_hm(X, HmHyperParams(K=K, n_s=grid.n_s, lambda_=grid.lambda_, seed=grid.seed), n_jobs=grid.threads)
        fitted = time.perf_counter()
        score_hm(model, query)
    else:
        mean, precision, _ = fit_class_gaussian(X)
        fitted = time.perf_counter()
        quadratic_form(mean, precision, query[None, :])
    done = time.perf_counter()
    return max(fitted - start, _MIN_ELAPSED), max(done - fitted, _MIN_ELAPSED)


def run_bench(grid):
    """Time every (d, n, method) cell of ``grid``; cells that run out of memory are skipped."""
    records = []
    for d in grid.dims:
        for n in grid.sizes:
            try:
                X = gen_wishart_gaussian(d, n, cell_seed(grid.seed, d, n))
            except MemoryError:
                logger.warning(f"skipping cell d={d}, n={n}: out of memory while generating data")
                continue
            for method, K in grid.methods:
                try:
                    _timed_run(method, K, X, grid)
                    runs = [_timed_run(method, K, X, grid) for _ in range(grid.repeats)]
                except MemoryError:
                    logger.warning(f"skipping {method} K={K} at d={d}, n={n}: out of memory")
                    continue
                for repeat, (fit_s, score_s) in enumerate(runs):
                    for phase, elapsed in (("fit", fit_s), ("score", score_s), ("total", fit_s + score_s)):
                        records.append(TimingRecord(method, K, phase, d, n, elapsed, repeat, grid.threads))
                logger.info(
                    f"{method}{'' if K is None else f' K={K}'} d={d} n={n}: "
                    f"mean total {np.mean([f + s for f, s in runs]):.4f}s over {grid.repeats} repeats"
                )
    return records


def timings_frame(records):
    return pd.DataFrame(
        {
            "method": [r.method for r in records],
            "phase": [r.phase for r in records],
            "K": pd.array([r.K for r in records], dtype="Int64"),
            "d": [r.d for r in records],
            "n": [r.n for r in records],
            "repeat": [r.repeat_index for r in records],
            "seconds": [r.elapsed for r in records],
            "threads": [r.threads for r in records],
        },
        columns=TIMING_COLUMNS,
    )


def summarize_timings(records):
    """Mean and 10% / 90% quantiles of the elapsed time per (method, K, phase, d, n)."""
    frame = timings_frame(records)
    grouped = frame.groupby(SUMMARY_KEYS, dropna=False, sort=False)["seconds"]
    summary = grouped.agg(
        mean="mean",
        q10=lambda s: s.quantile(0.1),
        q90=lambda s: s.quantile(0.9),
        repeats="count",
    )
    return summary.reset_index()


def scaling_frame(records):
    """Scaling ratios of the halfspace-mass rows, from the fastest repeat of each cell.

    ``score_spread`` rows give, at fixed (K, d), the slowest over the fastest
    score time across sample sizes. ``fit_linearity`` rows give, at fixed
    (d, n), the fit-time ratio between consecutive K settings divided by the
    K ratio, so 1.0 is exactly linear.
    """
    frame = timings_frame(records)
    best = (
        frame[frame["method"] == "hm"]
        .groupby(["phase", "K", "d", "n"], sort=True)["seconds"]
        .min()
        .reset_index()
    )
    rows = []
    score = best[best["phase"] == "score"]
    for (K, d), cell in score.groupby(["K", "d"], sort=True):
        if len(cell) > 1:
            rows.append(("score_spread", int(K), d, None, cell["seconds"].max() / cell["seconds"].min()))
    fit = best[best["phase"] == "fit"]
    for (d, n), cell in fit.groupby(["d", "n"], sort=True):
        cell = cell.sort_values("K")
        ks, seconds = cell["K"].to_numpy(dtype=float), cell["seconds"].to_numpy()
        for i in range(1, len(cell)):
            ratio = (seconds[i] / seconds[i - 1]) / (ks[i] / ks[i - 1])
            rows.append(("fit_linearity", int(ks[i]), d, n, ratio))
    scaling = pd.DataFrame(rows, columns=SCALING_COLUMNS)
    scaling["n"] = pd.array(scaling["n"], dtype="Int64")
    return scaling


def write_timings(records, path):
    timings_frame(records).to_csv(path, index=False, lineterminator="\n")


def write_summary(summary, path):
    summary.to_csv(path, index=False, lineterminator="\n")


def write_scaling(scaling, path):
    scaling.to_csv(path, index=False, lineterminator="\n")
