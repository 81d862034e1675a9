"""Sweep harness: executes (sweep value, scheme, seed) trials, emits the
detail and summary CSVs, and runs the threshold grid search.

Detail rows: sweep_param,sweep_value,scheme,seed,accuracy,blocks_spent,wall_ms
Summary rows: sweep_param,sweep_value,scheme,mean_accuracy,std_accuracy,n_trials

Trials are independent and deterministically seeded, so serial and
parallel execution produce the same rows (wall_ms excepted); a failed
trial yields a row with empty accuracy/blocks and the sweep continues.
"""

import os
import sys
import time
from dataclasses import dataclass
from functools import lru_cache
from multiprocessing import Pool

import numpy as np

from .centralized import ThresholdPolicy, run_centralized
from .channel import TxSnr
from .dataset import SplitSpec, load_idx, stratified_subset, synth_blobs
from .distributed import run_distributed
from .learner import TrainConfig
from .rng import stream

DATA_DIR_ENV = "EDGESIM_DATA_DIR"
DETAIL_HEADER = "sweep_param,sweep_value,scheme,seed,accuracy,blocks_spent,wall_ms"
SUMMARY_HEADER = "sweep_param,sweep_value,scheme,mean_accuracy,std_accuracy,n_trials"


def _resolve_path(path):
    base = os.environ.get(DATA_DIR_ENV)
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


@lru_cache(maxsize=4)
def _load_idx_cached(images_path, labels_path):
    return load_idx(images_path, labels_path)


def build_dataset(ds_cfg, seed):
    """Materialize the (train, test) pair for one trial seed."""
    data_rng = stream(seed, "data")
    if ds_cfg.source == "synth":
        train = synth_blobs(ds_cfg.classes, ds_cfg.dim, ds_cfg.train_per_class,
                            ds_cfg.separation, data_rng)
        test = synth_blobs(ds_cfg.classes, ds_cfg.dim, ds_cfg.test_per_class,
                           ds_cfg.separation, data_rng)
        return train, test
    train_full = _load_idx_cached(_resolve_path(ds_cfg.train_images),
                                  _resolve_path(ds_cfg.train_labels))
    test_full = _load_idx_cached(_resolve_path(ds_cfg.test_images),
                                 _resolve_path(ds_cfg.test_labels))
    train = train_full
    if ds_cfg.train_size:
        train = stratified_subset(train_full, ds_cfg.train_size, data_rng)
    test = test_full
    if ds_cfg.test_size:
        test = stratified_subset(test_full, ds_cfg.test_size, data_rng)
    return train, test


def _centralized_policy(cfg, scheme, axis, value):
    if scheme == "proposed":
        high, low = cfg.gamma_high_db, cfg.gamma_low_db
        if axis == "threshold_db":
            if high is None:
                high = value
            else:
                low = value
        return ThresholdPolicy.from_db(high, low)
    gamma = value if axis == "threshold_db" else cfg.gamma_db
    return ThresholdPolicy.from_db(gamma, gamma)


@dataclass
class TrialResult:
    value: object
    scheme: str
    seed: int
    accuracy: float = None
    blocks_spent: int = None
    wall_ms: float = 0.0
    error: str = None


def run_trial(cfg, value, scheme, seed):
    """Execute one (sweep value, scheme, seed) trial."""
    start = time.perf_counter()
    try:
        train, test = build_dataset(cfg.dataset, seed)
        learn_cfg = TrainConfig(lam=cfg.lam, epochs=cfg.epochs)
        axis = cfg.sweep_axis
        n_blocks = value if axis == "N" else cfg.n_blocks
        tx = TxSnr.from_db(value if axis == "tx_snr_db" else cfg.tx_snr_db)
        if cfg.mode == "centralized":
            policy = _centralized_policy(cfg, scheme, axis, value)
            trace = run_centralized(train, test, policy, tx, n_blocks, learn_cfg,
                                    seed, eval_every=cfg.eval_every)
            accuracy, blocks = trace.final_accuracy, trace.blocks_spent
        else:
            if axis == "ratio":
                spec = SplitSpec.size_ratio(value)
            elif axis == "K":
                spec = SplitSpec.random(value)
            elif cfg.split_mode == "ratio":
                spec = SplitSpec.size_ratio(cfg.ratio)
            else:
                spec = SplitSpec.random(cfg.k_devices)
            result = run_distributed(train, test, spec, n_blocks, tx, scheme,
                                     learn_cfg, seed)
            accuracy, blocks = result.accuracy, sum(result.plan.counts)
        wall_ms = (time.perf_counter() - start) * 1e3
        return TrialResult(value, scheme, seed, accuracy, blocks, wall_ms)
    except Exception as e:  # error rows keep the sweep alive
        wall_ms = (time.perf_counter() - start) * 1e3
        return TrialResult(value, scheme, seed, wall_ms=wall_ms,
                           error=f"{type(e).__name__}: {e}")


def _run_task(task):
    cfg, value, scheme, seed = task
    return run_trial(cfg, value, scheme, seed)


def _format_value(value):
    return repr(float(value)) if isinstance(value, float) else str(value)


def detail_row(cfg, r):
    acc = "" if r.accuracy is None else repr(r.accuracy)
    blocks = "" if r.blocks_spent is None else str(r.blocks_spent)
    return (f"{cfg.sweep_axis},{_format_value(r.value)},{r.scheme},{r.seed},"
            f"{acc},{blocks},{r.wall_ms:.3f}")


def summary_path(output):
    if output.endswith(".csv"):
        return output[:-4] + ".summary.csv"
    return output + ".summary.csv"


def _summarize(cfg, results):
    rows = []
    for value in cfg.sweep_values:
        for scheme in cfg.schemes:
            accs = [r.accuracy for r in results
                    if r.value == value and r.scheme == scheme and r.error is None]
            if accs:
                mean = float(np.mean(accs))
                std = float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0
            else:
                mean = std = float("nan")
            rows.append(f"{cfg.sweep_axis},{_format_value(value)},{scheme},"
                        f"{mean!r},{std!r},{len(accs)}")
    return rows


def run_sweep(cfg, output=None):
    """Run every (value, scheme, seed) trial and write both CSVs.

    Returns the list of TrialResult in deterministic task order.
    """
    output = output or cfg.output
    tasks = [(cfg, value, scheme, seed)
             for value in cfg.sweep_values
             for scheme in cfg.schemes
             for seed in cfg.seeds]
    if cfg.workers > 1 and len(tasks) > 1:
        with Pool(processes=cfg.workers) as pool:
            results = pool.map(_run_task, tasks, chunksize=1)
    else:
        results = [_run_task(t) for t in tasks]

    for r in results:
        if r.error is not None:
            print(f"edgesim: trial (value={r.value}, scheme={r.scheme}, "
                  f"seed={r.seed}) failed: {r.error}", file=sys.stderr)

    with open(output, "w") as f:
        f.write(DETAIL_HEADER + "\n")
        for r in results:
            f.write(detail_row(cfg, r) + "\n")
    with open(summary_path(output), "w") as f:
        f.write(SUMMARY_HEADER + "\n")
        for row in _summarize(cfg, results):
            f.write(row + "\n")
    return results


GRID_HEADER = "gamma_high_db,gamma_low_db,mean_accuracy,std_accuracy,n_trials"


@dataclass
class GridSearchResult:
    best_high_db: float
    best_low_db: float
    table: list  # (high_db, low_db, mean, std, n) tuples


def grid_search_thresholds(cfg, grid_db, output=None):
    """Evaluate every threshold pair with gamma_high >= gamma_low over the
    configured seeds; ties resolve to the lexicographically smallest pair.

    The diagonal (gamma_high == gamma_low) doubles as the equal-importance
    baseline's own search. Writes the full table CSV and returns the best
    pair with the table.
    """
    if not grid_db:
        raise ValueError("threshold grid must be nonempty")
    grid = sorted({float(g) for g in grid_db})
    pairs = [(h, l) for h in grid for l in grid if h >= l]
    pairs.sort()
    output = output or cfg.output

    table = []
    best = None
    for high, low in pairs:
        trial_cfg = _pair_config(cfg, high, low)
        accs = []
        for seed in cfg.seeds:
            r = run_trial(trial_cfg, trial_cfg.sweep_values[0], "proposed", seed)
            if r.error is not None:
                print(f"edgesim: grid trial ({high}, {low}, seed={seed}) failed: "
                      f"{r.error}", file=sys.stderr)
                continue
            accs.append(r.accuracy)
        mean = float(np.mean(accs)) if accs else float("nan")
        std = float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0
        table.append((high, low, mean, std, len(accs)))
        if accs and (best is None or mean > best[0]):
            best = (mean, high, low)
    if best is None:
        raise ValueError("every grid point failed; no best pair")

    with open(output, "w") as f:
        f.write(GRID_HEADER + "\n")
        for high, low, mean, std, n in table:
            f.write(f"{high!r},{low!r},{mean!r},{std!r},{n}\n")
    return GridSearchResult(best[1], best[2], table)


def _pair_config(cfg, high_db, low_db):
    from dataclasses import replace

    return replace(cfg, sweep_axis="N", sweep_values=(cfg.n_blocks,),
                   schemes=("proposed",), gamma_high_db=high_db,
                   gamma_low_db=low_db)
