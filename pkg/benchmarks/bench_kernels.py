#!/usr/bin/env python3
"""Benchmark the compiled hinge-SGD kernel against the numpy fallback.

The per-sample retraining loop makes this kernel the simulator's hot path:
a centralized run at budget N performs roughly N^2/4 SGD steps. Run as

    python benchmarks/bench_kernels.py [--samples 1000] [--dim 784]
        [--classes 10] [--passes 5] [--end-to-end]

The end-to-end mode times a small centralized run under each backend by
re-executing this script with EDGESIM_PURE_PYTHON=1.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np


def bench_kernel(fn, weights, feats, labels, order, lam, passes):
    w = weights.copy()
    t = 0
    start = time.perf_counter()
    for _ in range(passes):
        t = fn(w, feats, labels, order, lam, t)
    elapsed = time.perf_counter() - start
    return w, elapsed


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=1000)
    parser.add_argument("--dim", type=int, default=784)
    parser.add_argument("--classes", type=int, default=10)
    parser.add_argument("--passes", type=int, default=5)
    parser.add_argument("--lam", type=float, default=1e-4)
    parser.add_argument("--end-to-end", action="store_true",
                        help="also time a small centralized run per backend")
    parser.add_argument("--centralized-run", action="store_true",
                        help=argparse.SUPPRESS)  # internal: timed child process
    args = parser.parse_args()

    if args.centralized_run:
        run_centralized_once()
        return

    from edgesim.kernels import BACKEND, hinge_sgd_pass_python

    rng = np.random.default_rng(0)
    feats = np.ascontiguousarray(rng.standard_normal((args.samples, args.dim)))
    labels = rng.integers(0, args.classes, args.samples).astype(np.int64)
    order = rng.permutation(args.samples).astype(np.int64)
    weights = np.zeros((args.classes, args.dim + 1))
    steps = args.samples * args.passes

    print(f"hinge SGD pass: {args.samples} samples, dim {args.dim}, "
          f"{args.classes} classes, {args.passes} passes ({steps} steps)")

    w_py, t_py = bench_kernel(hinge_sgd_pass_python, weights, feats, labels,
                              order, args.lam, args.passes)
    print(f"  python : {steps / t_py:10.0f} steps/s  ({t_py:.3f} s)")

    if BACKEND == "cython":
        from edgesim.kernels import hinge_sgd_pass

        w_cy, t_cy = bench_kernel(hinge_sgd_pass, weights, feats, labels,
                                  order, args.lam, args.passes)
        denom = np.max(np.abs(w_py)) or 1.0
        drift = np.max(np.abs(w_cy - w_py)) / denom
        print(f"  cython : {steps / t_cy:10.0f} steps/s  ({t_cy:.3f} s)")
        print(f"  speedup: {t_py / t_cy:.2f}x   max relative drift {drift:.2e}")
    else:
        print("  compiled kernel not available; python fallback only")

    if args.end_to_end:
        print("end-to-end centralized run (N=400, 784-dim surrogate):")
        for label, env_value in (("cython", "0"), ("python", "1")):
            env = dict(os.environ, EDGESIM_PURE_PYTHON=env_value)
            start = time.perf_counter()
            subprocess.run([sys.executable, __file__, "--centralized-run"],
                           check=True, env=env)
            print(f"  {label:7s}: {time.perf_counter() - start:.2f} s")


def run_centralized_once():
    from edgesim.centralized import ThresholdPolicy, run_centralized
    from edgesim.channel import TxSnr
    from edgesim.dataset import synth_blobs
    from edgesim.learner import TrainConfig
    from edgesim.rng import stream

    rng = stream(0, "data")
    train = synth_blobs(10, 784, 200, 5.0, rng)
    test = synth_blobs(10, 784, 100, 5.0, rng)
    run_centralized(train, test, ThresholdPolicy.from_db(8.0, 2.0),
                    TxSnr.from_db(4.0), 400, TrainConfig(), seed=0, eval_every=0)


if __name__ == "__main__":
    main()
