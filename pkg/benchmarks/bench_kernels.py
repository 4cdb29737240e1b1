#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure numpy fallback.

Times raw direction kernels (forward + backward) and the full training step
at desk scale. BLAS threading is pinned to one thread: these matvecs are far
too small to split without losing to the fork/join overhead.

Run: python benchmarks/bench_kernels.py
"""
import time

import numpy as np

import stylo.nn as nn_mod
import stylo.nn.pure as pure
from stylo.corpus import TrainingPair
from stylo.nn.params import init_params
from stylo.optim import OptimConfig, OptimState
from stylo.train import train_step

try:
    import stylo._ckernels as ck

    BACKENDS = [("pure", pure), ("c", ck)]
except ImportError:
    ck = None
    BACKENDS = [("pure", pure)]
    print("NOTE: compiled extension not available; benchmarking pure only\n")

try:
    # after the stylo imports, so scipy's bundled BLAS is loaded and caught
    import threadpoolctl

    threadpoolctl.threadpool_limits(limits=1, user_api="blas")
except Exception:
    pass


def bench(fn, warmup=3, reps=30):
    for _ in range(warmup):
        fn()
    start = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - start) / reps


def bench_direction_kernels(T=100, H=100, V=28):
    rng = np.random.default_rng(0)
    ids = rng.integers(0, V, T).astype(np.int64)
    W = rng.uniform(-0.1, 0.1, (4 * H, H + V))
    b = rng.uniform(-0.1, 0.1, 4 * H)
    dh = rng.standard_normal(H)

    results = {}
    for name, mod in BACKENDS:
        def one_pass(mod=mod):
            H_arr = np.zeros((T + 1, H))
            C_arr = np.zeros((T + 1, H))
            F, I, O, G = (np.empty((T, H)) for _ in range(4))
            mod.lstm_seq_forward(ids, W, b, H_arr, C_arr, F, I, O, G)
            dW = np.zeros_like(W)
            db = np.zeros_like(b)
            mod.lstm_seq_backward(ids, W, F, I, O, G, H_arr, C_arr, dh, dW, db)

        results[name] = bench(one_pass)
    return results


def bench_train_step(T=100, H=100, V=28):
    rng = np.random.default_rng(0)
    pair = TrainingPair(window=rng.integers(0, V, T).astype(np.int64), target=3)

    results = {}
    for name, mod in BACKENDS:
        nn_mod.kernels = mod
        params = init_params("bilstm", H, V, seed=0)
        state = OptimState(params, "adam")
        cfg = OptimConfig()
        results[name] = bench(lambda: train_step(params, pair, state, cfg))
    return results


def main():
    print(f"{'case':<40} {'pure':>10} {'c':>10} {'speedup':>9}")
    print("-" * 72)
    for label, results in (
        ("lstm fwd+bwd, T=100 H=100 V=28", bench_direction_kernels()),
        ("lstm fwd+bwd, T=100 H=50 V=28", bench_direction_kernels(H=50)),
        ("bilstm train step, T=100 H=100 V=28", bench_train_step()),
    ):
        p = results["pure"] * 1000
        if "c" in results:
            c = results["c"] * 1000
            print(f"{label:<40} {p:>8.2f}ms {c:>8.2f}ms {p / c:>8.1f}x")
        else:
            print(f"{label:<40} {p:>8.2f}ms {'-':>10} {'-':>9}")


if __name__ == "__main__":
    main()
