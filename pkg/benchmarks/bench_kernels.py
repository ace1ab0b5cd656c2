"""Numba vs pure-numpy timings for the counting kernels.

    python benchmarks/bench_kernels.py [--entities 20000] [--relations 60] [--repeat 5]

Each kernel runs once untimed per backend (JIT compile), then the best of
``--repeat`` runs is reported.  Outputs are compared for equality first.
"""

import argparse
import time

import numpy as np

from ctxpool.kernels import cooccurrence, count_ksubsets, count_supersets, to_bitsets


def neighbourhoods(n_rows, num_ids, mean_size, seed):
    rng = np.random.default_rng(seed)
    # skewed relation popularity, as in real graphs
    p = 1.0 / np.arange(1, num_ids + 1) ** 0.8
    p /= p.sum()
    sizes = np.clip(rng.poisson(mean_size, n_rows), 1, num_ids)
    rows = [np.sort(rng.choice(num_ids, size=s, replace=False, p=p)) for s in sizes]
    indptr = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    indices = np.concatenate(rows).astype(np.int64)
    weights = rng.integers(1, 4, n_rows).astype(np.int64)
    return indptr, indices, weights


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--entities", type=int, default=20000)
    ap.add_argument("--relations", type=int, default=60)
    ap.add_argument("--mean-size", type=float, default=5.0)
    ap.add_argument("--queries", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    indptr, indices, weights = neighbourhoods(args.entities, args.relations, args.mean_size, args.seed)
    bitsets = to_bitsets(indptr, indices, args.relations)
    rng = np.random.default_rng(args.seed + 1)
    picks = rng.integers(0, args.entities, args.queries)
    queries = bitsets[picks]

    cases = {
        "cooccurrence": lambda b: cooccurrence(indptr, indices, weights, args.relations, b),
        "ksubsets k=2": lambda b: count_ksubsets(indptr, indices, weights, args.relations, 2, b)[:2],
        "ksubsets k=4": lambda b: count_ksubsets(indptr, indices, weights, args.relations, 4, b)[:2],
        "supersets": lambda b: count_supersets(bitsets, weights, queries, b),
    }

    print(f"rows={args.entities} relations={args.relations} mean_size={args.mean_size} "
          f"queries={args.queries} repeat={args.repeat}")
    print(f"{'kernel':<14} {'numpy s':>10} {'numba s':>10} {'speedup':>8}")
    for name, fn in cases.items():
        a, b = fn("numpy"), fn("numba")
        same = all(np.array_equal(x, y) for x, y in zip(a, b)) if isinstance(a, tuple) else np.array_equal(a, b)
        if not same:
            raise SystemExit(f"{name}: backends disagree")
        t_np = best_of(lambda: fn("numpy"), args.repeat)
        t_nb = best_of(lambda: fn("numba"), args.repeat)
        print(f"{name:<14} {t_np:>10.4f} {t_nb:>10.4f} {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
