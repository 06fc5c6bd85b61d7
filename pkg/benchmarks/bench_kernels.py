"""Compare the compiled kernels against the pure-Python fallback.

Times the two hot paths (reachability sweeps, incremental gain queries)
and a full multi-year plan on a synthetic region, then checks that both
backends return identical numbers.  Run from a built checkout:

    python benchmarks/bench_kernels.py [--dims 50x50] [--seed 0]
"""

import argparse
import time

import numpy as np

from coverplan import kernels
from coverplan.algorithms import multistep_planning
from coverplan.scenario import build_instance, generate_synthetic_region


def best_of(runs, fn):
    times = []
    for _ in range(runs):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_covered_sets(impl, sf, runs):
    minutes = sf.friction.minutes_per_km
    passable = sf.friction.passable
    sources = np.arange(minutes.size, dtype=np.int64)[passable.ravel()]
    return best_of(runs, lambda: impl.covered_sets(
        minutes, passable, sources, sf.friction.cell_km, sf.tau))


def bench_gain(impl, covers, mask, weights, runs):
    def sweep():
        total = 0.0
        for cells in covers:
            total += impl.coverage_gain(cells, mask, weights, 1)
        return total
    return best_of(runs, sweep)


def bench_plan(sf, backend, runs):
    built = build_instance(sf, backend=backend)
    return best_of(runs, lambda: multistep_planning(built.instance))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", default="50x50")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--runs", type=int, default=3)
    args = ap.parse_args()
    rows, cols = (int(v) for v in args.dims.split("x"))

    sf = generate_synthetic_region(seed=args.seed, rows=rows, cols=cols,
                                   districts=3, years=5, budget=3,
                                   existing_count=4)
    try:
        compiled = kernels.get_impl("compiled")
    except ImportError:
        raise SystemExit("compiled extension not built; run pip install -e . first")
    fallback = kernels.get_impl("python")

    print(f"region {rows}x{cols}, 5 years, budget 3/year, seed {args.seed}")
    print(f"active backend: {kernels.backend()}")
    print()
    print(f"{'stage':<22} {'compiled':>12} {'python':>12} {'speedup':>9}")

    tc, sets_c = bench_covered_sets(compiled, sf, args.runs)
    tp, sets_p = bench_covered_sets(fallback, sf, args.runs)
    assert len(sets_c) == len(sets_p)
    assert all(np.array_equal(a, b) for a, b in zip(sets_c, sets_p))
    print(f"{'reachability sweeps':<22} {tc:>11.4f}s {tp:>11.4f}s {tp / tc:>8.1f}x")

    years, n = 5, rows * cols
    mask = np.zeros((years, n), dtype=np.uint8)
    rng = np.random.default_rng(args.seed)
    weights = rng.integers(0, 50, size=(years, n)).astype(np.float64)
    tc, gain_c = bench_gain(compiled, sets_c, mask, weights, args.runs)
    tp, gain_p = bench_gain(fallback, sets_p, mask, weights, args.runs)
    assert gain_c == gain_p
    print(f"{'gain queries':<22} {tc:>11.4f}s {tp:>11.4f}s {tp / tc:>8.1f}x")

    tc, plan_c = bench_plan(sf, "compiled", args.runs)
    tp, plan_p = bench_plan(sf, "python", args.runs)
    assert plan_c.selection.per_round == plan_p.selection.per_round
    assert plan_c.values == plan_p.values
    print(f"{'full five-year plan':<22} {tc:>11.4f}s {tp:>11.4f}s {tp / tc:>8.1f}x")
    print()
    print(f"plans agree: gain {plan_c.value:g} on both backends")


if __name__ == "__main__":
    main()
