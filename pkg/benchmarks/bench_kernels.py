"""Compiled vs numpy kernels on uniform random graphs.

    python3 benchmarks/bench_kernels.py [--sizes 128 256 512] [--repeat 3]
"""

import argparse
import time

import numpy as np

from compact_routing import kernels
from compact_routing.graphs import coverage_members, generate_uniform
from compact_routing.schemes import build_sp_neighbor_known
from compact_routing.simulator import network


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(n, seed):
    g = generate_uniform(n, seed)
    s = build_sp_neighbor_known(g)
    table = network(g, s).next_hop_table()
    members = coverage_members(g, 3)
    perm = np.random.default_rng(seed).permutation(n)
    return {
        "all_pairs_bfs": lambda b: kernels.all_pairs_bfs(g.adj, backend=b),
        "follow_next_hops": lambda b: kernels.follow_next_hops(table, 4 * n, backend=b),
        "uncovered_pairs": lambda b: kernels.uncovered_pairs(g.adj, members, backend=b),
        "lehmer_digits": lambda b: kernels.lehmer_digits(perm, backend=b),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[128, 256, 512])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"{'kernel':<18}{'n':>6}" + "".join(f"{b + ' ms':>14}" for b in backends) + f"{'speedup':>10}")
    for n in args.sizes:
        for name, run in cases(n, args.seed).items():
            times, outs = [], []
            for b in backends:
                t, out = best_of(lambda: run(b), args.repeat)
                times.append(t)
                outs.append(out)
            if len(outs) == 2 and not np.array_equal(outs[0], outs[1]):
                raise SystemExit(f"{name} at n={n}: backends disagree")
            speed = f"{times[1] / times[0]:>9.1f}x" if len(times) == 2 else f"{'-':>10}"
            print(f"{name:<18}{n:>6}" + "".join(f"{t * 1e3:>14.2f}" for t in times) + speed)


if __name__ == "__main__":
    main()
