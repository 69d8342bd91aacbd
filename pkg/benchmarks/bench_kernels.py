"""Time the numba kernels against the numpy/python fallback.

    python benchmarks/bench_kernels.py [--nodes 20000] [--steps 1000000]

Each kernel is warmed up once (so numba compile time is excluded), then
timed as the best of ``--repeat`` runs.  Results from both backends are
checked for agreement before timing is reported.
"""

import argparse
import time

import numpy as np

from randsurf import kernels
from randsurf._accel import HAVE_NUMBA
from randsurf.graph import LinkGraph
from randsurf.surfer import build_transition_matrix


def sparse_graph(n, avg_degree, seed):
    rng = np.random.default_rng(seed)
    m = n * avg_degree
    src = rng.integers(0, n, m)
    # heavy-tailed in-degree, roughly like a site with a few hub pages
    dst = np.minimum((rng.pareto(1.2, m) * n / 50).astype(np.int64), n - 1)
    names = [f"p{i}" for i in range(n)]
    keep = src != dst
    edges = [(names[s], names[t]) for s, t in zip(src[keep], dst[keep])]
    return LinkGraph.from_edges(edges, nodes=names)


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
    ap.add_argument("--nodes", type=int, default=20000)
    ap.add_argument("--degree", type=int, default=10)
    ap.add_argument("--steps", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    g = sparse_graph(args.nodes, args.degree, 0)
    tm = build_transition_matrix(g)
    cumw = g.cumulative_weights()
    print(f"graph: {g.n} nodes, {g.num_edges} edges, {int(np.sum(g.out_degrees() == 0))} dangling")

    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    results = {}
    for b in backends:
        power = lambda b=b: kernels.power_iterate(tm.src, tm.dst, tm.prob, tm.n, 0.85, 1e-12, 10000, backend=b)  # noqa: E731
        walk = lambda b=b: kernels.walk_counts(g.indptr, g.indices, cumw, g.n, 0.85, args.steps, 7, backend=b)  # noqa: E731
        results[b] = (power()[0], walk())
        print(f"{b:>6}  power_iterate {best_of(power, args.repeat) * 1e3:9.1f} ms"
              f"   walk_counts({args.steps:.0e}) {best_of(walk, args.repeat) * 1e3:9.1f} ms")

    if len(results) == 2:
        (xa, ca), (xb, cb) = results["numpy"], results["numba"]
        print(f"agreement: power max|diff| = {np.max(np.abs(xa - xb)):.1e}, "
              f"walk counts identical = {bool(np.array_equal(ca, cb))}")
    else:
        print("numba not installed; fallback timings only")


if __name__ == "__main__":
    main()
