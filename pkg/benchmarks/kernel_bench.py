"""Benchmark the compiled evaluation kernels against the NumPy fallback.

Times ``phi_endpoints`` (batched endpoint evaluation) and ``walk_points``
(sequential trajectory generation) on representative workloads in each
geometry and prints one table row per case with the speedup of the compiled
backend.  Run from an installed tree:

    python benchmarks/kernel_bench.py
    python benchmarks/kernel_bench.py --batch 20000 --steps 500 --repeats 7
"""

import argparse
import sys
import time

import numpy as np

from geowalk import ModelSpace
from geowalk import _core

SPACES = [
    ("euclidean d=2", ModelSpace.euclidean(2)),
    ("euclidean d=3", ModelSpace.euclidean(3)),
    ("hyperbolic d=2", ModelSpace.hyperbolic(2, curvature_scale=1.0)),
    ("hyperbolic d=3", ModelSpace.hyperbolic(3, curvature_scale=0.7)),
    ("flat torus d=2", ModelSpace.flat_torus([2.0 * np.pi, 2.0 * np.pi])),
]


def best_of(repeats, fn, *args, **kwargs):
    """Minimum wall time over ``repeats`` calls (first call warms caches)."""
    fn(*args, **kwargs)
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args, **kwargs)
        best = min(best, time.perf_counter() - t0)
    return best


def tangent_batch(space, rng, batch, n):
    """Unit tangent direction tuples of shape (batch, n, ambient_dim)."""
    m = space.ambient_dim
    g = rng.standard_normal((batch, n, m))
    if space.kind == "hyperbolic":
        g[..., 0] = 0.0
    g /= np.linalg.norm(g, axis=-1, keepdims=True)
    return g


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--batch", type=int, default=10000,
                        help="direction tuples per endpoint evaluation")
    parser.add_argument("--n", type=int, default=4,
                        help="segments per direction tuple")
    parser.add_argument("--walkers", type=int, default=256,
                        help="simultaneous walks for the stepping kernel")
    parser.add_argument("--steps", type=int, default=200,
                        help="steps per walk")
    parser.add_argument("--r", type=float, default=1.0, help="step length")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats (minimum is reported)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = _core.available_backends()
    if "cython" not in backends:
        print("compiled backend is not built; nothing to compare "
              "(reinstall the package to build it)", file=sys.stderr)
        return 1
    py, cy = backends["python"], backends["cython"]
    rng = np.random.default_rng(args.seed)

    print(f"phi_endpoints: batch={args.batch} n={args.n} r={args.r}")
    print(f"{'case':<16} {'python':>10} {'cython':>10} {'speedup':>8}")
    for label, space in SPACES:
        dirs = tangent_batch(space, rng, args.batch, args.n)
        x = space.origin().coords
        tp = best_of(args.repeats, _core.phi_endpoints, space, x, dirs,
                     args.r, impl=py)
        tc = best_of(args.repeats, _core.phi_endpoints, space, x, dirs,
                     args.r, impl=cy)
        print(f"{label:<16} {tp * 1e3:>8.2f}ms {tc * 1e3:>8.2f}ms "
              f"{tp / tc:>7.1f}x")

    print()
    print(f"walk_points: walkers={args.walkers} steps={args.steps} r={args.r}")
    print(f"{'case':<16} {'python':>10} {'cython':>10} {'speedup':>8}")
    for label, space in SPACES:
        m = space.ambient_dim
        draws = rng.standard_normal((args.walkers, args.steps, m))
        x = space.origin().coords
        tp = best_of(args.repeats, _core.walk_points, space, x, draws,
                     args.r, impl=py)
        tc = best_of(args.repeats, _core.walk_points, space, x, draws,
                     args.r, impl=cy)
        print(f"{label:<16} {tp * 1e3:>8.2f}ms {tc * 1e3:>8.2f}ms "
              f"{tp / tc:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(run())
