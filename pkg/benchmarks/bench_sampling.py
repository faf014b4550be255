"""Compiled vs numpy sampling kernels, and worker scaling of sample_batch.

    python3 benchmarks/bench_sampling.py [--count N] [--repeat R]
"""

import argparse
import time

import numpy as np

from ptrmt.core import Bounded, Unbounded
from ptrmt.sampling import sample_batch


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--workers", type=int, nargs="*", default=[1, 2, 4, 8])
    args = ap.parse_args(argv)

    try:
        from ptrmt import _kernels  # noqa: F401
        backends = ["python", "compiled"]
    except ImportError:
        print("compiled kernels not built; timing the numpy fallback only")
        backends = ["python"]

    specs = {
        "unbounded(1,0,1)": Unbounded(1.0, (1, 0, 1)),
        "unbounded(0,0,0)": Unbounded(1.0, (0, 0, 0)),
        "bounded(0.5,1.5,0.25)": Bounded((0.5, 1.5, 0.25)),
    }
    print(f"{'spec':<24}{'backend':<10}{'seconds':>10}{'Mdraws/s':>10}")
    for name, spec in specs.items():
        ref = None
        for backend in backends:
            t = best_of(lambda: sample_batch(spec, args.count, seed=1, backend=backend), args.repeat)
            print(f"{name:<24}{backend:<10}{t:>10.3f}{args.count / t / 1e6:>10.2f}")
            params = sample_batch(spec, 10_000, seed=1, backend=backend).params
            if ref is None:
                ref = params
            else:
                print(f"{'':<24}max rel diff vs python: {np.max(np.abs(params - ref) / np.abs(ref)):.2e}")

    spec = specs["unbounded(1,0,1)"]
    print(f"\nworker scaling, default backend, count={args.count}")
    base = None
    for w in args.workers:
        t = best_of(lambda: sample_batch(spec, args.count, seed=1, workers=w), args.repeat)
        base = base or t
        print(f"  workers={w:<3} {t:8.3f}s  speedup {base / t:5.2f}")


if __name__ == "__main__":
    main()
