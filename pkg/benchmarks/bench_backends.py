"""Timing comparison of the numba and numpy evaluation backends.

The backend is chosen at import time through the MVK_BACKEND environment
variable, so each backend is timed in its own subprocess and the parent
process prints the comparison table.

Usage::

    python benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import json
import os
import subprocess
import sys
import time


SIZES = [(50, 50, 1), (200, 200, 2), (400, 400, 2), (1000, 400, 3)]


def time_call(fn, repeats):
    fn()  # warm-up (numba JIT compilation, cache loading)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def worker(repeats):
    import numpy as np

    from mvk import backends

    rng = np.random.default_rng(0)
    results = {"backend": backends.backend_name(), "timings": []}
    for n, q, d in SIZES:
        X = rng.standard_normal((n, d))
        Y = rng.standard_normal((q, d))
        g = time_call(lambda: backends.gaussian_cross(X, Y, 1.5), repeats)
        p = time_call(lambda: backends.polynomial_cross(X, Y, 3), repeats)
        results["timings"].append(
            {"n": n, "q": q, "d": d, "gaussian": g, "polynomial": p}
        )
    json.dump(results, sys.stdout)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=7)
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.worker:
        worker(args.repeats)
        return

    results = {}
    for backend in ("numpy", "numba"):
        env = dict(os.environ, MVK_BACKEND=backend)
        out = subprocess.run(
            [sys.executable, __file__, "--worker", "--repeats", str(args.repeats)],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        data = json.loads(out.stdout)
        results[backend] = data
        if data["backend"] != backend:
            print(f"note: requested {backend}, got {data['backend']} "
                  "(numba unavailable)")

    print(f"{'size':>16} {'kernel':>12} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for i, (n, q, d) in enumerate(SIZES):
        for kind in ("gaussian", "polynomial"):
            t_np = results["numpy"]["timings"][i][kind]
            t_nb = results["numba"]["timings"][i][kind]
            print(
                f"{f'{n}x{q} d={d}':>16} {kind:>12} "
                f"{t_np * 1e3:>8.3f}ms {t_nb * 1e3:>8.3f}ms "
                f"{t_np / t_nb:>7.2f}x"
            )


if __name__ == "__main__":
    main()
