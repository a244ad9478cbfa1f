"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per workload with the best wall time of each backend and
the speedup.  Both backends must produce the same arrays; the script checks
that before timing.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from mdsrel import _kernels_py, kernels
from mdsrel.inner_code import InnerCode, build_outcome_table
from mdsrel.sequencing import sample_dirichlet


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads():
    table = build_outcome_table(InnerCode(49, 45, 8), 0.01, 60)
    rng = np.random.default_rng(0)
    for N in (1_000, 10_526):
        probs = sample_dirichlet(N, 3.0, 2024)
        counts = np.bincount(rng.poisson(6.0 * N * probs))
        reads = np.nonzero(counts)[0]
        args = (table.alpha[reads], table.beta[reads], table.gamma[reads], counts[reads])
        yield f"score_dp   N={N:>6}", lambda impl, a=args: kernels.score_dp(*a, impl=impl)
    for N in (500, 2_000):
        mu = 4.0 * N * sample_dirichlet(N, 3.0, 7)
        q0 = np.exp(-mu)
        qr = np.exp(-mu) * (mu + mu ** 2 / 2)
        yield f"joint_dp   N={N:>6}", lambda impl, a=(q0, qr): kernels.joint_dp(*a, impl=impl)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if kernels.BACKEND != "cython":
        print("compiled extension not available; only the fallback can be timed")
    compiled = kernels._impl
    print(f"{'workload':<20} {'cython [s]':>11} {'python [s]':>11} {'speedup':>8}")
    for name, run in workloads():
        fast, slow = run(compiled), run(_kernels_py)
        for x, y in zip(fast, slow):
            np.testing.assert_allclose(x, y, rtol=0, atol=1e-13)
        t_fast = best_of(lambda: run(compiled), args.repeat)
        t_slow = best_of(lambda: run(_kernels_py), args.repeat)
        print(f"{name:<20} {t_fast:>11.4f} {t_slow:>11.4f} {t_slow / t_fast:>7.1f}x")


if __name__ == "__main__":
    main()
