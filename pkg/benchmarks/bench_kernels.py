"""Time the numba kernels against the pure-numpy fallback.

Each backend computes the same full level-1 and level-2 characters; the script
checks that both agree and prints one line per workload with the median of
``--repeat`` runs.  Usage: ``python benchmarks/bench_kernels.py [--repeat 3]``.
"""

from __future__ import annotations

import argparse
import os
import statistics
import time

from demachar import characters as C
from demachar.rootsys import RankedType, Weight, build_root_system

WORKLOADS = [
    ("D", 4, 2, (3, 2, 3, 3)),
    ("D", 5, 2, (2, 1, 2, 1, 2)),
    ("D", 6, 1, (1, 1, 1, 1, 1, 1)),
    ("D", 6, 2, (1, 1, 1, 1, 1, 1)),
    ("A", 5, 2, (2, 2, 2, 2, 2)),
]


def _time(backend: str, series: str, n: int, level: int, lam: tuple, repeat: int):
    os.environ["DEMACHAR_BACKEND"] = backend
    R = build_root_system(RankedType(series, n))
    times, result = [], None
    for _ in range(repeat):
        C.clear_engine_cache()
        t0 = time.perf_counter()
        result = C.demazure_char(R, level, Weight(lam))
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    saved = os.environ.get("DEMACHAR_BACKEND")
    _time("numba", "D", 4, 2, (1, 0, 0, 0), 1)  # compile the kernels outside the timed runs
    print(f"{'workload':<28}{'numba s':>10}{'numpy s':>10}{'speedup':>9}")
    try:
        for series, n, level, lam in WORKLOADS:
            t_nb, r_nb = _time("numba", series, n, level, lam, args.repeat)
            t_np, r_np = _time("numpy", series, n, level, lam, args.repeat)
            if r_nb != r_np:
                raise SystemExit(f"backends disagree on {series}{n} level {level} {lam}")
            name = f"{series}{n} l={level} {','.join(map(str, lam))}"
            print(f"{name:<28}{t_nb:>10.3f}{t_np:>10.3f}{t_np / t_nb:>8.1f}x")
    finally:
        if saved is None:
            os.environ.pop("DEMACHAR_BACKEND", None)
        else:
            os.environ["DEMACHAR_BACKEND"] = saved


if __name__ == "__main__":
    main()
