"""Compare the compiled and numpy kernel backends on representative workloads.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from kkweyl import _backend
from kkweyl.conformal import cotton, weyl
from kkweyl.curvature import build_frame
from kkweyl.jets import JetSpace
from kkweyl.solutions import load_fixture
from kkweyl.tensors import jeinsum


def _workloads():
    rng = np.random.default_rng(0)
    sp = JetSpace(4, 4)
    a, b = rng.standard_normal((64, sp.ncoef)), rng.standard_normal((64, sp.ncoef))
    sp3 = JetSpace(3, 3)
    m, v = rng.standard_normal((3, 3, 3, sp3.ncoef)), rng.standard_normal((3, 3, sp3.ncoef))
    generic4 = load_fixture("generic4").metric
    sol_b = load_fixture("solution_b").metric
    return {
        "jet mul (64 jets, dim 4, order 4)": lambda: sp.mul(a, b),
        "jet contraction (3x3x3 by 3x3, order 3)": lambda: jeinsum("abc,cd->abd", m, v, 3),
        "4D Weyl frame (order 2)": lambda: weyl(build_frame(generic4, (0.1, 0.2, -0.1, 0.05), 2)),
        "3D Cotton frame (order 3)": lambda: cotton(build_frame(sol_b, (0.1, 1.3, 0.4), 3)),
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = ["python"] + (["cython"] if _backend.compiled_kernels is not None else [])
    if len(backends) == 1:
        print("compiled kernels unavailable; timing the numpy backend only")
    original = _backend.BACKEND
    print(f"{'workload':44s}" + "".join(f"{b:>14s}" for b in backends) + ("     speed-up" if len(backends) == 2 else ""))
    for name, fn in _workloads().items():
        times = []
        for backend in backends:
            _backend.use(backend)
            fn()  # warm caches
            number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-6)))
            best = min(timeit.repeat(fn, number=number, repeat=args.repeat)) / number
            times.append(best)
        row = f"{name:44s}" + "".join(f"{t * 1e3:11.3f} ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:12.1f}x"
        print(row)
    _backend.use(original)


if __name__ == "__main__":
    main()
