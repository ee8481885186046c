"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 3]

Each workload runs under both backends; outputs are compared before timing is
reported, so a speedup is only printed for kernels that agree.
"""
from __future__ import annotations

import argparse
import random
import time

from repolearn import kernels
from repolearn.cff import build_randomized_cff
from repolearn.generate import random_instance
from repolearn.model import closure_from_edges


def workloads():
    inst = random_instance(18, known=20, unknown=4, conflicts=3, defects=2, seed=1)
    req, conf, dm = list(inst.requirement_masks), list(inst.conflict_masks), inst.defect_mask
    rng = random.Random(2)
    masks = [rng.getrandbits(18) for _ in range(200_000)]
    family = build_randomized_cff(14, 2, 2, delta=0.01, seed=3)
    wide = random_instance(60, known=150, seed=4)
    rows = closure_from_edges(60, wide.known_deps).rows
    vectors = [rng.getrandbits(60) for _ in range(50_000)]
    return {
        "enumerate_successful n=18": lambda: kernels.enumerate_successful(18, req, conf, dm),
        "evaluate_many 200k masks": lambda: kernels.evaluate_many(18, masks, req, conf, dm),
        "success_profiles 200k masks": lambda: kernels.success_profiles(18, masks),
        "propagate_many n=60, 50k": lambda: kernels.propagate_many(60, vectors, rows),
        "first_uncovered (14,2,2)": lambda: kernels.first_uncovered(14, family.vectors, 2, 2),
    }


def best_of(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if not kernels.COMPILED_AVAILABLE:
        print("compiled kernels are not built; only the Python backend is available")
        return
    print(f"{'kernel':32} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for name, fn in workloads().items():
        with kernels.use_backend("python"):
            slow, a = best_of(fn, args.repeat)
        with kernels.use_backend("cython"):
            fast, b = best_of(fn, args.repeat)
        if a != b:
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:32} {slow:10.4f} {fast:10.4f} {slow / fast:7.1f}x")


if __name__ == "__main__":
    main()
