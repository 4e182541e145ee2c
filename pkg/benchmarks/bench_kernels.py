"""Time the mod-p elimination backends on random dense matrices.

    python3 benchmarks/bench_kernels.py [--size 400] [--prime 2] [--repeat 3]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from bwengine import kernels


def bench(backend: str, a: np.ndarray, p: int, repeat: int) -> float:
    kernels.rref_mod_p(a[:8, :8], p, backend=backend)   # warm up the jit
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        kernels.rref_mod_p(a, p, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=400)
    ap.add_argument("--prime", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    a = np.random.default_rng(args.seed).integers(0, args.prime, size=(args.size, args.size + 17))
    backends = ["numpy"] + (["numba"] if kernels.HAS_NUMBA else [])
    for b in backends:
        print(f"{b:6s} {args.size}x{args.size + 17} mod {args.prime}: {bench(b, a, args.prime, args.repeat):.4f}s")


if __name__ == "__main__":
    main()
