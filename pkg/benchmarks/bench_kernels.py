"""Time the compiled and pure-Python kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from spreadlab import kernels


def cases(rng: np.random.Generator) -> dict[str, tuple]:
    masks = rng.integers(0, 1 << 40, size=2000).astype(np.uint64)
    gens = rng.integers(1, 1 << 20, size=12).astype(np.uint64)
    return {
        "popcount[100k]": ("popcount", (rng.integers(0, 1 << 62, size=100_000).astype(np.uint64),)),
        "first_subset_index[2000]": ("first_subset_index", (masks,)),
        "upset_profile[n=20,k=12]": ("upset_profile", (gens, 20)),
        "union_profile[n=20,k=12]": ("union_profile", (gens, 20)),
        "axial3_dp[n=8]": ("axial3_dp", (rng.exponential(size=(8, 8, 8)),)),
        "hungarian[n=200]": ("hungarian", (rng.exponential(size=(200, 200)),)),
    }


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    backends = kernels.backends()
    names = sorted(backends)
    print(f"{'kernel':28s}" + "".join(f"{b:>14s}" for b in names) + ("   speedup" if len(names) > 1 else ""))
    for label, (fn, fargs) in cases(np.random.default_rng(args.seed)).items():
        best = {}
        for b in names:
            f = getattr(backends[b], fn)
            best[b] = min(timeit.repeat(lambda: f(*fargs), number=1, repeat=args.repeat))
        row = f"{label:28s}" + "".join(f"{best[b] * 1e3:12.3f}ms" for b in names)
        if "cython" in best:
            row += f"   {best['python'] / best['cython']:7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
