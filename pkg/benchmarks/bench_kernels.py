"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--n 1000] [--repeat 5]

Times each kernel on a period-sized batch, then a full simulation per
protocol with the backend swapped in.
"""

import argparse
import time

import numpy as np

from kprsim import engine, kernels
from kprsim.config import SimConfig
from kprsim.experiments import standard_protocol
from kprsim.rng import RngStream


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(n, seed=0):
    rng = np.random.default_rng(seed)
    P = rng.random((n, n))
    P /= P.sum(axis=1, keepdims=True)
    stable = np.full(n, -1, dtype=np.int64)
    u = rng.random(n)
    choices = rng.integers(0, n, n).astype(np.int64)
    served = np.full(n, -1, dtype=np.int64)
    served[choices] = np.arange(n)
    ids = np.flatnonzero(served[choices] != np.arange(n)).astype(np.int64)
    own = choices[ids]
    g = max(1, n // 20)
    starts, lens = ids.copy(), np.full(ids.size, g + 1, dtype=np.int64)
    reported = (served < 0).astype(np.uint8)
    rows = P[ids]
    return {
        "sample_rows": lambda mod: mod.sample_rows(P, stable, u),
        "zero_known_rows": lambda mod: mod.zero_known_rows(rows.copy(), starts, lens, choices, own, False),
        "group_rows": lambda mod: mod.group_rows(rows.copy(), own, served, g, False),
        "info_rows": lambda mod: mod.info_rows(rows.copy(), own, reported, 0.05, False),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=1000)
    parser.add_argument("--periods", type=int, default=100)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    mods = {"python": kernels.backend_module("python")}
    try:
        mods["cython"] = kernels.backend_module("cython")
    except ImportError:
        print("compiled kernels not built; timing the numpy backend only")

    print(f"kernels, N={args.n}, best of {args.repeat} (ms)")
    print(f"{'kernel':<18}" + "".join(f"{m:>10}" for m in mods) + "   speedup")
    for name, call in kernel_cases(args.n).items():
        t = {m: best_of(lambda: call(mod), args.repeat) for m, mod in mods.items()}
        speed = f"{t['python'] / t['cython']:8.1f}x" if "cython" in t else ""
        print(f"{name:<18}" + "".join(f"{1e3 * v:10.2f}" for v in t.values()) + f"  {speed}")

    print(f"\nfull runs, N={args.n}, {args.periods} periods, variant 2 (s)")
    print(f"{'protocol':<18}" + "".join(f"{m:>10}" for m in mods) + "   speedup")
    names = ("sample_rows", "zero_known_rows", "group_rows", "info_rows")
    original = {name: getattr(kernels, name) for name in names}
    try:
        for kind in ("rp1", "rp2", "rp3", "rp4", "rp5", "rp6"):
            cfg = SimConfig(n=args.n, periods=args.periods, variant=2, protocol=standard_protocol(kind, args.n))
            t = {}
            for m, mod in mods.items():
                for name in names:
                    setattr(kernels, name, getattr(mod, name))
                t[m] = best_of(lambda: engine.run_simulation(cfg, RngStream(0)), max(1, args.repeat // 2))
            speed = f"{t['python'] / t['cython']:8.1f}x" if "cython" in t else ""
            print(f"{kind:<18}" + "".join(f"{v:10.3f}" for v in t.values()) + f"  {speed}")
    finally:
        for name, fn in original.items():
            setattr(kernels, name, fn)


if __name__ == "__main__":
    main()
