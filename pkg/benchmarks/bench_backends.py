"""Compare the compiled and numpy backends on the hot kernels.

    python3 benchmarks/bench_backends.py [--quick] [--json PATH]

Reports seconds per CRP draw at several n and the time of a direct sparse
convolution, and checks that both backends return identical output.
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from ewens_moments import backend


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_crp(names, sizes, draws, repeat):
    rows = []
    for n, count in zip(sizes, draws):
        outs = {}
        for name in names:
            impl = backend.get_backend(name)
            sec = _time(lambda: impl.crp_cycle_lengths(n, 1.0, 7, 0, count), repeat)
            outs[name] = impl.crp_cycle_lengths(n, 1.0, 7, 0, count)
            rows.append({"kernel": "crp", "backend": name, "n": n, "draws": count,
                         "seconds_per_draw": sec / count})
        ref = outs[names[0]]
        same = all(np.array_equal(o[0], ref[0]) and np.array_equal(o[1], ref[1])
                   for o in outs.values())
        rows.append({"kernel": "crp", "n": n, "identical": same})
    return rows


def bench_convolve(names, sizes, repeat):
    rows = []
    rng = np.random.default_rng(0)
    for n in sizes:
        v = np.where(rng.random(n) < 0.3, rng.random(n), 0.0)
        g = rng.random(n)
        idx = np.flatnonzero(v).astype(np.int64)
        vals = np.ascontiguousarray(v[idx])
        outs = {}
        for name in names:
            impl = backend.get_backend(name)
            sec = _time(lambda: impl.causal_convolve(idx, vals, g, n), repeat)
            outs[name] = impl.causal_convolve(idx, vals, g, n)
            rows.append({"kernel": "causal_convolve", "backend": name, "n": n, "seconds": sec})
        ref = outs[names[0]]
        err = max(float(np.max(np.abs(o - ref))) for o in outs.values())
        rows.append({"kernel": "causal_convolve", "n": n, "max_abs_diff": err})
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="small sizes only")
    ap.add_argument("--json", help="write raw rows to this path")
    args = ap.parse_args(argv)
    names = sorted(backend.available_backends(), key=lambda s: s != "cython")
    if args.quick:
        crp_sizes, crp_draws, conv_sizes, repeat = [100, 1000], [200, 50], [2000], 1
    else:
        crp_sizes, crp_draws, conv_sizes, repeat = [100, 10_000, 100_000], [2000, 100, 20], \
            [5000, 20000], 3
    rows = bench_crp(names, crp_sizes, crp_draws, repeat) + bench_convolve(names, conv_sizes, repeat)
    for r in rows:
        print(" ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in r.items()))
    if "cython" in names and "python" in names:
        for n in crp_sizes:
            c = next(r for r in rows if r.get("backend") == "cython" and r["n"] == n
                     and r["kernel"] == "crp")
            p = next(r for r in rows if r.get("backend") == "python" and r["n"] == n
                     and r["kernel"] == "crp")
            print(f"crp n={n}: compiled speedup x{p['seconds_per_draw'] / c['seconds_per_draw']:.1f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
