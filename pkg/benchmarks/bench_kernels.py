"""Compiled vs numpy kernels: timing and agreement.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json]
"""
from __future__ import annotations

import argparse
import json
import timeit

import numpy as np

from superosc import _pykernels as py

try:
    from superosc import _ckernels as cy
except ImportError:  # extension not built
    cy = None


def _cases(rng):
    for m in (1_000, 100_000):
        v = rng.normal(size=m) * 10.0 ** rng.integers(-8, 8, size=m)
        yield "neumaier_sum", m, (v,)
    for m in (201, 2_001):
        c = rng.normal(size=m)
        e = rng.normal(size=m) * 0.1 + 1j * rng.uniform(-50, 50, size=m)
        yield "cexpsum", m, (c, e)
    for m, npts in ((51, 1_000), (201, 1_000)):
        w = rng.normal(size=m) + 1j * rng.normal(size=m)
        f = np.linspace(-1, 1, m)
        xs = np.linspace(-10, 10, npts)
        yield "expsum_grid", m * npts, (w, f, xs)


def run(repeat: int) -> list[dict]:
    rng = np.random.default_rng(0)
    rows = []
    for name, size, args in _cases(rng):
        row = {"kernel": name, "size": size}
        fpy = getattr(py, name)
        row["python_s"] = min(timeit.repeat(lambda: fpy(*args), number=1, repeat=repeat))
        if cy is not None:
            fcy = getattr(cy, name)
            row["cython_s"] = min(timeit.repeat(lambda: fcy(*args), number=1, repeat=repeat))
            row["speedup"] = row["python_s"] / row["cython_s"]
            a, b = np.asarray(fpy(*args)), np.asarray(fcy(*args))
            row["max_abs_diff"] = float(np.max(np.abs(a - b)))
        rows.append(row)
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    rows = run(args.repeat)
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    if cy is None:
        print("compiled extension unavailable; timing the fallback only")
    print(f"{'kernel':<14}{'size':>10}{'python [s]':>13}{'cython [s]':>13}{'speedup':>9}{'max diff':>11}")
    for r in rows:
        print(f"{r['kernel']:<14}{r['size']:>10}{r['python_s']:>13.2e}"
              f"{r.get('cython_s', float('nan')):>13.2e}{r.get('speedup', float('nan')):>9.1f}"
              f"{r.get('max_abs_diff', float('nan')):>11.1e}")


if __name__ == "__main__":
    main()
