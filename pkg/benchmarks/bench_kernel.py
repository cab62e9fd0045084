"""Compiled vs numpy evaluation of the jet program (metric to order 4, fields to order 2).

    python benchmarks/bench_kernel.py [--points 2000] [--repeat 5] [catalog ...]

Points are the catalog's sample points with small random offsets, so every
expression stays inside its domain.
"""

from __future__ import annotations

import argparse
import sys
import timeit

import numpy as np

from codazzi import catalog, kernels

DEFAULT = ["s2xs2", "warped4d", "bump4d", "gauged_exp"]


def sample(manifest, count: int, rng) -> np.ndarray:
    base = np.asarray(list(manifest.points.values()))
    picks = base[rng.integers(0, len(base), count)]
    return np.ascontiguousarray(picks + rng.uniform(-1e-3, 1e-3, picks.shape))


def bench(name: str, count: int, repeat: int, seed: int = 0) -> dict:
    m = catalog.catalog_load(name)
    program = m.manifold._plan.program
    pts = sample(m, count, np.random.default_rng(seed))
    row = {"catalog": name, "instructions": len(program), "outputs": len(program.outputs), "points": count}
    results = {}
    for backend in kernels.available_backends():
        results[backend] = program.run(pts, backend=backend)
        t = min(timeit.repeat(lambda: program.run(pts, backend=backend), number=1, repeat=repeat))
        row[backend] = t
    if "compiled" in results:
        a, b = results["compiled"], results["python"]
        row["max_rel_diff"] = float(np.max(np.abs(a - b) / (1.0 + np.abs(b))))
        row["speedup"] = row["python"] / row["compiled"]
    return row


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("catalogs", nargs="*", default=DEFAULT)
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}; {args.points} points, best of {args.repeat}")
    head = f"{'catalog':<12} {'instr':>6} {'outputs':>7}" + "".join(f" {b + ' s':>11}" for b in backends)
    if "compiled" in backends:
        head += f" {'speedup':>8} {'max rel diff':>13}"
    print(head)
    for name in args.catalogs:
        r = bench(name, args.points, args.repeat)
        line = f"{name:<12} {r['instructions']:>6} {r['outputs']:>7}" + "".join(f" {r[b]:>11.4f}" for b in backends)
        if "compiled" in backends:
            line += f" {r['speedup']:>7.1f}x {r['max_rel_diff']:>13.1e}"
        print(line)
    if "compiled" not in backends:
        print("compiled extension not built; only the numpy backend was timed", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
