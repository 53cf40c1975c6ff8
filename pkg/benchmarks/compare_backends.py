#!/usr/bin/env python3
"""Time the Rips generation kernels compiled vs. interpreted.

Runs the same generation twice in subprocesses, once with numba enabled and
once with HOROFORGE_NO_NUMBA=1, and reports wall times plus the doubling
ratios that matter for the linearithmic claim.

Usage: python benchmarks/compare_backends.py [--cycle 7] [--max-suffix 8]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
from horoforge.graphdef import DefiningGraph
from horoforge.machines import MachineBundle
from horoforge.rays import Ray
from horoforge.rips import generate_rips_graph
from horoforge import _kernels

n, max_suffix = int(sys.argv[1]), int(sys.argv[2])
names = [chr(ord('a') + i) for i in range(n)]
g = DefiningGraph.from_edges(names, [(names[i], names[(i + 1) % n]) for i in range(n)])
ray = Ray(*g.letters_named('a', 'c')).validate(g)
bundle = MachineBundle(g, ray)
generate_rips_graph(g, ray, 0, min(3, max_suffix), bundle=bundle)  # warm-up / compile
total = sum(bundle.suffix.count_language(max_suffix))
sizes = [total // 4, total // 2, total]
rows = []
for budget in sizes:
    t0 = time.time()
    h = generate_rips_graph(g, ray, 0, max_suffix, bundle=bundle, max_vertices=budget)
    rows.append({"vertices": h.vertex_count, "edges": h.edge_count, "seconds": time.time() - t0})
print(json.dumps({"backend": "numba" if _kernels.numba_enabled() else "python", "rows": rows}))
"""


def run(env_extra: dict[str, str], cycle: int, max_suffix: int) -> dict:
    env = dict(os.environ, **env_extra)
    out = subprocess.run(
        [sys.executable, "-c", WORKER, str(cycle), str(max_suffix)],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--cycle", type=int, default=7, help="cycle length of the defining graph")
    ap.add_argument("--max-suffix", type=int, default=8)
    args = ap.parse_args()

    results = [
        run({}, args.cycle, args.max_suffix),
        run({"HOROFORGE_NO_NUMBA": "1"}, args.cycle, args.max_suffix),
    ]
    for res in results:
        rows = res["rows"]
        print(f"backend: {res['backend']}")
        for row in rows:
            print(f"  {row['vertices']:>9} vertices  {row['edges']:>9} edges  {row['seconds']:8.2f}s")
        ratios = [rows[i + 1]["seconds"] / rows[i]["seconds"] for i in range(len(rows) - 1)]
        print("  doubling ratios: " + ", ".join(f"{r:.2f}" for r in ratios))
    if results[0]["backend"] == results[1]["backend"]:
        print("note: numba unavailable, both runs interpreted")
    else:
        speedup = results[1]["rows"][-1]["seconds"] / results[0]["rows"][-1]["seconds"]
        print(f"compiled path speedup at full size: {speedup:.1f}x")
    edges_match = [r["edges"] for r in results[0]["rows"]] == [r["edges"] for r in results[1]["rows"]]
    print(f"edge counts identical across backends: {edges_match}")
    return 0 if edges_match else 1


if __name__ == "__main__":
    sys.exit(main())
