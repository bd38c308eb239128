"""Benchmark: stiffness assembly with jitted kernels vs the pure-numpy path.

The kernel path is selected at import time by FRACFEM_PURE_NUMPY, so each
variant runs in a fresh interpreter. Usage:

    python benchmarks/bench_assembly.py [--sizes 16,32,64] [--repeats 3]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

SNIPPET = """
import json, time
from fracfem.mesh import build_uniform_mesh
from fracfem.weight import make_weight
from fracfem.basis import make_space
from fracfem.assembly import assemble_stiffness
from fracfem import _kernels

sizes = {sizes}
repeats = {repeats}

# warm-up (jit compilation / cache load)
sp = make_space(build_uniform_mesh(-1.0, 1.0, 4), make_weight("poly4", -1.0, 1.0), 0.4)
t0 = time.perf_counter()
assemble_stiffness(sp)
warm = time.perf_counter() - t0

rows = []
for n in sizes:
    sp = make_space(build_uniform_mesh(-1.0, 1.0, n), make_weight("poly4", -1.0, 1.0), 0.4)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        assemble_stiffness(sp)
        best = min(best, time.perf_counter() - t0)
    rows.append((n, best))
print(json.dumps({{"pure": _kernels.PURE_NUMPY, "warmup_s": warm, "rows": rows}}))
"""


def run_variant(pure: bool, sizes, repeats) -> dict:
    env = dict(os.environ)
    env["FRACFEM_PURE_NUMPY"] = "1" if pure else "0"
    code = SNIPPET.format(sizes=list(sizes), repeats=repeats)
    proc = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True
    )
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="16,32,64", help="comma-separated element counts")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    sizes = [int(t) for t in args.sizes.split(",")]

    jit = run_variant(False, sizes, args.repeats)
    pure = run_variant(True, sizes, args.repeats)
    if jit["pure"]:
        print("note: numba unavailable; both columns ran the pure path")

    print(f"{'elements':>9} {'jit [s]':>12} {'pure numpy [s]':>15} {'speedup':>8}")
    for (n, tj), (_, tp) in zip(jit["rows"], pure["rows"]):
        print(f"{n:>9} {tj:>12.4f} {tp:>15.4f} {tp / tj:>8.1f}x")
    print(f"(one-time jit warm-up: {jit['warmup_s']:.2f}s, cached on disk afterwards)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
