"""Benchmark the mod-p linear-algebra kernels: numba JIT vs pure numpy.

Runs the same workload (RREF, rank, nullspace over F_p) through both
backends and reports wall times.  The backend is chosen by the
CARTIER_LAB_NO_NUMBA environment variable, so each side runs in a
subprocess with a fresh import.

Usage: python3 benchmarks/bench_kernels.py [--size 120] [--repeat 20]
"""

import argparse
import json
import os
import subprocess
import sys
import time

_WORKER = """
import json, os, sys, time
import numpy as np
from cartier_lab import kernels

size = int(sys.argv[1])
repeat = int(sys.argv[2])
p = 3
rng = np.random.default_rng(12345)
mats = [rng.integers(0, p, size=(size, size)).astype(np.int64)
        for _ in range(repeat)]

# warm up (JIT compilation time excluded from the measurement)
kernels.rref_mod_p(mats[0].copy(), p)
kernels.nullspace_mod_p(mats[0].copy(), p)

t0 = time.perf_counter()
acc = 0
for m in mats:
    r, piv = kernels.rref_mod_p(m.copy(), p)
    acc += len(piv)
    ns = kernels.nullspace_mod_p(m.copy(), p)
    acc += ns.shape[0]
elapsed = time.perf_counter() - t0
print(json.dumps({"backend": kernels.backend(), "seconds": elapsed,
                  "checksum": int(acc)}))
"""


def run_backend(no_numba, size, repeat):
    env = dict(os.environ)
    if no_numba:
        env["CARTIER_LAB_NO_NUMBA"] = "1"
    else:
        env.pop("CARTIER_LAB_NO_NUMBA", None)
    out = subprocess.run(
        [sys.executable, "-c", _WORKER, str(size), str(repeat)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--size", type=int, default=120)
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()

    numpy_res = run_backend(True, args.size, args.repeat)
    numba_res = run_backend(False, args.size, args.repeat)

    if numpy_res["checksum"] != numba_res["checksum"]:
        print("BACKENDS DISAGREE", numpy_res, numba_res)
        return 1

    print(f"matrix size {args.size}x{args.size}, {args.repeat} rounds, F_3")
    for res in (numpy_res, numba_res):
        print(f"  {res['backend']:>6}: {res['seconds']:.3f} s")
    if numba_res["seconds"] > 0:
        speedup = numpy_res["seconds"] / numba_res["seconds"]
        print(f"  speedup: {speedup:.1f}x (checksum {numba_res['checksum']})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
