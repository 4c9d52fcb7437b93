"""Compare the compiled and pure-Python kernel backends.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Kernel timings call both backends in-process. The end-to-end timing runs
``apply_grid`` in a subprocess per backend, since the backend is fixed at
import time (``BDS_PURE_PYTHON=1`` forces the fallback).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from bds import kernels

END_TO_END = """
import time
from bds import ShapeParams, apply_grid, get_function, kernels
xs = [0.1 * i for i in range(1, 41)]
p, f = ShapeParams.of(256, 1, 1, 2), get_function("exp_neg")
apply_grid(p, f, xs[:2])
t0 = time.perf_counter()
for _ in range({repeat}):
    apply_grid(p, f, xs)
print(kernels.BACKEND, (time.perf_counter() - t0) / {repeat})
"""


def _best(stmt, repeat):
    return min(timeit.repeat(stmt, number=1, repeat=repeat))


def kernel_timings(repeat):
    ks = np.arange(1, 2049, dtype=np.int64)
    rows = []
    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    for name in backends:
        be = kernels.get_backend(name)
        rows.append((name, "log_nb_terms k<=20000", _best(lambda: be.log_nb_terms(64.0, 3.0, 0, 20000), repeat)))
        rows.append((name, "beta_rule 2048 k, level 2", _best(lambda: be.beta_rule(ks, 64.0, 1.0, 2), repeat)))
    return rows


def end_to_end(repeat):
    out = []
    for pure in ("0", "1"):
        env = {**os.environ, "BDS_PURE_PYTHON": pure}
        proc = subprocess.run([sys.executable, "-c", END_TO_END.format(repeat=repeat)],
                              capture_output=True, text=True, env=env, check=True)
        name, secs = proc.stdout.split()
        out.append((name, "apply_grid exp(-t), n=256, 40 x", float(secs)))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rows = kernel_timings(args.repeat) + end_to_end(args.repeat)
    print(f"{'backend':8s}  {'case':34s}  {'seconds':>10s}")
    for name, case, secs in rows:
        print(f"{name:8s}  {case:34s}  {secs:10.5f}")
    by_case = {}
    for name, case, secs in rows:
        by_case.setdefault(case, {})[name] = secs
    for case, t in by_case.items():
        if "python" in t and "cython" in t:
            print(f"speedup {case}: {t['python'] / t['cython']:.2f}x")


if __name__ == "__main__":
    main()
