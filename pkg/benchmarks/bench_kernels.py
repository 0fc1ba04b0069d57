"""Time the compiled kernels against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Both backends are imported directly, so the comparison does not depend on
``SCHRODECAY_PURE``.  Inputs are typical of a production realization
(box length 2000 at grid step 0.0175, a 32-path Pruefer batch).
"""
import argparse
import json
import math
import sys
import timeit

import numpy as np

from schrodecay import _pykernels

try:
    from schrodecay import _ckernels
except ImportError:
    _ckernels = None


def cases(rng):
    m = 114_285
    h = 2000.0 / (m + 1)
    q = rng.normal(0.0, 0.1, m)
    energies = np.linspace(0.9, 1.1, 64)
    rhs = rng.standard_normal(m)
    n_steps = 40_000
    qn = rng.normal(0.0, 0.1, (32, n_steps + 1))
    qm = rng.normal(0.0, 0.1, (32, n_steps))
    kappa = np.full(32, 1.0)
    record = np.array([n_steps // 4, n_steps], dtype=np.intp)
    return {
        "sturm_count (m=114285, 64 energies)": ("sturm_count", (q, h, energies)),
        "shifted_solve (m=114285)": ("shifted_solve", (q, h, 1.0, rhs)),
        "prufer_batch (32 paths, 40000 steps)": ("prufer_batch", (qn, qm, 0.05, kappa, record)),
    }


def best_of(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--json", default=None)
    args = p.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not available; rebuild with pip install -e .", file=sys.stderr)
        return 1
    rows = []
    for label, (name, fargs) in cases(np.random.default_rng(0)).items():
        tc = best_of(getattr(_ckernels, name), fargs, args.repeat)
        tp = best_of(getattr(_pykernels, name), fargs, args.repeat)
        rows.append({"kernel": label, "cython_s": tc, "python_s": tp, "speedup": tp / tc})
    width = max(len(r["kernel"]) for r in rows)
    print(f"{'kernel':<{width}}  {'cython [s]':>11}  {'python [s]':>11}  {'speedup':>8}")
    for r in rows:
        print(f"{r['kernel']:<{width}}  {r['cython_s']:11.4f}  {r['python_s']:11.4f}  "
              f"{r['speedup']:7.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0 if all(math.isfinite(r["speedup"]) for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
