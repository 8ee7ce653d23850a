"""Time the alignment kernels under the numba and the pure-numpy backend.

    python benchmarks/bench_kernels.py [--sizes 1000 4000 20000] [--vocab 50]

Each backend runs in its own interpreter because the backend is fixed at
import time by SUBCORPUS_DISABLE_NUMBA.
"""
import argparse
import json
import os
import subprocess
import sys
import time

_CHILD = r"""
import json, sys, time
import numpy as np
from subcorpus import align, kernels, backend_name
sizes, vocab, lev_max = json.loads(sys.argv[1])
rng = np.random.default_rng(0)
# warm up (numba compilation)
align.local_align(["a", "b", "c"], ["b", "c"])
kernels.levenshtein_ids(np.arange(3), np.arange(2))
rows = []
for n in sizes:
    a = [str(x) for x in rng.integers(0, vocab, n)]
    b = list(a)
    for i in rng.choice(n, n // 10, replace=False):
        b[i] = str(vocab + i)
    t = time.perf_counter()
    res = align.local_align(a, b)
    sw = time.perf_counter() - t
    lev = None
    if n <= lev_max:
        x, y = kernels.encode_pair(a, b)
        t = time.perf_counter()
        kernels.levenshtein_ids(x, y)
        lev = time.perf_counter() - t
    rows.append({"n": n, "sw_s": sw, "lev_s": lev, "score": res.score})
print(json.dumps({"backend": backend_name(), "rows": rows}))
"""


def run_backend(disable, sizes, vocab, lev_max):
    env = dict(os.environ)
    env["SUBCORPUS_DISABLE_NUMBA"] = "1" if disable else "0"
    out = subprocess.run([sys.executable, "-c", _CHILD, json.dumps([sizes, vocab, lev_max])],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 4000, 20000])
    ap.add_argument("--vocab", type=int, default=50)
    ap.add_argument("--lev-max", type=int, default=4000)
    ap.add_argument("--numpy-max", type=int, default=4000,
                    help="largest size run under the numpy backend")
    args = ap.parse_args(argv)
    t0 = time.perf_counter()
    fast = run_backend(False, args.sizes, args.vocab, args.lev_max)
    slow = run_backend(True, [n for n in args.sizes if n <= args.numpy_max], args.vocab, args.lev_max)
    slow_by_n = {r["n"]: r for r in slow["rows"]}
    print(f"{'n':>7} {'sw ' + fast['backend']:>12} {'sw ' + slow['backend']:>12} {'lev ' + fast['backend']:>12} "
          f"{'lev ' + slow['backend']:>12}")

    def fmt(x):
        return f"{x:12.3f}" if x is not None else f"{'-':>12}"

    for r in fast["rows"]:
        s = slow_by_n.get(r["n"], {})
        if s and s["score"] != r["score"]:
            raise SystemExit(f"backends disagree at n={r['n']}: {r['score']} vs {s['score']}")
        print(f"{r['n']:>7} {fmt(r['sw_s'])} {fmt(s.get('sw_s'))} {fmt(r['lev_s'])} {fmt(s.get('lev_s'))}")
    print(f"total wall time {time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
