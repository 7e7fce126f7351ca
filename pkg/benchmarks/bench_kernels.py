"""Benchmark the compiled kernels against the pure-numpy fallback.

The backend is chosen once at import time, so each backend is timed in its
own subprocess (the fallback is forced with WEYL_LAB_PURE=1).  Both runs
use identical deterministic inputs; the child also reports a checksum of
its outputs so the parent can confirm the two implementations produced
bit-identical results before comparing their speed.

Usage: python benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import hashlib
import json
import os
import subprocess
import sys
import time

import numpy as np

MAXAVG_SIZES = (256, 1024, 4096)
CHAIN_CASES = ((4096, 256), (4096, 1024), (4096, 4096))  # (cells, terms)
SEED = 20260814


def _maxavg_input(n):
    rng = np.random.default_rng([SEED, n])
    return np.abs(rng.standard_normal(n))


def _chain_input(cells, terms):
    """In-order-style chain: term t acts on a random dyadic subinterval."""
    rng = np.random.default_rng([SEED, cells, terms])
    levels = rng.integers(0, cells.bit_length() - 1, size=terms)
    lo = np.empty(terms, dtype=np.intp)
    mid = np.empty(terms, dtype=np.intp)
    hi = np.empty(terms, dtype=np.intp)
    for t, lvl in enumerate(levels):
        width = cells >> lvl
        start = int(rng.integers(0, 1 << lvl)) * width
        lo[t], mid[t], hi[t] = start, start + width // 2, start + width
    amp = rng.standard_normal(terms)
    return lo, mid, hi, amp


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def run_child(repeats):
    from weyl_lab import _kernels

    digest = hashlib.sha256()
    rows = []
    for n in MAXAVG_SIZES:
        v = _maxavg_input(n)
        secs, out = _time(lambda: _kernels.maxavg_exact(v), repeats)
        digest.update(out.tobytes())
        rows.append({"kernel": "maxavg_exact", "case": f"n={n}",
                     "seconds": secs})
    for cells, terms in CHAIN_CASES:
        lo, mid, hi, amp = _chain_input(cells, terms)
        secs, out = _time(
            lambda: _kernels.chain_runmax_haar(lo, mid, hi, amp, cells),
            repeats)
        digest.update(out.tobytes())
        rows.append({"kernel": "chain_runmax_haar",
                     "case": f"cells={cells},terms={terms}", "seconds": secs})
    print(json.dumps({"backend": _kernels.backend_name(), "rows": rows,
                      "sha256": digest.hexdigest()}))


def run_parent(repeats):
    results = {}
    for pure in ("0", "1"):
        env = dict(os.environ, WEYL_LAB_PURE=pure,
                   WEYL_LAB_BENCH_CHILD="1")
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__),
             "--repeats", str(repeats)],
            env=env, capture_output=True, text=True, check=True)
        payload = json.loads(proc.stdout)
        results[payload["backend"]] = payload

    if set(results) != {"compiled", "python"}:
        print(f"note: only {sorted(results)} available "
              f"(compiled extension not importable?)")
    digests = {name: r["sha256"] for name, r in results.items()}
    identical = len(set(digests.values())) == 1
    print(f"backends: {', '.join(sorted(results))}; "
          f"outputs bit-identical: {identical}")
    if not identical:
        raise SystemExit(f"backend outputs differ: {digests}")

    (name_a, res_a), (name_b, res_b) = sorted(results.items())
    print(f"\n{'kernel':<20} {'case':<24} {name_a+' (s)':>14} "
          f"{name_b+' (s)':>14} {'speedup':>9}")
    for ra, rb in zip(res_a["rows"], res_b["rows"]):
        assert (ra["kernel"], ra["case"]) == (rb["kernel"], rb["case"])
        speed = rb["seconds"] / ra["seconds"]
        print(f"{ra['kernel']:<20} {ra['case']:<24} {ra['seconds']:>14.6f} "
              f"{rb['seconds']:>14.6f} {speed:>8.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    if os.environ.get("WEYL_LAB_BENCH_CHILD"):
        run_child(args.repeats)
    else:
        run_parent(args.repeats)


if __name__ == "__main__":
    main()
