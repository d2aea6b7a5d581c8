"""Throughput benchmark for the event kernels.

Times the single-chain and coupled-pair kernels in the current mode
(accelerated when numba is importable and MIXLAB_NUMBA is unset), in
events per second.  ``--compare`` reruns the same measurements in a
subprocess with MIXLAB_NUMBA=0 and prints both columns side by side.

Usage:
    python3 benchmarks/bench_kernels.py [--events 2000000] [--n 128] [--compare]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from mixlab._accel import USING_NUMBA
from mixlab import _kernels
from mixlab._streams import EventStream, derived_rng
from mixlab.coupling import extremal_pair
from mixlab.dynamics import to_internal
from mixlab.states import ChainSpec, Model


def _drive_single(spec, n_events):
    low, _ = extremal_pair(spec)
    arr = to_internal(spec, low)
    stream = EventStream(derived_rng(12345, 0), spec.N - 1)
    inv_rate = 1.0 / (spec.N - 1)
    t_now, used = 0.0, 0
    start = time.perf_counter()
    while used < n_events:
        stream.refill()
        j, t_now, status = _kernels.run_heights(
            arr, spec.p, t_now, np.inf, inv_rate, stream.dts, stream.sites, stream.marks, 0
        )
        used += j
        stream.j = j
    return used / (time.perf_counter() - start)


def _drive_pair(spec, n_events):
    low, high = extremal_pair(spec)
    z1, z2 = to_internal(spec, low), to_internal(spec, high)
    gap = int(np.abs(z2 - z1).sum())
    stream = EventStream(derived_rng(999, 1), spec.N - 1)
    inv_rate = 1.0 / (spec.N - 1)
    empty = np.empty(0, dtype=np.float64)
    t_now, used = 0.0, 0
    start = time.perf_counter()
    while used < n_events:
        stream.refill()
        j, aj, t_now, gap, tau, status = _kernels.run_pair_heights(
            z1, z2, spec.p, 0, 0, t_now, np.inf, inv_rate,
            stream.dts, stream.sites, stream.marks, empty, 0, 0, gap,
        )
        used += j
        if status == _kernels.COALESCED:
            z1, z2 = to_internal(spec, low), to_internal(spec, high)
            gap = int(np.abs(z2 - z1).sum())
    return used / (time.perf_counter() - start)


def measure(n, events):
    spec = ChainSpec(Model.SSEP, n, n // 2, 0.5)
    # warm-up triggers compilation so it is not billed to the timing run
    _drive_single(spec, 10_000)
    _drive_pair(spec, 10_000)
    return {
        "mode": "numba" if USING_NUMBA else "numpy",
        "single_events_per_s": _drive_single(spec, events),
        "pair_events_per_s": _drive_pair(spec, events),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--events", type=int, default=2_000_000)
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--compare", action="store_true")
    ap.add_argument("--json", action="store_true", help="print one JSON object")
    args = ap.parse_args(argv)

    res = measure(args.n, args.events)
    if args.json:
        print(json.dumps(res))
        return 0

    rows = [res]
    if args.compare and res["mode"] == "numba":
        env = dict(os.environ, MIXLAB_NUMBA="0")
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--events", str(max(args.events // 20, 10_000)),
             "--n", str(args.n), "--json"],
            env=env, capture_output=True, text=True, check=True,
        )
        rows.append(json.loads(out.stdout))

    print(f"N={args.n}, {args.events} events")
    print(f"{'mode':8s} {'single (ev/s)':>16s} {'pair (ev/s)':>16s}")
    for r in rows:
        print(f"{r['mode']:8s} {r['single_events_per_s']:16,.0f} {r['pair_events_per_s']:16,.0f}")
    if len(rows) == 2:
        speedup = rows[0]["single_events_per_s"] / rows[1]["single_events_per_s"]
        print(f"single-chain speedup: {speedup:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
