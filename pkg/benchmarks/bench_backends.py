"""Benchmark the compiled extension against the pure-Python backend on
identical quadrature calls.

Run as: python3 benchmarks/bench_backends.py [--quick]
"""
from __future__ import annotations

import argparse
import time

from pfmass import _purepy

try:
    from pfmass import _core
except ImportError:
    _core = None


def run(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - t0, out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true",
                    help="skip the largest cutoff case")
    opts = ap.parse_args()

    cases = [
        ("bterm b1 lam=1e2", "bterm", (1, 1e2, 0.0, 1e-6, 0.0, 1000, True)),
        ("bterm b2 lam=1e4", "bterm", (2, 1e4, 0.0, 1e-6, 0.0, 1000, True)),
        ("bterm b2 lam=1e6", "bterm", (2, 1e6, 0.0, 1e-6, 0.0, 1000, True)),
        ("db2 lam=1e4", "db2", (1e4, 0.0, 1e-7, 0.0, 1000)),
        ("rho integrals lam=1e4", "rho_integrals", (1e4, 1e-7, 0.0, 1000)),
    ]
    if opts.quick:
        cases = [c for c in cases if "1e6" not in c[0]]

    if _core is None:
        print("compiled extension not built; timing the pure backend only")

    header = f"{'case':26s} {'pure (s)':>10s} {'compiled (s)':>13s} {'speedup':>8s} {'max |diff|':>11s}"
    print(header)
    print("-" * len(header))
    for name, attr, args in cases:
        tp, outp = run(getattr(_purepy, attr), *args)
        if _core is None:
            print(f"{name:26s} {tp:10.3f} {'-':>13s} {'-':>8s} {'-':>11s}")
            continue
        tc, outc = run(getattr(_core, attr), *args)
        if attr == "rho_integrals":
            diff = max(abs(a - b) for a, b in zip(outp[0], outc[0]))
        else:
            diff = abs(outp[0] - outc[0])
        print(f"{name:26s} {tp:10.3f} {tc:13.3f} {tp / tc:8.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
