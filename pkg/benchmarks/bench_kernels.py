"""Timing comparison of the pure-Python and compiled log-domain kernels.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs on identical inputs under both backends; the table reports
best-of-N wall times, the speedup, and the largest output disagreement.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from renewal_ldp._core import implementations


def best_of(fn, repeat: int) -> float:
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def max_delta(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    both = np.isfinite(a) & np.isfinite(b)
    if not np.array_equal(np.isfinite(a), np.isfinite(b)):
        return math.inf
    return float(np.max(np.abs(a[both] - b[both]))) if both.any() else 0.0


def _run_shift1(impl, acc, src):
    out = acc.copy()
    impl.shift_logaddexp_1d(out, src, 3, -0.25)
    return out


def _run_shift2(impl, acc, src):
    out = acc.copy()
    impl.shift_logaddexp_2d(out, src, 2, 1, -0.25)
    return out


def build_cases():
    gen = np.random.default_rng(7)

    head = np.ascontiguousarray(gen.normal(-1.0, 0.8, size=4))
    T = 30_000

    ln_zc = np.ascontiguousarray(np.cumsum(gen.normal(-0.7, 0.1, size=6001)))
    ln_surv = np.ascontiguousarray(-0.05 * np.arange(6001, dtype=np.float64))

    acc1 = np.full(200_000, -math.inf)
    src1 = np.ascontiguousarray(gen.normal(0.0, 2.0, size=200_000))

    acc2 = np.full((900, 900), -math.inf)
    src2 = np.ascontiguousarray(gen.normal(0.0, 2.0, size=(900, 900)))

    big = np.ascontiguousarray(gen.normal(0.0, 5.0, size=2_000_000))

    return [
        (
            "renewal_logrec  (T=30000, s0=4, tail)",
            lambda impl: impl.renewal_logrec(head, T, True, -0.5, -0.8),
        ),
        (
            "free_log_conv   (T=6000)",
            lambda impl: impl.free_log_conv(ln_zc, ln_surv),
        ),
        (
            "shift_1d        (n=200000)",
            lambda impl: _run_shift1(impl, acc1, src1),
        ),
        (
            "shift_2d        (900 x 900)",
            lambda impl: _run_shift2(impl, acc2, src2),
        ),
        (
            "logsumexp_arr   (n=2000000)",
            lambda impl: impl.logsumexp_arr(big),
        ),
    ]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="timing repetitions (best wins)")
    args = parser.parse_args()

    impls = implementations()
    if "native" not in impls:
        print("compiled backend unavailable; timing the pure backend only")
    pure = impls["pure"]

    width = 42
    print(f"{'kernel':<{width}} {'pure':>10} {'native':>10} {'speedup':>8} {'max |diff|':>11}")
    for name, call in build_cases():
        t_pure = best_of(lambda: call(pure), args.repeat)
        if "native" in impls:
            native = impls["native"]
            t_nat = best_of(lambda: call(native), args.repeat)
            delta = max_delta(call(pure), call(native))
            print(
                f"{name:<{width}} {t_pure * 1e3:>8.2f}ms {t_nat * 1e3:>8.2f}ms"
                f" {t_pure / t_nat:>7.1f}x {delta:>11.2e}"
            )
        else:
            print(f"{name:<{width}} {t_pure * 1e3:>8.2f}ms {'-':>10} {'-':>8} {'-':>11}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
