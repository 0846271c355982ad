"""Benchmark the compiled propagation kernel against the numpy fallback.

Usage:
    python benchmarks/bench_kernels.py [--max-bits 18] [--steps 40] [--threads 2]

Prints one row per register size with both backends' time per RK4 step and
the speedup, plus a max-amplitude cross-check between the two.
"""

import argparse
import time

import numpy as np

from rydsense.kernels import reference

try:
    from rydsense.kernels import _native as native
except ImportError:
    native = None


def problem(n_bits, seed=0):
    rng = np.random.default_rng(seed)
    dim = 1 << n_bits
    diag = np.ascontiguousarray(rng.normal(size=dim))
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return diag, np.ascontiguousarray(psi / np.linalg.norm(psi))


def time_backend(stepper, diag, psi, dt, steps, threads):
    state = psi.copy()
    stepper(state, diag, 0.5, dt, max(2, steps // 10), threads)  # warm up
    state = psi.copy()
    start = time.perf_counter()
    stepper(state, diag, 0.5, dt, steps, threads)
    return (time.perf_counter() - start) / steps, state


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--min-bits", type=int, default=8)
    parser.add_argument("--max-bits", type=int, default=18)
    parser.add_argument("--steps", type=int, default=40)
    parser.add_argument("--threads", type=int, default=2)
    args = parser.parse_args()

    if native is None:
        print("compiled backend not built; showing reference only")
    header = f"{'N':>3} {'dim':>8} {'reference':>12} {'native':>12} {'speedup':>8} {'max diff':>10}"
    print(header)
    print("-" * len(header))
    for n_bits in range(args.min_bits, args.max_bits + 1, 2):
        diag, psi = problem(n_bits)
        dt = 1e-3
        t_ref, state_ref = time_backend(
            lambda p, d, o, s, n, th: reference.rk4_steps(p, d, o, s, n),
            diag, psi, dt, args.steps, args.threads,
        )
        if native is None:
            print(f"{n_bits:>3} {1 << n_bits:>8} {t_ref * 1e3:>10.3f} ms {'-':>12} {'-':>8}")
            continue
        t_nat, state_nat = time_backend(
            native.rk4_steps, diag, psi, dt, args.steps, args.threads
        )
        diff = float(np.abs(state_ref - state_nat).max())
        print(
            f"{n_bits:>3} {1 << n_bits:>8} {t_ref * 1e3:>10.3f} ms "
            f"{t_nat * 1e3:>10.3f} ms {t_ref / t_nat:>7.1f}x {diff:>10.2e}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
