"""Benchmark the compiled kernels against the numpy fallback.

Times the three hot kernels (response_tensor, coupling_from_rabi,
pair_residual_jac) at several problem sizes and prints the per-call medians
and speedups. Run as: python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from ionising import _pykernels

try:
    from ionising import _corekernels
except ImportError:
    _corekernels = None


def _median_time(fn, args, repeats: int = 7, min_calls: int = 1) -> float:
    # calibrate call count so each sample is at least ~5 ms
    calls = min_calls
    while True:
        t0 = time.perf_counter()
        for _ in range(calls):
            fn(*args)
        dt = time.perf_counter() - t0
        if dt >= 5e-3 or calls >= 4096:
            break
        calls *= 4
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(calls):
            fn(*args)
        samples.append((time.perf_counter() - t0) / calls)
    return float(np.median(samples))


def _problem(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    eta = rng.normal(0.0, 0.1, (n, n))
    freqs = np.linspace(1.0, 0.5, n)
    mu = freqs + 0.1 * (0.5 / max(n - 1, 1))  # clear of every resonance
    omega = rng.normal(0.0, 1.0, (n, n))
    target = rng.normal(0.0, 1.0, (n, n))
    target = target + target.T
    np.fill_diagonal(target, 0.0)
    rows, cols = (idx.astype(np.intp) for idx in np.triu_indices(n, 1))
    f = _pykernels.response_tensor(eta, freqs, mu)
    return {
        "response_tensor": (eta, freqs, mu),
        "coupling_from_rabi": (omega, f),
        "pair_residual_jac": (omega, f, target, rows, cols),
    }


def main() -> None:
    if _corekernels is None:
        print("compiled backend not available; timing the numpy fallback only")
    sizes = (8, 16, 32, 64)
    kernels = ("response_tensor", "coupling_from_rabi", "pair_residual_jac")
    header = f"{'kernel':<22}{'N':>4}{'numpy (us)':>14}{'compiled (us)':>16}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        args = _problem(n)
        for name in kernels:
            t_py = _median_time(getattr(_pykernels, name), args[name])
            if _corekernels is None:
                print(f"{name:<22}{n:>4}{t_py * 1e6:>14.1f}{'-':>16}{'-':>10}")
                continue
            t_c = _median_time(getattr(_corekernels, name), args[name])
            # confirm both backends agree before trusting the timings
            ref = getattr(_pykernels, name)(*args[name])
            out = getattr(_corekernels, name)(*args[name])
            ref = ref if isinstance(ref, tuple) else (ref,)
            out = out if isinstance(out, tuple) else (out,)
            for a, b in zip(ref, out):
                np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-14)
            print(f"{name:<22}{n:>4}{t_py * 1e6:>14.1f}{t_c * 1e6:>16.1f}{t_py / t_c:>10.2f}")


if __name__ == "__main__":
    main()
