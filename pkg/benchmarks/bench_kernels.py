"""Time the numba and pure-numpy kernels side by side.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each kernel is run once untimed (JIT compilation, caches), then ``--repeat``
times; the best wall time is reported together with the largest difference
between the two implementations.
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from hompcm import kernels


def _best(fn, args, repeat):
    fn(*args)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def tmm_case(n_layers=40, n_wavelengths=2000, seed=0):
    rng = np.random.default_rng(seed)
    wl = np.linspace(600.0, 1000.0, n_wavelengths)
    eps_layers = (rng.uniform(1.5, 12.0, (n_layers, 1)) + 1j * rng.uniform(0, 2, (n_layers, 1))) \
        * np.ones((1, n_wavelengths))
    d = rng.uniform(5, 300, n_layers)
    ones = np.ones(n_wavelengths, dtype=complex)
    beta2 = 0.5 * np.ones(n_wavelengths)
    return ones, eps_layers, d, 2.25 * ones, 2 * np.pi / wl, beta2


def heat_case(n_cells=2000, n_steps=3000):
    cap = np.full(n_cells, 1.6e6 * 5e-9)
    k = np.full(n_cells + 1, 1.4 / 5e-9)
    k[0] = 0.0
    weights = np.zeros(n_cells)
    weights[n_cells // 2: n_cells // 2 + 3] = 1.0 / 3.0
    power = np.where(np.arange(n_steps) < n_steps // 3, 1e9, 0.0)
    dt = np.full(n_steps, 1e-9)
    return cap, k, weights, power, dt, np.full(n_cells, 293.15), 293.15


def _max_diff(a, b):
    if isinstance(a, tuple):
        return max(float(np.max(np.abs(x - y))) for x, y in zip(a, b))
    return float(np.max(np.abs(a - b)))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--json", default=None, help="also write results to this file")
    args = parser.parse_args(argv)

    cases = {
        "tmm_te (40 layers x 2000 wavelengths)":
            (kernels.tmm_te_numba, kernels.tmm_te_numpy, tmm_case()),
        "tmm_te (6 layers x 1 wavelength)":
            (kernels.tmm_te_numba, kernels.tmm_te_numpy, tmm_case(6, 1)),
        "heat_implicit (2000 cells x 3000 steps)":
            (kernels.heat_implicit_numba, kernels.heat_implicit_numpy, heat_case()),
    }
    results = []
    print(f"{'kernel':44s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, (fast, slow, case) in cases.items():
        t_fast, out_fast = _best(fast, case, args.repeat)
        t_slow, out_slow = _best(slow, case, args.repeat)
        diff = _max_diff(out_fast, out_slow)
        results.append({"kernel": name, "numba_s": t_fast, "numpy_s": t_slow,
                        "speedup": t_slow / t_fast, "max_abs_diff": diff})
        print(f"{name:44s} {1e3 * t_fast:11.3f} {1e3 * t_slow:11.3f} {t_slow / t_fast:8.1f} {diff:11.2e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)
    return results


if __name__ == "__main__":
    main()
