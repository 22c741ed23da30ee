"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Prints the best wall time per kernel and backend, the speedup, and the
largest difference between the two backends' outputs.
"""

import argparse
import timeit

import numpy as np

from dwpap.kernels import backends


def cases(rng):
    t = rng.uniform(-1e3, 1e3, 20000)
    freqs = rng.uniform(-5, 5, 6)
    coefs = rng.normal(size=(6, 1)) + 1j * rng.normal(size=(6, 1))
    poly = rng.normal(size=9)
    x = rng.uniform(-50, 50, 200000)
    F = rng.normal(size=(65536, 9, 1)) + 1j * rng.normal(size=(65536, 9, 1))
    width = rng.uniform(1e-3, 1.0, 65536)
    # typical per-level batch inside the adaptive quadrature
    Fs, ws = F[:512].copy(), width[:512].copy()
    return {
        "trig_eval": lambda m: m.trig_eval(t, freqs, coefs),
        "horner": lambda m: m.horner(poly, x),
        "romberg_refine": lambda m: m.romberg_refine(F, width),
        "romberg_small": lambda m: m.romberg_refine(Fs, ws),
    }


def _max_diff(a, b):
    if isinstance(a, tuple):
        return max(_max_diff(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=7)
    args = ap.parse_args(argv)
    mods = backends()
    if "cython" not in mods:
        print("compiled extension not built; only the python backend is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}" + "".join(f"{name:>12}" for name in mods) + f"{'speedup':>10}{'max diff':>12}")
    for name, fn in cases(rng).items():
        times = {b: min(timeit.repeat(lambda: fn(m), number=1, repeat=args.repeat)) for b, m in mods.items()}
        row = f"{name:<16}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in mods)
        if "cython" in mods:
            diff = _max_diff(fn(mods["python"]), fn(mods["cython"]))
            row += f"{times['python'] / times['cython']:>9.1f}x{diff:>12.2e}"
        print(row)


if __name__ == "__main__":
    main()
