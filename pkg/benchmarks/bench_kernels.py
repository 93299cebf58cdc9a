"""Time the compiled and pure-Python kernels side by side.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from raman_comb import kernels
from raman_comb.comb import bessel_comb
from raman_comb.schemes import doubling_tolerance


def cases():
    xs = np.linspace(0.0, 10.0, 2000)
    jpos, order, _ = bessel_comb(1.2, doubling_tolerance(1e-14))
    wide, wide_order, _ = bessel_comb(3.0, doubling_tolerance(1e-14))
    return [
        ("bessel_table 2000 x, nmax 64", lambda k: k.bessel_table(xs, 64)),
        (f"cavity_triple_sum N={order}", lambda k: k.cavity_triple_sum(jpos, 0.3)),
        (f"cavity_triple_sum N={wide_order}", lambda k: k.cavity_triple_sum(wide, 0.3)),
        (f"parity_triple_sum N={wide_order}", lambda k: k.parity_triple_sum(wide, 1)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    names = sorted(kernels.BACKENDS)
    backends = {n: kernels.get_backend(n) for n in names}
    if "cython" not in backends:
        print("compiled extension not built; timing the python backend only")
    print(f"{'kernel':38s}" + "".join(f"{n:>14s}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for label, fn in cases():
        times = {}
        for n, k in backends.items():
            number = max(1, int(0.2 / max(timeit.timeit(lambda: fn(k), number=1), 1e-7)))
            best = min(timeit.repeat(lambda: fn(k), number=number, repeat=args.repeat)) / number
            times[n] = best
        row = f"{label:38s}" + "".join(f"{times[n] * 1e6:12.1f}us" for n in names)
        if len(names) > 1:
            row += f"   {times['python'] / times['cython']:7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
