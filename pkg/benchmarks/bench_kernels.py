"""Time the compiled and pure-numpy kernel backends side by side.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from pauliest import kernels


def cases(rng):
    for n in (4, 6, 8):
        data = rng.standard_normal((16, 4**n))
        yield f"fwht 16 x 4^{n}", lambda d=data: kernels.fwht(d)
    for size in (256, 1024, 4096):
        xa, za, xb, zb = (rng.integers(0, 2**12, size, dtype=np.uint64) for _ in range(4))
        yield f"commutation_signs {size}x{size}", lambda a=(xa, za, xb, zb): kernels.commutation_signs(*a)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available_backends()
    print(f"{'kernel':34s}" + "".join(f"{b:>12s}" for b in backends) + ("   speedup" if len(backends) > 1 else ""))
    for name, fn in cases(np.random.default_rng(0)):
        times = []
        for b in backends:
            with kernels.use_backend(b):
                fn()
                times.append(min(timeit.repeat(fn, number=1, repeat=args.repeat)))
        row = f"{name:34s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) > 1:
            row += f"   {times[backends.index('python')] / times[backends.index('cython')]:7.2f}x"
        print(row)


if __name__ == "__main__":
    main()
