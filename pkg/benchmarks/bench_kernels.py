"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--steps 100000] [--repeat 3]

Each kernel runs on identical inputs under both backends; results are
checked for agreement before timings are reported.
"""
import argparse
import timeit

import numpy as np

from consensus_kit import kernels


def inputs(steps, n, seed=0):
    rng = np.random.default_rng(seed)
    mask = rng.random((steps, n, n)) < 0.3
    mask[:, np.arange(n), np.arange(n)] = True
    w = rng.random((steps, n, n)) * mask
    stack = np.ascontiguousarray(w / w.sum(axis=2, keepdims=True))
    return stack, np.ascontiguousarray(mask, dtype=np.uint8), rng.random(n)


def cases(stack, masks, x0):
    short = stack[:2000]
    mats = [np.ascontiguousarray(m) for m in stack[:2000]]
    n = stack.shape[1]
    return {
        "tau x2000": lambda k: [k.tau(m) for m in mats],
        "scan_windows": lambda k: k.scan_windows(masks, 0, n * n, True),
        "product_stack 2000": lambda k: k.product_stack(short, True),
        "propagate": lambda k: k.propagate(stack, x0),
    }


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, list):
        return np.allclose(np.array(a), np.array(b), atol=1e-12)
    return np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), atol=1e-10)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    py = kernels.get_backend("python")
    try:
        cy = kernels.get_backend("cython")
    except ImportError:
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
        return 1

    stack, masks, x0 = inputs(args.steps, args.n)
    print(f"steps={args.steps} n={args.n} best of {args.repeat}")
    print(f"{'kernel':<20}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}")
    for name, fn in cases(stack, masks, x0).items():
        if not same(fn(py), fn(cy)):
            raise SystemExit(f"{name}: backends disagree")
        t_py = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat))
        print(f"{name:<20}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
