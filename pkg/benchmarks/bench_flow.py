"""Compare the compiled RK4 extremal kernel with the numpy fallback.

Usage::

    python benchmarks/bench_flow.py [--steps 10000] [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from turnpike.flow import compiled_kernel, kernel_args, python_kernel
from turnpike.registry import get_problem
from turnpike.static import solve_static


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--problem", default="ex2")
    ap.add_argument("--steps", type=int, default=10_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    p = get_problem(args.problem)
    kargs = kernel_args(p.affine)
    s = solve_static(p)
    z0 = np.concatenate([s.x_bar, s.lambda_bar]) + 0.1
    call = lambda kern: kern(z0, 0.0, 1.0, args.steps, *kargs, 1e8)

    fast = compiled_kernel
    slow = python_kernel
    t_py = min(timeit.repeat(lambda: call(slow), number=1, repeat=args.repeat))
    print(f"python   : {t_py * 1e3:10.3f} ms for {args.steps} steps")
    if fast is None:
        print("compiled : not built (install with Cython available)")
        return 0
    t_c = min(timeit.repeat(lambda: call(fast), number=1, repeat=args.repeat))
    diff = float(np.max(np.abs(call(fast)[0] - call(slow)[0])))
    print(f"compiled : {t_c * 1e3:10.3f} ms for {args.steps} steps")
    print(f"speedup  : {t_py / t_c:10.1f}x   max path difference {diff:.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
