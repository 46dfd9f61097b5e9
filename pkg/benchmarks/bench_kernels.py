"""Compare the numba kernels with their pure-numpy fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Part 1 times each kernel in-process under both implementations and checks
that they agree.  Part 2 times a full RK4 run (g6_54, 100 steps) in fresh
interpreters with SHFLAB_DISABLE_NUMBA unset and set.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from shflab import _kernels as K

END_TO_END = (
    "import time;"
    "from shflab import catalog, flow;"
    "d = flow.FlowData.from_entry(catalog.get('g6_54'));"
    "flow.integrate_rk4(d.omega, d.phi0, d.algebra, 0.001, 1e-3);"  # warm-up / JIT
    "t = time.perf_counter();"
    "flow.integrate_rk4(d.omega, d.phi0, d.algebra, 0.1, 1e-3);"
    "print(time.perf_counter() - t)"
)


def kernel_cases(rng):
    a3, b3 = rng.normal(size=20), rng.normal(size=20)
    a2 = rng.normal(size=15)
    E = rng.normal(size=(6, 6))
    v = rng.normal(size=6)
    return {
        "wedge 3x3": (lambda k: k["wedge"](a3, b3, *K.WEDGE_TABLES[(3, 3)], 1)),
        "wedge 2x3": (lambda k: k["wedge"](a2, a3, *K.WEDGE_TABLES[(2, 3)], 6)),
        "contract 3": (lambda k: k["contract"](v, a3, *K.CONTRACT_TABLES[3], 15)),
        "compound 3": (lambda k: k["compound"](E, K.COMBO_ARRAYS[3], K.COMBO_ARRAYS[3])),
        "hitchin": (lambda k: k["hitchin"](a3, *K.HITCHIN_TABLE)),
        "derivation 3": (lambda k: k["derivation"](E, *K.DERIVATION_TABLES[3], 20)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=2000)
    args = ap.parse_args()

    numpy_k = dict(wedge=K.wedge_np, contract=K.contract_np, compound=K.compound_np,
                   hitchin=K.hitchin_np, derivation=K.derivation_np)
    try:
        nb = K._make_numba_kernels()
    except ImportError:
        print("numba is not installed; only the numpy fallback is available")
        return
    numba_k = dict(zip(("wedge", "contract", "compound", "hitchin", "derivation"), nb))

    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'numpy us':>12}{'numba us':>12}{'speedup':>10}  agree")
    for name, fn in kernel_cases(rng).items():
        fn(numba_k)  # compile
        agree = np.allclose(fn(numpy_k), fn(numba_k), atol=1e-12, rtol=1e-12)
        t_np = min(timeit.repeat(lambda: fn(numpy_k), number=args.repeat, repeat=3)) / args.repeat * 1e6
        t_nb = min(timeit.repeat(lambda: fn(numba_k), number=args.repeat, repeat=3)) / args.repeat * 1e6
        print(f"{name:<14}{t_np:>12.2f}{t_nb:>12.2f}{t_np / t_nb:>10.1f}  {agree}")

    print("\nend to end: RK4 on g6_54, 100 steps")
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, SHFLAB_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
        print(f"  {label:<6} {float(out.stdout):.3f} s")


if __name__ == "__main__":
    main()
