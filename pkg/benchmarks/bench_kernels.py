"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import math
import timeit

import numpy as np

from fsfcpt import kernels, solver
from fsfcpt.atom import LambdaSystem
from fsfcpt.comb import CombSpec


def envelope_case():
    spec = CombSpec((1.0, 1.0), n0=40, spacing=10.0, alpha=math.pi / 5)
    coeffs = spec.envelope() * np.exp(1j * spec.phases())
    t = np.linspace(0, spec.period, 20000)
    return lambda be: be.comb_envelope(t, coeffs, int(spec.n_min), spec.spacing)


def integrate_case(nodes=8):
    spec = CombSpec((4.0, 3.0), n0=2, spacing=20.0, alpha=0.3, n_max=1)
    coeffs = spec.envelope() * np.exp(1j * spec.phases())
    kv = 10.0 * np.linspace(-1, 1, nodes)
    w = np.full(nodes, 1.0 / nodes)
    marks = np.array([0.5, 1.0, 2.0])
    args = (coeffs, int(spec.n_min), spec.spacing, 4.0, 3.0, 0.5, 0.5, 41.0, 2.0, 30.0, 1.0,
            2.0, kv, w, marks, 1e-9, 1e-13, 10**6)
    return lambda be: be.rwa_integrate(*args)


def oracle_case():
    system = LambdaSystem(omega21=40.0, gamma_prime=50.0)
    spec = CombSpec((5.0, 5.0), n0=2, spacing=20.0, alpha=0.3, n_max=1)
    return lambda name: solver.time_domain_oracle(system, spec, 2, 0.5, backend=name)


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    try:
        compiled = kernels.get_backend("compiled")
    except ImportError:
        print("compiled kernels are not built; nothing to compare")
        return
    python = kernels.get_backend("python")
    rows = []
    for name, case in (("comb_envelope", envelope_case()), ("rwa_integrate", integrate_case())):
        rows.append((name, best(lambda: case(python), args.repeat), best(lambda: case(compiled), args.repeat)))
    oracle = oracle_case()
    rows.append(("time_domain_oracle", best(lambda: oracle("python"), 1), best(lambda: oracle("compiled"), args.repeat)))
    print(f"{'kernel':<20}{'python [s]':>12}{'compiled [s]':>14}{'speedup':>10}")
    for name, tp, tc in rows:
        print(f"{name:<20}{tp:>12.4f}{tc:>14.4f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
