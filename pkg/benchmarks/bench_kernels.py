"""Compare the compiled and pure-Python kernel backends.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N] [--size M]``.
Reports the best-of-N time per call for the normalizer solve and for a
full ``point_at`` on a Kaniadakis family, plus the largest disagreement
between the backends.
"""

import argparse
import timeit

import numpy as np

from phigeom import kernels
from phigeom.phi_core import PhiFunction
from phigeom.phi_family import PhiFamily
from phigeom.sample_space import Density, FiniteSpace


def make_family(m, rng):
    space = FiniteSpace.counting(m)
    center = Density(space, rng.dirichlet(np.ones(m)) + 1e-3)
    return PhiFamily.build(PhiFunction.kaniadakis(0.5), center, rng.normal(size=(2, m)),
                           u0=rng.uniform(0.5, 2.0, size=m))


def time_call(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--number", type=int, default=200)
    parser.add_argument("--size", type=int, default=16)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(0)
    fam = make_family(args.size, rng)
    base = fam.c + np.array([0.4, -0.3]) @ fam.directions
    mu = fam.space.weights
    theta = np.array([0.4, -0.3])

    rows = []
    psis = {}
    previous = kernels.backend_name()
    try:
        for name in kernels.available_backends():
            kernels.use_backend(name)
            psis[name] = kernels.solve_psi(1, 0.5, base, fam.u0, mu)[0]
            t_psi = time_call(lambda: kernels.solve_psi(1, 0.5, base, fam.u0, mu), args.repeat, args.number)
            t_point = time_call(lambda: fam.point_at(theta), args.repeat, max(1, args.number // 4))
            rows.append((name, t_psi, t_point))
    finally:
        kernels.use_backend(previous)

    print(f"m = {args.size}, best of {args.repeat}")
    print(f"{'backend':<10} {'solve_psi [us]':>15} {'point_at [us]':>15}")
    for name, t_psi, t_point in rows:
        print(f"{name:<10} {t_psi * 1e6:15.1f} {t_point * 1e6:15.1f}")
    if len(rows) == 2:
        (_, a, c), (_, b, d) = rows
        print(f"speedup    {b / a:15.1f}x {d / c:15.1f}x")
        print(f"max |psi difference| = {abs(psis['compiled'] - psis['python']):.2e}")
    else:
        print("compiled backend not built; only the fallback was timed")


if __name__ == "__main__":
    main()
