"""Admissibility sweep for the straight-line kernel over exponential and oscillating drives.

    python3 scripts/kernel_report.py
"""
import numpy as np

from phasecov.kernels import example_kernel, kernel_admissible
from phasecov.rational import RationalLaplace


def drives():
    for rate in (0.5, 1.0, 2.0):
        yield f"exp(-{rate} t)", RationalLaplace([1.0], [rate, 1.0])
    for w in (0.5, 1.0, 2.0):
        yield f"cos({w} t)", RationalLaplace([0.0, 1.0], [w**2, 0.0, 1.0])
        yield f"sin({w} t)", RationalLaplace([w], [w**2, 0.0, 1.0])


def main():
    grid = np.logspace(-3, 3, 64)
    for a, ap, am in [(1.0, 0.5, 0.5), (1.0, 0.6, 0.4)]:
        for name, f_s in drives():
            verdict, reports = kernel_admissible(example_kernel(a, ap, am, f_s), grid=grid)
            wit = next((r.witness for r in reports if r.fails), None)
            extra = f"  witness s={wit['s']:.4g} n={wit['n']}" if wit else ""
            print(f"a={a} a+={ap} a-={am}  f={name:<12} {verdict.status.value}{extra}")


if __name__ == "__main__":
    main()
