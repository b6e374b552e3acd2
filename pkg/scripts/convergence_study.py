"""Residual refinement table for the two reference pipelines.

    python3 scripts/convergence_study.py [--sizes 64 128 256 512]

Prints rel_sup of the divergence-form and complex-gradient residuals per
grid size with the observed ratio to the previous size (about 4 for the
second-order stencils).
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import pipelines  # noqa: E402
from llconformal import verify as V  # noqa: E402


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256, 512])
    args = ap.parse_args(argv)
    print(f"{'pipeline':<10} {'n':>5} {'div_form':>12} {'ratio':>6} {'cgrad':>12} {'ratio':>6}")
    for name, make in (("scherk", pipelines.scherk), ("radial_p4", pipelines.radial)):
        prev = None
        for n in args.sizes:
            p = make(n)
            reps = (V.residual_divergence(p.A, p.u), V.residual_complex_gradient(p.bold, p.u))
            ratios = ["" if prev is None else f"{V.refinement_ratio(a, b):.2f}" for a, b in zip(prev or reps, reps)]
            print(f"{name:<10} {n:>5} {reps[0].rel_sup:>12.3e} {ratios[0]:>6} {reps[1].rel_sup:>12.3e} {ratios[1]:>6}")
            prev = reps


if __name__ == "__main__":
    main()
