#!/usr/bin/env python3
"""Curvature-sign experiment.

The Weitzenboeck formula for a (1,1)-tensor T reads

    Delta T = -nabla^2 T + S(T),

with S the curvature term.  On every bundled fixture S(J) = 0, so the
sign of S is invisible there.  This script builds the probe that separates
the signs — the round 2-sphere with the constant diagonal golden structure,
which is curved AND non-parallel — and prints the residuals of both sign
variants, plus the analogous bracket gap in the curvature balance of the
product-sphere fixture.

Run:  python scripts/sign_experiment.py [--points N]
"""

import argparse

import numpy as np

from metallicgeo import load_fixture
from metallicgeo.expr import parse
from metallicgeo.hodge import (_J_form, bochner_report, laplacian, nabla2,
                               weitzenbock_S)
from metallicgeo.manifold import chart
from metallicgeo.metallic import MetallicStructure


def curved_golden() -> MetallicStructure:
    M = chart("curved", ["u", "v"], [(0.4, 2.7), (0.1, 6.1)],
              [["1", "0"], ["0", "sin(u)^2"]])
    J = np.array([[parse("phi", M.coords), parse("0", M.coords)],
                  [parse("0", M.coords), parse("1 - phi", M.coords)]],
                 dtype=object)
    return MetallicStructure(manifold=M, p=1.0, q=1.0, J=J,
                             name="curved-golden")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=10,
                    help="sample points per probe (default 10)")
    args = ap.parse_args()

    S = curved_golden()
    T = _J_form(S)
    rng = np.random.default_rng(0)
    plus = minus = smax = 0.0
    for x in S.manifold.sample_points(args.points, seed=42):
        X = rng.standard_normal(2)
        lap = laplacian(T, x, X)
        n2 = nabla2(T, x, X)
        Sx = weitzenbock_S(T, x, X)
        smax = max(smax, float(np.max(np.abs(Sx))))
        plus = max(plus, float(np.max(np.abs(lap + n2 - Sx))))
        minus = max(minus, float(np.max(np.abs(lap + n2 + Sx))))
    print("probe: round 2-sphere, constant golden J (S(J) != 0)")
    print(f"  max ||S(J)||                      = {smax:.6f}")
    print(f"  residual of  Delta J = -nabla^2 J + S(J)  : {plus:.3e}")
    print(f"  residual of  Delta J = -nabla^2 J - S(J)  : {minus:.3e}"
          f"   (= 2 max||S||: {2 * smax:.6f})")

    f2 = load_fixture("f2_sphere_product")
    S2 = next(iter(f2.structures.values()))
    x = S2.manifold.sample_points(1, seed=42)[0]
    rec = bochner_report(S2, x)
    print("\nproduct-sphere curvature balance at one point:")
    print(f"  |nabla J|^2 = {rec.norm_nabla_sq:.3e}   curv = {rec.curv:.10f}")
    print(f"  p tr(JQ)    = {rec.trace_term:.10f}   q scal = "
          f"{rec.scal_term:.10f}")
    print(f"  balance |nabla J|^2 + curv + p tr(JQ) + q scal = "
          f"{rec.balanced_residual:.3e}")
    print(f"  sign-variant bracket (curv + p tr(JQ) - q scal) misses by "
          f"{rec.displayed_residual:.6f} = -2 q scal")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
