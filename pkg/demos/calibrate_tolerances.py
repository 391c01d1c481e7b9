"""Measure the tolerances pinned in tests/tolerances.py.

Run from the repository root:

    python demos/calibrate_tolerances.py

Each block prints the raw measurements and the constant derived from them.
Near-equality families (recentred profiles, whose gap is zero in the
continuum) give the lattice defect of the Polya-Szego gap; the pinned
``C_k`` is twice the worst ``-gap / h`` seen on the acceptance grids.
"""

import math

import numpy as np

from steiner import Grid, euclidean_norm, perimeter_report, polya_szego_report
from steiner.diagnostics import verify_lambda_derivatives
from steiner.generators import cone, offcenter_ball, radial_gaussian
from steiner.integrand import PowerIntegrand, random_affine

GRIDS = {1: [(32, 32), (64, 64), (128, 128)], 2: [(16, 16, 16), (32, 32, 32)]}


def integrands(n_x):
    yield "abs_y", PowerIntegrand(0.0, 1.0, 1.0)
    yield "y2", PowerIntegrand(0.0, 1.0, 2.0)
    yield "grad2", PowerIntegrand(1.0, 1.0, 2.0)
    for s in range(3):
        yield f"affine{s}", random_affine(n_x, 5, seed=s)


def near_equality(g):
    k = g.k
    c1 = [0.1234, -0.0567][:k]
    c2 = [-0.0711, 0.1502][:k]
    full = [0.05] * (g.n - k) + c1
    yield "ball_cyl", offcenter_ball(g, c1, radius=0.3, cylinder=True, output="function")
    yield "ball_full", offcenter_ball(g, full, radius=0.35, cylinder=False, output="function")
    yield "gauss", radial_gaussian(g, scale=0.12, center=c2, x_scale=0.3)
    yield "cone", cone(g, radius=0.3, center=c2, x_base=1.0, x_slope=0.5)


def polya_szego_constants():
    out = {}
    for k, grids in GRIDS.items():
        worst = 0.0
        for dims in grids:
            g = Grid.uniform(dims, 1.0, k)
            for fam, u in near_equality(g):
                for name, f in integrands(g.n - k):
                    gap = polya_szego_report(u, f).gap
                    worst = max(worst, -gap / g.h)
                    if gap < 0:
                        print(f"  k={k} dims={dims} {fam:9s} {name:7s} gap={gap:+.3e}  -gap/h={-gap / g.h:.3e}")
        C = math.ceil(2 * worst * 100) / 100
        print(f"k={k}: worst -gap/h = {worst:.4f} -> C = {C}")
        out[k] = C
    return out


def translate_tolerance():
    g = Grid.uniform((256, 256), 2.0, 2)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(8):
        c = rng.uniform(-0.4, 0.4, size=2)
        rep = perimeter_report(offcenter_ball(g, c, radius=0.3), euclidean_norm(), "mollified", 2.0)
        worst = max(worst, abs(rep.gap))
        print(f"  centre={c.round(4)} gap={rep.gap:+.3e}")
    tol = float(f"{2 * worst:.1e}")
    print(f"translate: worst |gap| = {worst:.3e} -> tolerance {tol}")
    return tol


def lambda_constants():
    levels = np.linspace(0.3, 0.6, 7)
    worst_t = worst_x = 0.0
    for h in (1 / 32, 1 / 64):
        N = round(2.5 / h)
        u = cone(Grid((N, N), (h, h), 2), radius=1.0)
        e = verify_lambda_derivatives(u, "t", levels, delta=8 * h).max_error()
        worst_t = max(worst_t, e / (9 * h))
        Nx = round(1.0 / h)
        ux = cone(Grid((Nx, N, N), (1.0 / Nx, h, h), 2), radius=1.0, x_base=1.0, x_slope=0.4)
        ex = verify_lambda_derivatives(ux, 0, levels - 0.2, delta=8 * h).max_error()
        worst_x = max(worst_x, ex / (9 * h))
        print(f"  h={h:.5f} t-error={e:.4f} x-error={ex:.4f}")
    Ct = math.ceil(1.25 * worst_t * 10) / 10
    Cx = math.ceil(1.25 * worst_x * 10) / 10
    print(f"lambda: worst error/(h+delta) t={worst_t:.3f} x={worst_x:.3f} -> C_t={Ct} C_x={Cx}")
    return Ct, Cx


if __name__ == "__main__":
    polya_szego_constants()
    translate_tolerance()
    lambda_constants()
