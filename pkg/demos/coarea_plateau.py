"""Flat parts below the maximum and the critical part of the distribution function.

    python demos/coarea_plateau.py

A radial profile with a flat annulus puts critical-set mass at a single
level; a strictly decreasing profile has none.
"""

from steiner import Grid, coarea_irregularity_probe, condition_report, critical_measure
from steiner.generators import plateau, radial_gaussian


def main():
    g = Grid.uniform((4, 64, 64), 2.0, 2)
    for name, u in [("gaussian", radial_gaussian(g, 0.4)), ("plateau", plateau(g, 0.2, 0.5, 0.9, 0.5))]:
        rep = condition_report(u)
        print(f"{name:9s} critical={critical_measure(u):.4f} irregularity={coarea_irregularity_probe(u):.4f} "
              f"vertical_fraction={rep.boundary_vertical_fraction:.3f} (theta={rep.theta:g}, tau={rep.tau:g})")


if __name__ == "__main__":
    main()
