"""Gradient integrals before and after Steiner rearrangement.

    python demos/polya_szego_tour.py

Prints the gap for a random smooth function in codimension one and two, the
chain through the one-axis steps, and the zero gap of a radial profile.
"""

from steiner import Grid, PowerIntegrand, chain_report, polya_szego_report
from steiner.generators import cone, random_smooth
from steiner.integrand import random_affine


def main():
    f = PowerIntegrand(1.0, 1.0, 2.0)
    for k, dims in [(1, (64, 64)), (2, (24, 24, 24))]:
        g = Grid.uniform(dims, 1.0, k)
        u = random_smooth(g, seed=1)
        rep = polya_szego_report(u, f)
        print(f"k={k} {dims}: J(u)={rep.value_original:.4f} J(u^sigma)={rep.value_symmetrized:.4f} gap={rep.gap:.4f}")

    g = Grid.uniform((24, 24, 24), 1.0, 2)
    ch = chain_report(random_smooth(g, seed=1), random_affine(1, 5, seed=1))
    print("chain:", "  ".join(f"{lab}={v:.4f}" for lab, v in zip(ch.labels, ch.values)))

    radial = cone(Grid.uniform((8, 33, 33), 2.0, 2), radius=0.7)
    print("radial cone gap:", polya_szego_report(radial, f).gap)


if __name__ == "__main__":
    main()
