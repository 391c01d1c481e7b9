"""Fast invariant suite behind ``steiner selftest``.

Each check runs a fixed number of seeded random cases and reports the worst
defect; the printed lines are identical for every thread count.
"""

import os
import tempfile

import numpy as np

from .functionals import dirichlet_integral
from .grid import Grid, GridFunction, VoxelSet, load, save
from .integrand import PowerIntegrand, euclidean_norm, homogeneity_selftest, lift, random_affine, y_norm
from .rearrange import (
    distribution,
    steiner_rearrange,
    steiner_symmetrize_set,
    subgraph,
    superlevel,
)

TOL = 1e-12


def _random_grid(rng, max_cells=12, max_n=3):
    n = int(rng.integers(1, max_n + 1))
    k = int(rng.integers(1, n + 1))
    dims = tuple(int(d) for d in rng.integers(1, max_cells + 1, size=n))
    spacing = tuple(float(s) for s in rng.choice([0.5, 1.0, 0.25], size=n))
    return Grid(dims, spacing, k)


def _random_function(rng, grid):
    v = rng.random(grid.dims)
    # repeated values exercise tie handling
    if rng.random() < 0.5:
        v = np.round(v * 4) / 4
    v[rng.random(grid.dims) < 0.3] = 0.0
    return GridFunction(grid, v)


def _cases(seed, count):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        g = _random_grid(rng)
        yield rng, g


def check_equidistribution(seed, count):
    worst = 0.0
    for rng, g in _cases(seed, count):
        u = _random_function(rng, g)
        a = np.sort(u.columns(), axis=1)
        b = np.sort(steiner_rearrange(u).columns(), axis=1)
        worst = max(worst, float(np.abs(a - b).max()))
    return worst == 0.0, worst


def check_norms(seed, count):
    worst = 0.0
    for rng, g in _cases(seed, count):
        u = _random_function(rng, g)
        s = steiner_rearrange(u)
        for p in (1, 2):
            a = np.sum(u.values**p)
            b = np.sum(s.values**p)
            worst = max(worst, abs(a - b) / max(1.0, a))
        worst = max(worst, abs(u.values.max() - s.values.max()))
    return worst <= TOL, worst


def check_nonexpansive(seed, count):
    worst = -np.inf
    for rng, g in _cases(seed, count):
        u, v = _random_function(rng, g), _random_function(rng, g)
        us, vs = steiner_rearrange(u), steiner_rearrange(v)
        for p in (1, 2):
            lhs = np.sum(np.abs(us.values - vs.values) ** p) ** (1 / p)
            rhs = np.sum(np.abs(u.values - v.values) ** p) ** (1 / p)
            worst = max(worst, (lhs - rhs) / max(1.0, rhs))
    return worst <= TOL, worst


def check_idempotence(seed, count):
    bad = 0
    for rng, g in _cases(seed, count):
        s = steiner_rearrange(_random_function(rng, g))
        bad += int(not np.array_equal(steiner_rearrange(s).values, s.values))
    return bad == 0, bad


def check_monotonicity(seed, count):
    bad = 0
    for rng, g in _cases(seed, count):
        u = _random_function(rng, g)
        v = GridFunction(g, u.values + rng.random(g.dims) * (rng.random(g.dims) < 0.5))
        bad += int(np.any(steiner_rearrange(u).values > steiner_rearrange(v).values))
    return bad == 0, bad


def check_superlevel(seed, count):
    bad = 0
    for rng, g in _cases(seed, count):
        u = _random_function(rng, g)
        s = steiner_rearrange(u)
        for t in np.unique(u.values)[:-1]:
            a = steiner_symmetrize_set(superlevel(u, t)).mask
            bad += int(not np.array_equal(a, superlevel(s, t).mask))
    return bad == 0, bad


def check_subgraph(seed, count):
    bad = 0
    for rng, g in _cases(seed, count):
        u = _random_function(rng, g)
        dt = 0.125
        levels = int(np.ceil(u.values.max() / dt)) + 1
        a = steiner_symmetrize_set(subgraph(u, levels, dt)).mask
        b = subgraph(steiner_rearrange(u), levels, dt).mask
        bad += int(not np.array_equal(a, b))
    return bad == 0, bad


def check_distribution(seed, count):
    worst = 0.0
    for rng, g in _cases(seed, count):
        u = _random_function(rng, g)
        t = np.array([0.0, 0.25, 0.5, 0.75])
        a = distribution(u, t).values
        b = distribution(steiner_rearrange(u), t).values
        worst = max(worst, float(np.abs(a - b).max()))
    return worst == 0.0, worst


def check_set_measure(seed, count):
    bad = 0
    for rng, g in _cases(seed, count):
        E = VoxelSet(g, rng.random(g.dims) < rng.random())
        S = steiner_symmetrize_set(E)
        bad += int(not np.array_equal(E.section_count(), S.section_count()))
        bad += int(not np.array_equal(steiner_symmetrize_set(S).mask, S.mask))
    return bad == 0, bad


def check_tv_1d(seed, count):
    rng = np.random.default_rng(seed)
    worst = np.inf
    f = PowerIntegrand(0.0, 1.0, 1.0)
    for _ in range(count):
        N = int(rng.integers(1, 40))
        u = GridFunction(Grid((N,), (1.0 / N,), 1), rng.random(N))
        a = dirichlet_integral(u, f)
        b = dirichlet_integral(steiner_rearrange(u), f)
        worst = min(worst, (a - b) / max(1.0, a))
    return worst >= -TOL, worst


def check_homogeneity(seed, count):
    worst = 0.0
    for k, dim in ((1, 1), (1, 2), (2, 3)):
        for F in (euclidean_norm(), y_norm()):
            worst = max(worst, homogeneity_selftest(F, k, dim, count, seed)["defect"])
        for f in (PowerIntegrand(1.0, 2.0, 1.0), random_affine(dim - k, 5, seed)):
            worst = max(worst, homogeneity_selftest(lift(f), k, dim + 1, count, seed, True)["defect"])
    return worst <= TOL, worst


def check_roundtrip(seed, count):
    bad = 0
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "obj.stnr1")
        for rng, g in _cases(seed, count):
            u = _random_function(rng, g)
            for obj in (u, VoxelSet(g, u.values > 0.5)):
                save(obj, path)
                back = load(path)
                data = back.values if isinstance(back, GridFunction) else back.mask
                ref = obj.values if isinstance(obj, GridFunction) else obj.mask
                bad += int(back.grid != g or not np.array_equal(data, ref))
    return bad == 0, bad


CHECKS = [
    ("equidistribution", check_equidistribution),
    ("distribution", check_distribution),
    ("norms", check_norms),
    ("non_expansive", check_nonexpansive),
    ("idempotence", check_idempotence),
    ("monotonicity", check_monotonicity),
    ("superlevel_commutation", check_superlevel),
    ("subgraph_commutation", check_subgraph),
    ("set_measure", check_set_measure),
    ("tv_1d", check_tv_1d),
    ("homogeneity", check_homogeneity),
    ("roundtrip", check_roundtrip),
]


def run_selftest(seed=0, count=200):
    """Run every check; returns a list of ``(name, passed, worst)``."""
    return [(name, bool(ok), worst) for name, (ok, worst) in
            ((name, fn(seed, count)) for name, fn in CHECKS)]
