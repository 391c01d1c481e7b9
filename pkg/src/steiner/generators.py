"""Built-in test functions and sets.

All lengths are physical (grid units), so the same parameters describe the
same continuum object on every resolution. Functions are non-negative;
``output="set"`` returns the indicator where a set makes sense.
"""

import numpy as np

from .grid import GridFunction, VoxelSet

__all__ = ["GENERATORS", "generate", "cone", "tent", "radial_gaussian", "offcenter_ball",
           "two_balls", "plateau", "random_smooth", "box"]


def _y_center(grid, center):
    if center is None:
        return np.zeros(grid.k)
    c = np.atleast_1d(np.asarray(center, dtype=np.float64))
    if c.size != grid.k:
        raise ValueError(f"center needs {grid.k} y-coordinates, got {c.size}")
    return c


def _y_dist(grid, center=None):
    c = _y_center(grid, center)
    ys = grid.mesh(grid.y_axes)
    return np.sqrt(sum((y - ci) ** 2 for y, ci in zip(ys, c)))


def _x_factor(grid, x_base, x_slope):
    if x_slope == 0 or not grid.x_axes:
        return np.asarray(x_base, dtype=np.float64)
    (x0,) = grid.mesh((0,))
    fac = x_base + x_slope * x0
    if np.any(fac < 0):
        raise ValueError("x_base + x_slope * x must stay non-negative on the grid")
    return fac


def _full(grid, values):
    return GridFunction(grid, np.broadcast_to(values, grid.dims))


def cone(grid, radius=1.0, height=1.0, center=None, x_base=1.0, x_slope=0.0):
    """``(x_base + x_slope x_0) * height * max(0, 1 - |y - c| / radius)``."""
    prof = height * np.maximum(0.0, 1.0 - _y_dist(grid, center) / radius)
    return _full(grid, _x_factor(grid, x_base, x_slope) * prof)


def tent(grid, half_width=1.0, height=1.0, center=None):
    """The cone in codimension one: a triangle of the given half width."""
    return cone(grid, half_width, height, center)


def radial_gaussian(grid, scale=0.25, height=1.0, center=None, x_scale=None):
    """Strictly decreasing in ``|y - c|``; optional Gaussian envelope in x."""
    prof = height * np.exp(-0.5 * (_y_dist(grid, center) / scale) ** 2)
    if x_scale is not None and grid.x_axes:
        r2 = sum(x**2 for x in grid.mesh(grid.x_axes))
        prof = prof * np.exp(-0.5 * r2 / x_scale**2)
    return _full(grid, prof)


def _ball_mask(grid, center, radius, cylinder):
    if cylinder:
        return _y_dist(grid, center) <= radius
    c = np.atleast_1d(np.asarray(center if center is not None else np.zeros(grid.n), dtype=float))
    if c.size != grid.n:
        raise ValueError(f"center needs {grid.n} coordinates, got {c.size}")
    zs = grid.mesh(range(grid.n))
    return sum((z - ci) ** 2 for z, ci in zip(zs, c)) <= radius**2


def _bump(grid, center, radius, cylinder):
    if cylinder:
        d2 = _y_dist(grid, center) ** 2
    else:
        c = np.atleast_1d(np.asarray(center, dtype=float))
        d2 = sum((z - ci) ** 2 for z, ci in zip(grid.mesh(range(grid.n)), c))
    return np.maximum(0.0, 1.0 - d2 / radius**2) ** 2


def offcenter_ball(grid, center, radius=0.25, cylinder=False, output="set", height=1.0):
    """A ball off the symmetry plane.

    With ``cylinder`` the ball lives in the y-block of every column (centre
    given in y-coordinates); otherwise it is a full n-dimensional ball.
    ``output="function"`` gives the profile ``height * (1 - |z - c|^2 / r^2)_+^2``.
    """
    if output == "set":
        return VoxelSet(grid, np.broadcast_to(_ball_mask(grid, center, radius, cylinder), grid.dims))
    if output == "function":
        return _full(grid, height * _bump(grid, center, radius, cylinder))
    raise ValueError(f"unknown output {output!r}")


def two_balls(grid, centers, radius=0.25, cylinder=False, output="set", height=1.0):
    """Union (or sum of profiles) of two balls; they must not overlap."""
    c1, c2 = (np.asarray(c, dtype=float) for c in centers)
    if np.linalg.norm(c1 - c2) <= 2 * radius:
        raise ValueError("two_balls: the balls overlap")
    if output == "set":
        m = _ball_mask(grid, c1, radius, cylinder) | _ball_mask(grid, c2, radius, cylinder)
        return VoxelSet(grid, np.broadcast_to(m, grid.dims))
    if output == "function":
        v = _bump(grid, c1, radius, cylinder) + _bump(grid, c2, radius, cylinder)
        return _full(grid, height * v)
    raise ValueError(f"unknown output {output!r}")


def plateau(grid, inner=0.2, outer=0.4, radius=0.8, level=0.5, height=1.0, center=None):
    """Radial profile in y with a flat annulus ``inner <= |y| <= outer`` at ``level``.

    Linear from ``height`` at the centre to ``level`` at ``inner``, flat up to
    ``outer``, then linear down to zero at ``radius``. With ``k = 1`` the flat
    part is two intervals; with ``k >= 2`` it is an annulus, the set where
    the critical part of the distribution function can be spread out.
    """
    if not 0 < inner < outer < radius:
        raise ValueError("need 0 < inner < outer < radius")
    if not 0 < level < height:
        raise ValueError("need 0 < level < height")
    r = _y_dist(grid, center)
    up = height - (height - level) * r / inner
    down = level * (radius - r) / (radius - outer)
    v = np.where(r < inner, up, np.where(r <= outer, level, np.maximum(down, 0.0)))
    return _full(grid, v)


def random_smooth(grid, seed=0, modes=4, amplitude=0.8, height=1.0, margin=0.1):
    """Random trigonometric polynomial times a window vanishing near the boundary.

    The function is defined in physical coordinates, so one seed gives the same
    continuum function at every resolution. The window is
    ``prod_axes cos^2(pi z / (extent - 2 margin))`` inside and zero in the
    margins, on every spatial axis.
    """
    rng = np.random.default_rng(seed)
    zs = grid.mesh(range(grid.n))
    extents = [grid.dims[a] * grid.spacing[a] for a in range(grid.n)]
    ks = rng.integers(0, modes + 1, size=(3 * modes, grid.n))
    phases = rng.uniform(0, 2 * np.pi, size=3 * modes)
    weights = rng.normal(size=3 * modes)
    weights *= amplitude / np.abs(weights).sum()
    field = 1.0 + sum(
        w * np.cos(sum(2 * np.pi * kk * z / L for kk, z, L in zip(kv, zs, extents)) + ph)
        for w, kv, ph in zip(weights, ks, phases)
    )
    window = np.ones(())
    for z, L in zip(zs, extents):
        half = L / 2 - margin
        window = window * np.where(np.abs(z) < half, np.cos(np.pi * z / (2 * half)) ** 2, 0.0)
    v = field * window
    top = v.max()
    return _full(grid, height * v / top if top > 0 else v)


def box(grid, lower, upper, output="set", height=1.0):
    """Axis-aligned box ``lower <= z <= upper`` (per spatial axis, cell centres)."""
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    if lo.size != grid.n or hi.size != grid.n:
        raise ValueError(f"box corners need {grid.n} coordinates")
    m = np.ones((), dtype=bool)
    for z, a, b in zip(grid.mesh(range(grid.n)), lo, hi):
        m = m & (z >= a) & (z <= b)
    m = np.broadcast_to(m, grid.without_t().dims)
    if output == "set":
        return VoxelSet(grid, m)
    if output == "function":
        return GridFunction(grid, height * m)
    raise ValueError(f"unknown output {output!r}")


GENERATORS = {
    "cone": cone,
    "tent": tent,
    "radial_gaussian": radial_gaussian,
    "offcenter_ball": offcenter_ball,
    "two_balls": two_balls,
    "plateau": plateau,
    "random_smooth": random_smooth,
    "box": box,
}


def generate(name, grid, **params):
    try:
        fn = GENERATORS[name]
    except KeyError:
        raise ValueError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}") from None
    return fn(grid, **params)
