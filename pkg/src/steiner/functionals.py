"""Discrete gradients, gradient integrals and anisotropic surface energies.

Cell values are reduced column by column (each column summed by one numpy
call) and the column sums are then combined by a fixed pairwise tree, so the
totals do not depend on how many threads did the work.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grid import Grid, GridFunction
from .integrand import RecessionError, lift, recession
from .parallel import column_sums, tree_sum
from .rearrange import subgraph

__all__ = [
    "GradientField",
    "gradient",
    "dirichlet_integral",
    "bv_functional",
    "surface_energy_faces",
    "surface_energy_mollified",
    "mollified_gradient",
    "subgraph_energy",
]

TRUNCATE = 4.0


@dataclass(frozen=True)
class GradientField:
    """Per-cell gradient, last axis ordered like the grid axes."""

    grid: object
    vectors: np.ndarray
    scheme: str

    @property
    def x_part(self):
        return self.vectors[..., list(self.grid.x_axes)]

    @property
    def y_part(self):
        return self.vectors[..., list(self.grid.y_axes)]


def _shift(a, axis, step, mode):
    """``a`` shifted by ``step`` cells along ``axis`` with the given extension."""
    pad = [(0, 0)] * a.ndim
    pad[axis] = (1, 1)
    p = np.pad(a, pad, mode=mode)
    sl = [slice(None)] * a.ndim
    sl[axis] = slice(1 + step, 1 + step + a.shape[axis])
    return p[tuple(sl)]


def _diff(a, axis, h, scheme, mode="constant"):
    if scheme == "forward":
        return (_shift(a, axis, 1, mode) - a) / h
    if scheme == "central":
        return (_shift(a, axis, 1, mode) - _shift(a, axis, -1, mode)) / (2 * h)
    raise ValueError(f"unknown gradient scheme {scheme!r}")


def gradient(u, scheme="forward"):
    """Finite-difference gradient of ``u`` with zero extension outside the grid."""
    g = u.grid
    axes = range(g.n)
    vec = np.stack([_diff(u.values, a, g.spacing[a], scheme) for a in axes], axis=-1)
    return GradientField(g, vec, scheme)


def _region_weights(grid, region):
    if region is None:
        return None
    region = np.asarray(region, dtype=bool)
    if region.shape != grid.x_shape:
        raise ValueError(f"region shape {region.shape} does not match x-block {grid.x_shape}")
    shape = grid.x_shape + (1,) * (grid.ndim - len(grid.x_shape))
    return np.broadcast_to(region.reshape(shape), grid.dims)


def _integrate(grid, cell_values, region=None):
    w = _region_weights(grid, region)
    if w is not None:
        cell_values = np.where(w, cell_values, 0.0)
    return tree_sum(column_sums(grid.to_columns(cell_values))) * grid.cell_volume


def _ghosted(u, region):
    """``u`` padded by one zero cell on both ends of every axis.

    Differences of the zero extension are non-zero in the ghost cells next to
    the grid's low edges (forward scheme) or both edges (central scheme), so
    the integrals sum over the padded grid. Ghost x-columns are excluded
    whenever an explicit region is given.
    """
    g = u.grid
    vals = np.pad(u.values, 1)
    pg = Grid(tuple(d + 2 for d in g.dims), g.spacing, g.k, g.has_t_axis)
    if region is not None:
        region = np.asarray(region, dtype=bool)
        if region.shape != g.x_shape:
            raise ValueError(f"region shape {region.shape} does not match x-block {g.x_shape}")
        region = np.pad(region, 1)
    return GridFunction(pg, vals), region


def dirichlet_integral(u, f, region=None, scheme="forward"):
    """``sum f(grad u) * cell_volume`` for the zero extension of ``u``.

    Cells whose x-projection lies outside ``region`` are skipped.
    """
    pu, region = _ghosted(u, region)
    grad = gradient(pu, scheme)
    vals = f(grad.vectors, pu.grid.k)
    if not np.all(np.isfinite(vals)):
        raise ValueError("integrand is infinite on some gradient")
    return _integrate(pu.grid, vals, region)


def bv_functional(u, f, region=None, scheme="forward"):
    """Discrete relaxed functional J_f for an integrand of linear growth.

    Forward differences turn a jump of height ``s`` into a gradient ``s / h`` on
    one cell, whose contribution ``h f(s / h)`` tends to ``s f_inf(e)``, so the
    same sum carries both the absolutely continuous and the jump part.
    """
    try:
        recession(f)
    except RecessionError:
        raise RecessionError("recession infinite: J_f is undefined for this integrand") from None
    return dirichlet_integral(u, f, region, scheme)


def _axis_unit(grid, axis, sign):
    v = np.zeros(grid.ndim)
    v[axis] = sign
    return v


def surface_energy_faces(E, F, region=None):
    """Face-counting surface energy ``sum F(nu) * face_area``.

    Every face between a set cell and a non-set cell (outside the grid counts
    as non-set) contributes ``F`` of the axis direction pointing into ``E``.
    The face is charged to the x-column of its set cell.
    """
    g = E.grid
    has_t = g.has_t_axis
    m = E.mask
    total_cells = np.zeros(g.dims)
    for a in range(g.ndim):
        face_area = g.cell_volume / g.spacing[a]
        up = _shift(m, a, 1, "constant")  # neighbour at +e_a
        down = _shift(m, a, -1, "constant")
        f_minus = float(F(_axis_unit(g, a, -1.0), g.k, has_t))
        f_plus = float(F(_axis_unit(g, a, 1.0), g.k, has_t))
        n_up = m & ~up  # exposed face above: inner normal -e_a
        n_down = m & ~down  # exposed face below: inner normal +e_a
        for count, val in ((n_up, f_minus), (n_down, f_plus)):
            if not count.any():
                continue
            if not np.isfinite(val):
                raise ValueError(f"F is infinite on a required axis direction (axis {a})")
            total_cells += count * (val * face_area)
    w = _region_weights(g, region)
    if w is not None:
        total_cells = np.where(w, total_cells, 0.0)
    return tree_sum(column_sums(g.to_columns(total_cells)))


def mollifier_reach(width):
    """Cells beyond which the truncated kernel has no support."""
    return int(np.ceil(TRUNCATE * width)) + 1


def mollified_gradient(E, width=2.0, boundary="constant", reflect_t=False, pad=0):
    """Central-difference gradient of the Gaussian-mollified indicator.

    The kernel has standard deviation ``width`` cells along every axis, is
    truncated at 4 standard deviations and sums to one. ``pad`` zero cells are
    added around every axis first (the t-axis only on top when
    ``reflect_t``); the result lives on the padded array. With ``reflect_t``
    the indicator is mirrored across ``t = 0`` before smoothing, so that the
    bottom face of a subgraph produces no gradient.
    """
    if width < 1:
        raise ValueError(f"width must be at least 1 cell, got {width}")
    if boundary not in ("constant", "nearest"):
        raise ValueError(f"unknown boundary mode {boundary!r}")
    g = E.grid
    chi = E.mask.astype(np.float64)
    if pad:
        widths = [(pad, pad)] * g.ndim
        if reflect_t:
            widths[-1] = (0, pad)
        chi = np.pad(chi, widths)
    if reflect_t:
        if not g.has_t_axis:
            raise ValueError("reflect_t needs a t-axis")
        nt = chi.shape[-1]
        chi = np.concatenate([chi[..., ::-1], chi], axis=-1)
    smooth = ndimage.gaussian_filter(chi, sigma=float(width), mode=boundary, truncate=TRUNCATE)
    pad_mode = "constant" if boundary == "constant" else "edge"
    grad = np.stack(
        [_diff(smooth, a, g.spacing[a], "central", pad_mode) for a in range(g.ndim)], axis=-1
    )
    if reflect_t:
        grad = grad[..., nt:, :]
    return grad


def surface_energy_mollified(E, F, width=2.0, region=None, boundary="constant", reflect_t=False):
    """Surface energy ``sum F(grad chi_eps) * cell_volume``.

    Uses the positive 1-homogeneity of ``F``: ``F(grad chi) = |grad chi| F(nu)``
    with ``nu`` the inner normal of the smoothed set. With zero extension the
    sum runs over the grid enlarged by the kernel's reach; enlarged x-columns
    are excluded when a region is given.
    """
    g = E.grid
    pad = mollifier_reach(width) if boundary == "constant" else 0
    grad = mollified_gradient(E, width, boundary, reflect_t, pad)
    dims = grad.shape[:-1]
    pg = Grid(dims, g.spacing, g.k, g.has_t_axis)
    if region is not None and pad:
        region = np.asarray(region, dtype=bool)
        if region.shape != g.x_shape:
            raise ValueError(f"region shape {region.shape} does not match x-block {g.x_shape}")
        region = np.pad(region, pad)
    vals = F(grad, g.k, g.has_t_axis)
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"{F.name} is infinite on some mollified normal")
    return _integrate(pg, vals, region)


def default_t_levels(u, t_spacing):
    """Enough t-levels to hold the whole graph."""
    top = float(u.values.max())
    return int(np.ceil(top / t_spacing)) + 1


def subgraph_energy(u, f, t_spacing, width=2.0, t_levels=None, region=None):
    """Surface energy of the subgraph of ``u`` under ``lift(f)``, for t > 0."""
    if not isinstance(u, GridFunction):
        raise TypeError("subgraph_energy needs a GridFunction")
    if t_levels is None:
        t_levels = default_t_levels(u, t_spacing)
    S = subgraph(u, t_levels, t_spacing)
    return surface_energy_mollified(S, lift(f), width, region=region, reflect_t=True)
