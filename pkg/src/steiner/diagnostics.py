"""Numerical checks of symmetrization inequalities and their equality cases."""

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .functionals import (
    dirichlet_integral,
    mollified_gradient,
    surface_energy_faces,
    surface_energy_mollified,
)
from .grid import GridFunction, VoxelSet, ball_volume, essential_projection
from .rearrange import (
    codim1_symmetrize,
    distribution,
    slice_max,
    steiner_rearrange,
    steiner_symmetrize_set,
)

__all__ = [
    "GapReport",
    "ChainReport",
    "SliceReport",
    "ConditionReport",
    "LambdaDerivativeReport",
    "polya_szego_report",
    "perimeter_report",
    "chain_report",
    "slice_analysis",
    "condition_report",
    "critical_measure",
    "verify_lambda_derivatives",
    "coarea_irregularity_probe",
    "write_csv",
]


def write_csv(path, header, rows):
    """Write rows with ``repr`` floats so every value round-trips exactly."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


@dataclass(frozen=True)
class GapReport:
    value_original: float
    value_symmetrized: float
    gap: float
    h: float
    scheme: str
    functional: str

    def to_dict(self):
        return {
            "functional": self.functional,
            "scheme": self.scheme,
            "h": self.h,
            "value_original": self.value_original,
            "value_symmetrized": self.value_symmetrized,
            "gap": self.gap,
        }


def _gap(orig, sym, h, scheme, functional):
    orig, sym = float(orig), float(sym)
    return GapReport(orig, sym, orig - sym, float(h), scheme, functional)


def polya_szego_report(u, f, scheme="forward", region=None):
    """Gradient integral of ``u`` and of ``u^sigma``; the sign is not judged here."""
    us = steiner_rearrange(u)
    return _gap(
        dirichlet_integral(u, f, region, scheme),
        dirichlet_integral(us, f, region, scheme),
        u.grid.h,
        scheme,
        "dirichlet",
    )


def perimeter_report(E, F, scheme="faces", width=2.0, region=None, boundary="constant"):
    """Surface energy of ``E`` and of its Steiner symmetral."""
    Es = steiner_symmetrize_set(E)
    if scheme == "faces":
        a, b = surface_energy_faces(E, F, region), surface_energy_faces(Es, F, region)
        tag = "faces"
    elif scheme == "mollified":
        a = surface_energy_mollified(E, F, width, region, boundary)
        b = surface_energy_mollified(Es, F, width, region, boundary)
        tag = f"mollified(width={width:g})"
    else:
        raise ValueError(f"unknown surface scheme {scheme!r}")
    return _gap(a, b, E.grid.h, tag, F.name)


@dataclass(frozen=True)
class ChainReport:
    labels: list
    values: list
    h: float
    scheme: str

    def increments(self):
        """``values[i + 1] - values[i]``; non-positive for a decreasing chain."""
        return list(np.diff(self.values))


def chain_report(u, f, scheme="forward", region=None):
    """Functional along ``u, u^{S_1}, (u^{S_1})^{S_2}, ..., u^sigma``.

    ``S_i`` is the one-dimensional symmetrization along the i-th y-axis. For
    ``k = 1`` the single codim-1 step already is ``u^sigma`` and the chain has
    two entries.
    """
    g = u.grid
    labels, values = ["u"], [dirichlet_integral(u, f, region, scheme)]
    if g.k > 1:
        v = u
        for i, axis in enumerate(g.y_axes, start=1):
            v = codim1_symmetrize(v, axis)
            labels.append(f"S{i}")
            values.append(dirichlet_integral(v, f, region, scheme))
    labels.append("sigma")
    values.append(dirichlet_integral(steiner_rearrange(u), f, region, scheme))
    return ChainReport(labels, [float(v) for v in values], g.h, scheme)


# slice statistics -------------------------------------------------------


@dataclass
class SliceReport:
    """Per-section statistics; one row per non-empty section.

    ``column`` holds the x indices of each row, ``t`` the level (threshold for
    functions, t-index centre for sets with a t-axis; NaN otherwise).
    ``delta`` is ``p - k omega_k^(1/k) L^((k-1)/k)``.
    """

    k: int
    column: np.ndarray
    t: np.ndarray
    L: np.ndarray
    p: np.ndarray
    R: np.ndarray
    beta: np.ndarray
    delta: np.ndarray
    perimeter_scheme: str
    y_spacing: tuple = field(default=())

    @property
    def ball_score(self):
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.p > 0, self.delta / self.p, 0.0)

    def __len__(self):
        return self.L.size

    def max_beta(self):
        return float(np.abs(self.beta).max()) if len(self) else 0.0

    def header(self):
        cols = [f"x{i}" for i in range(self.column.shape[1])]
        return cols + ["t", "L", "p", "R"] + [f"beta_{i}" for i in range(self.k)] + [
            "delta",
            "ball_score",
        ]

    def rows(self):
        score = self.ball_score
        for r in range(len(self)):
            yield (
                [int(c) for c in self.column[r]]
                + [float(self.t[r]), float(self.L[r]), float(self.p[r]), float(self.R[r])]
                + [float(b) for b in self.beta[r]]
                + [float(self.delta[r]), float(score[r])]
            )

    def to_csv(self, path):
        write_csv(path, self.header(), self.rows())

    def to_dict(self):
        return {
            "k": self.k,
            "perimeter_scheme": self.perimeter_scheme,
            "columns": self.header(),
            "rows": [list(r) for r in self.rows()],
        }


def _section_perimeter(masks, spacing, scheme, width):
    """(k-1)-measure of the boundary of each k-dim mask in ``masks[c, ...]``."""
    k = masks.ndim - 1
    ycell = float(np.prod(spacing))
    if scheme == "faces":
        p = np.zeros(masks.shape[0])
        for a in range(k):
            pad = [(0, 0)] * masks.ndim
            pad[a + 1] = (1, 1)
            padded = np.pad(masks, pad).astype(np.int8)
            trans = np.abs(np.diff(padded, axis=a + 1)).sum(axis=tuple(range(1, masks.ndim)))
            p += trans * (ycell / spacing[a])
        return p
    if scheme == "mollified":
        chi = masks.astype(np.float64)
        sm = ndimage.gaussian_filter(chi, sigma=(0.0,) + (float(width),) * k, mode="constant", truncate=4.0)
        sq = np.zeros_like(sm)
        for a in range(k):
            pad = [(0, 0)] * sm.ndim
            pad[a + 1] = (1, 1)
            pp = np.pad(sm, pad)
            sl_hi = [slice(None)] * sm.ndim
            sl_lo = [slice(None)] * sm.ndim
            sl_hi[a + 1] = slice(2, None)
            sl_lo[a + 1] = slice(None, -2)
            sq += ((pp[tuple(sl_hi)] - pp[tuple(sl_lo)]) / (2 * spacing[a])) ** 2
        return np.sqrt(sq).sum(axis=tuple(range(1, masks.ndim))) * ycell
    raise ValueError(f"unknown perimeter scheme {scheme!r}")


def _stats(masks, grid, scheme, width):
    k = grid.k
    spacing = tuple(grid.spacing[a] for a in grid.y_axes)
    ycell = grid.y_cell_volume
    flat = masks.reshape(masks.shape[0], grid.n_ycells)
    counts = flat.sum(axis=1)
    L = counts * ycell
    p = _section_perimeter(masks, spacing, scheme, width)
    omega = ball_volume(k)
    R = (L / omega) ** (1.0 / k)
    centers = np.meshgrid(*[grid.centers(a) for a in grid.y_axes], indexing="ij")
    with np.errstate(invalid="ignore", divide="ignore"):
        beta = np.stack([flat @ c.ravel() / counts for c in centers], axis=-1)
    delta = p - k * omega ** (1.0 / k) * L ** ((k - 1) / k)
    return L, p, R, beta, delta


def slice_analysis(obj, t_levels=None, perimeter="faces", width=2.0):
    """Section statistics of a set, or of the superlevel sets of a function.

    For a :class:`VoxelSet` every column with a non-empty section gives a row.
    For a :class:`GridFunction` each (column, threshold) pair with a
    non-empty superlevel section gives a row.
    """
    g = obj.grid
    if isinstance(obj, VoxelSet):
        cols = obj.columns()
        masks = cols.reshape((cols.shape[0],) + g.y_shape)
        idx = np.array(list(np.ndindex(*g.column_shape)), dtype=np.int64).reshape(len(cols), -1)
        if g.has_t_axis:
            t = g.centers(g.t_axis)[idx[:, -1]]
            idx = idx[:, :-1]
        else:
            t = np.full(len(cols), np.nan)
    elif isinstance(obj, GridFunction):
        if t_levels is None:
            raise ValueError("slice_analysis of a function needs t_levels")
        levels = np.asarray(t_levels, dtype=np.float64).ravel()
        cols = obj.columns()
        n_c = cols.shape[0]
        masks = (cols[:, None, :] > levels[None, :, None]).reshape((n_c * levels.size,) + g.y_shape)
        base = np.array(list(np.ndindex(*g.column_shape)), dtype=np.int64).reshape(n_c, -1)
        idx = np.repeat(base, levels.size, axis=0)
        t = np.tile(levels, n_c)
    else:
        raise TypeError(f"cannot analyse {type(obj).__name__}")
    keep = masks.reshape(masks.shape[0], g.n_ycells).any(axis=1)
    masks, idx, t = masks[keep], idx[keep], t[keep]
    L, p, R, beta, delta = _stats(masks, g, perimeter, width)
    return SliceReport(
        g.k, idx, t, L, p, R, beta, delta,
        perimeter if perimeter == "faces" else f"mollified(width={width:g})",
        tuple(g.spacing[a] for a in g.y_axes),
    )


# conditions -----------------------------------------------------------------


@dataclass(frozen=True)
class ConditionReport:
    critical_measure: float
    projection_connected: bool
    y_bounded: bool
    boundary_vertical_fraction: float
    theta: float
    tau: float

    def to_dict(self):
        return {
            "critical_measure": self.critical_measure,
            "projection_connected": bool(self.projection_connected),
            "y_bounded": bool(self.y_bounded),
            "boundary_vertical_fraction": self.boundary_vertical_fraction,
            "theta": self.theta,
            "tau": self.tau,
        }


def _critical_mask(u, exclude_zero=False):
    """Interior cells where every central y-difference vanishes exactly and u < M."""
    g = u.grid
    v = u.values
    interior = [slice(None)] * g.ndim
    for a in g.y_axes:
        interior[a] = slice(1, -1)
    interior = tuple(interior)
    zero = np.ones(v[interior].shape, dtype=bool)
    for a in g.y_axes:
        hi = [slice(None)] * g.ndim
        lo = [slice(None)] * g.ndim
        for b in g.y_axes:
            hi[b] = lo[b] = slice(1, -1)
        hi[a], lo[a] = slice(2, None), slice(None, -2)
        zero &= v[tuple(hi)] == v[tuple(lo)]
    M = slice_max(u).reshape(g.x_shape + (1,) * g.k)
    M = np.broadcast_to(M, g.dims)[interior]
    vi = v[interior]
    below = (vi < M) if exclude_zero else ((M == 0) | (vi < M))
    crit = zero & below
    if exclude_zero:
        crit &= vi > 0
    out = np.zeros(g.dims, dtype=bool)
    out[interior] = crit
    return out


def critical_measure(u):
    """Measure of ``{grad_y u = 0} & {M(x) = 0 or u < M(x)}`` (interior cells)."""
    return int(_critical_mask(u).sum()) * u.grid.cell_volume


def _touches_y_boundary(mask, grid):
    for a in grid.y_axes:
        if np.take(mask, 0, axis=a).any() or np.take(mask, -1, axis=a).any():
            return True
    return False


def condition_report(obj, theta=None, tau=0.1, width=2.0):
    """Discrete proxies for the critical-set and domain conditions.

    For a function the domain is taken to be its support. ``y_bounded`` means
    the domain stays off the outermost y-cells, so the grid's y-extent bounds
    it. The vertical-boundary share only counts cells whose x lies in the
    essential projection eroded by the mollifier's reach, i.e. strictly
    inside the cylinder over the projection.
    """
    g = obj.grid
    if g.has_t_axis:
        raise ValueError("condition_report works on grids without a t-axis")
    if isinstance(obj, GridFunction):
        crit = critical_measure(obj)
        domain = VoxelSet(g, obj.values > 0)
    elif isinstance(obj, VoxelSet):
        crit = 0.0
        domain = obj
    else:
        raise TypeError(f"cannot inspect {type(obj).__name__}")
    theta = 0.1 / g.h if theta is None else float(theta)

    proj = essential_projection(domain)
    if g.k == g.n:
        connected = True
        inner = np.ones((), dtype=bool)
    else:
        _, ncomp = ndimage.label(proj)
        connected = ncomp <= 1
        reach = int(np.ceil(4 * width)) + 1
        inner = ndimage.binary_erosion(proj, iterations=reach, border_value=0)
    y_bounded = not _touches_y_boundary(domain.mask, g)

    grad = mollified_gradient(domain, width)
    mag = np.sqrt(np.sum(grad**2, axis=-1))
    ymag = np.sqrt(np.sum(grad[..., list(g.y_axes)] ** 2, axis=-1))
    inner_full = np.broadcast_to(inner.reshape(g.x_shape + (1,) * g.k), g.dims)
    on = (mag > theta) & inner_full
    total = float(mag[on].sum())
    if total == 0:
        frac = 0.0
    else:
        vert = on & (ymag < tau * mag)
        frac = float(mag[vert].sum()) / total
    return ConditionReport(float(crit), bool(connected), bool(y_bounded), frac, theta, float(tau))


# distribution-function derivatives --------------------------------------


@dataclass
class LambdaDerivativeReport:
    direction: object
    delta: float
    column: np.ndarray
    t: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    flagged: np.ndarray

    @property
    def error(self):
        return np.where(self.flagged, np.nan, np.abs(self.lhs - self.rhs))

    def max_error(self):
        err = self.error[~self.flagged]
        return float(err.max()) if err.size else float("nan")

    def header(self):
        return [f"x{i}" for i in range(self.column.shape[1])] + ["t", "lhs", "rhs", "error", "flagged"]

    def rows(self):
        err = self.error
        for r in range(self.t.size):
            yield [int(c) for c in self.column[r]] + [
                float(self.t[r]), float(self.lhs[r]), float(self.rhs[r]), float(err[r]), bool(self.flagged[r])
            ]

    def to_csv(self, path):
        write_csv(path, self.header(), self.rows())


def verify_lambda_derivatives(u, direction, thresholds, delta=None):
    """Compare finite differences of ``lambda_u`` with coarea shell averages.

    ``direction`` is ``"t"`` or the index of an x-axis. For ``"t"`` the left
    side is the central difference ``(lambda(t + d) - lambda(t - d)) / 2d`` and
    the right side is ``-|{t < u < t + d}| / d``. For an x-axis ``i`` the left
    side is the central difference of ``lambda`` in ``x_i`` and the right side
    ``(1/d) * integral over {t < u < t + d} of d_i u``. The x-difference uses
    a step of ``round(d / h_i)`` cells (at least one). Rows whose shell is
    empty are flagged and left out of the error.
    """
    g = u.grid
    if g.has_t_axis:
        raise ValueError("verify_lambda_derivatives needs a grid without a t-axis")
    delta = 4.0 * g.h if delta is None else float(delta)
    levels = np.asarray(thresholds, dtype=np.float64).ravel()
    cols = u.columns()
    ycell = g.y_cell_volume
    col_idx = np.array(list(np.ndindex(*g.column_shape)), dtype=np.int64).reshape(cols.shape[0], -1)

    if direction == "t":
        if np.any(levels - delta < 0):
            raise ValueError("thresholds must be >= delta for the t-direction")
        lam = lambda s: np.count_nonzero(cols > s, axis=1) * ycell  # noqa: E731
        lhs, rhs, flag = [], [], []
        for t in levels:
            lhs.append((lam(t + delta) - lam(t - delta)) / (2 * delta))
            shell = np.count_nonzero((cols > t) & (cols < t + delta), axis=1)
            rhs.append(-shell * ycell / delta)
            flag.append(shell == 0)
        stack = lambda a: np.stack(a, axis=1).ravel()  # noqa: E731
        return LambdaDerivativeReport(
            "t", delta, np.repeat(col_idx, levels.size, axis=0), np.tile(levels, cols.shape[0]),
            stack(lhs), stack(rhs), stack(flag),
        )

    i = int(direction)
    if i not in g.x_axes:
        raise ValueError(f"direction {direction!r} is neither 't' nor an x-axis index")
    h = g.spacing[i]
    # the x-step matches the shell width so both sides average over one scale
    m = max(1, int(round(delta / h)))
    if g.dims[i] <= 2 * m:
        raise ValueError(f"x-axis {i} has too few cells for a step of {m} cells")
    inner = np.arange(m, g.dims[i] - m)
    dist = distribution(u, levels).values  # column_shape + (T,)
    lhs_grid = (np.take(dist, inner + m, axis=i) - np.take(dist, inner - m, axis=i)) / (2 * m * h)

    du = (np.take(u.values, inner + m, axis=i) - np.take(u.values, inner - m, axis=i)) / (2 * m * h)
    ui = np.take(u.values, inner, axis=i)
    inner_dims = list(g.dims)
    inner_dims[i] = inner.size
    n_in = int(np.prod(inner_dims[: g.n - g.k]))
    du_c = np.ascontiguousarray(du).reshape(n_in, -1)
    ui_c = np.ascontiguousarray(ui).reshape(n_in, -1)
    rhs, flag = [], []
    for t in levels:
        shell = (ui_c > t) & (ui_c < t + delta)
        rhs.append(np.where(shell, du_c, 0.0).sum(axis=1) * ycell / delta)
        flag.append(~shell.any(axis=1))
    rhs = np.stack(rhs, axis=1)
    flag = np.stack(flag, axis=1)
    lhs = lhs_grid.reshape(n_in, levels.size)
    idx = np.array(list(np.ndindex(*inner_dims[: g.n - g.k])), dtype=np.int64).reshape(n_in, -1)
    idx[:, i] += m
    return LambdaDerivativeReport(
        i, delta, np.repeat(idx, levels.size, axis=0), np.tile(levels, n_in),
        lhs.ravel(), rhs.ravel(), flag.ravel(),
    )


def coarea_irregularity_probe(u, thresholds=None):
    """Total t-variation of the critical part of the distribution function.

    The critical part counts interior cells with ``grad_y u = 0`` (exact zero
    of the central differences) and ``0 < u < M(x)``; the slice maximum itself
    is excluded. Its decrease between consecutive thresholds is summed over
    all columns and weighted by the x-cell volume.
    """
    g = u.grid
    crit = _critical_mask(u, exclude_zero=True)
    if thresholds is None:
        top = float(u.values.max())
        thresholds = np.linspace(0.0, top, 65) if top > 0 else np.array([0.0])
    levels = np.asarray(thresholds, dtype=np.float64).ravel()
    cols = g.to_columns(u.values)
    ccols = g.to_columns(crit)
    lam2 = np.stack(
        [np.count_nonzero(ccols & (cols > t), axis=1) * g.y_cell_volume for t in levels], axis=1
    )
    lam2 = np.concatenate([lam2, np.zeros((lam2.shape[0], 1))], axis=1)
    mass = np.abs(np.diff(lam2, axis=1)).sum(axis=1)
    return float(mass.sum() * g.x_cell_volume)
