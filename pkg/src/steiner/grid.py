"""Regular grids split into an x-block and a y-block, plus grid data.

Axis layout of every array is ``(x_0, ..., x_{n-k-1}, y_0, ..., y_{k-1}[, t])``.
Spatial axes are centred: cell centres along an axis with ``N`` cells sit at
``(i - (N - 1) / 2) * h``, so odd counts contain 0 and even counts sit at
``+-(i + 1/2) * h``. The optional t-axis starts at zero with centres at
``(j + 1/2) * dt``.

A *column* is the y-block at one fixed x (and one fixed t-level when a t-axis
is present); most operations work column by column.
"""

import math
import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "GridFunction",
    "VoxelSet",
    "section",
    "essential_projection",
    "save",
    "load",
    "FormatError",
    "ball_volume",
]

MAGIC = b"STNR1"
_HEADER = struct.Struct("<5sBHHB")
_AXIS = struct.Struct("<Id")
KIND_FUNCTION = 0
KIND_SET = 1
MAX_CELLS = 1 << 34


def ball_volume(k):
    """Volume of the unit ball in R^k."""
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


@dataclass(frozen=True)
class Grid:
    """Geometry of a regular lattice.

    Parameters
    ----------
    dims : tuple of int
        Cell counts per axis, t-axis last if present.
    spacing : tuple of float
        Cell size per axis.
    split_k : int
        Number of y-axes (the trailing spatial axes).
    has_t_axis : bool
        Whether the last axis is the t-direction of a subgraph.
    """

    dims: tuple
    spacing: tuple
    split_k: int
    has_t_axis: bool = False

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        spacing = tuple(float(h) for h in self.spacing)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", spacing)
        if len(dims) != len(spacing):
            raise ValueError("dims and spacing must have the same length")
        if any(d < 1 for d in dims):
            raise ValueError(f"cell counts must be positive, got {dims}")
        if any(not (h > 0 and math.isfinite(h)) for h in spacing):
            raise ValueError(f"spacings must be positive and finite, got {spacing}")
        n = len(dims) - int(self.has_t_axis)
        if not 1 <= self.split_k <= n:
            raise ValueError(f"split_k must satisfy 1 <= k <= n={n}, got {self.split_k}")

    @classmethod
    def uniform(cls, dims, extent, split_k, has_t_axis=False):
        """Grid with cell size ``extent / N`` along each axis."""
        dims = tuple(dims)
        if np.ndim(extent) == 0:
            extent = (extent,) * len(dims)
        return cls(dims, tuple(e / d for e, d in zip(extent, dims)), split_k, has_t_axis)

    @property
    def n(self):
        return len(self.dims) - int(self.has_t_axis)

    @property
    def k(self):
        return self.split_k

    @property
    def ndim(self):
        return len(self.dims)

    @property
    def x_axes(self):
        return tuple(range(self.n - self.k))

    @property
    def y_axes(self):
        return tuple(range(self.n - self.k, self.n))

    @property
    def t_axis(self):
        return self.n if self.has_t_axis else None

    @property
    def x_shape(self):
        return tuple(self.dims[a] for a in self.x_axes)

    @property
    def y_shape(self):
        return tuple(self.dims[a] for a in self.y_axes)

    @property
    def column_shape(self):
        """Shape of the index space of columns: x-block, then t if present."""
        t = (self.dims[self.t_axis],) if self.has_t_axis else ()
        return self.x_shape + t

    @property
    def n_columns(self):
        return math.prod(self.column_shape)

    @property
    def n_ycells(self):
        return math.prod(self.y_shape)

    @property
    def cell_volume(self):
        return math.prod(self.spacing)

    @property
    def y_cell_volume(self):
        return math.prod(self.spacing[a] for a in self.y_axes)

    @property
    def x_cell_volume(self):
        return math.prod(self.spacing[a] for a in self.x_axes)

    @property
    def column_cell_volume(self):
        """Measure of one column index cell (x-cell times dt)."""
        t = self.spacing[self.t_axis] if self.has_t_axis else 1.0
        return self.x_cell_volume * t

    @property
    def omega_k(self):
        return ball_volume(self.k)

    @property
    def h(self):
        """Largest spacing, the nominal resolution."""
        return max(self.spacing)

    def centers(self, axis):
        """Cell-centre coordinates along one axis."""
        N, h = self.dims[axis], self.spacing[axis]
        if axis == self.t_axis:
            return (np.arange(N) + 0.5) * h
        return (np.arange(N) - (N - 1) / 2) * h

    def mesh(self, axes=None):
        """Broadcastable coordinate arrays, one per requested axis."""
        axes = range(self.ndim) if axes is None else axes
        out = []
        for a in axes:
            shape = [1] * self.ndim
            shape[a] = self.dims[a]
            out.append(self.centers(a).reshape(shape))
        return out

    def y_norm(self):
        """Broadcastable ``|y|`` of each cell centre."""
        r2 = sum(c**2 for c in self.mesh(self.y_axes))
        return np.sqrt(r2)

    # column layout ----------------------------------------------------
    def _column_perm(self):
        t = (self.t_axis,) if self.has_t_axis else ()
        return self.x_axes + t + self.y_axes

    def to_columns(self, arr):
        """Reshape a grid array into ``(n_columns, n_ycells)`` (C order)."""
        arr = np.asarray(arr)
        if arr.shape[: self.ndim] != self.dims:
            raise ValueError(f"array shape {arr.shape} does not match grid {self.dims}")
        moved = np.transpose(arr, self._column_perm())
        return np.ascontiguousarray(moved).reshape(self.n_columns, self.n_ycells)

    def from_columns(self, cols):
        """Inverse of :meth:`to_columns`."""
        perm = self._column_perm()
        shaped = np.asarray(cols).reshape(self.column_shape + self.y_shape)
        return np.ascontiguousarray(np.transpose(shaped, np.argsort(perm)))

    def without_t(self):
        if not self.has_t_axis:
            return self
        return Grid(self.dims[:-1], self.spacing[:-1], self.k, False)

    def with_t(self, levels, dt):
        if self.has_t_axis:
            raise ValueError("grid already has a t-axis")
        return Grid(self.dims + (int(levels),), self.spacing + (float(dt),), self.k, True)


def _readonly(a):
    a.setflags(write=False)
    return a


class GridFunction:
    """Non-negative finite samples, one per cell of ``grid``."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        values = np.array(values, dtype=np.float64)
        if values.shape != grid.dims:
            raise ValueError(f"values shape {values.shape} does not match grid {grid.dims}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function values must be finite")
        if np.any(values < 0):
            raise ValueError("grid function values must be non-negative")
        values[values == 0] = 0.0  # drop -0.0
        self.grid = grid
        self.values = _readonly(values)

    def columns(self):
        return self.grid.to_columns(self.values)

    def __repr__(self):
        return f"GridFunction(dims={self.grid.dims}, k={self.grid.k}, max={self.values.max():g})"


class VoxelSet:
    """Indicator of a set of cells of ``grid``."""

    __slots__ = ("grid", "mask")

    def __init__(self, grid, mask):
        mask = np.array(mask, dtype=bool)
        if mask.shape != grid.dims:
            raise ValueError(f"mask shape {mask.shape} does not match grid {grid.dims}")
        self.grid = grid
        self.mask = _readonly(mask)

    def columns(self):
        return self.grid.to_columns(self.mask)

    def section_count(self):
        """Number of set cells in each column, shaped like ``grid.column_shape``."""
        return self.columns().sum(axis=1).reshape(self.grid.column_shape)

    def section_measure(self):
        """k-volume L of every section."""
        return self.section_count() * self.grid.y_cell_volume

    def volume(self):
        return int(self.mask.sum()) * self.grid.cell_volume

    def __repr__(self):
        return f"VoxelSet(dims={self.grid.dims}, k={self.grid.k}, cells={int(self.mask.sum())})"


def _check_index(grid, s):
    s = tuple(int(i) for i in np.atleast_1d(s)) if not isinstance(s, tuple) else tuple(int(i) for i in s)
    shape = grid.column_shape
    if len(s) != len(shape):
        raise IndexError(f"slice index {s} needs {len(shape)} coordinates")
    for i, n in zip(s, shape):
        if not 0 <= i < n:
            raise IndexError(f"slice index {s} out of bounds for column shape {shape}")
    return s


def section(E, s):
    """The y-block of ``E`` at column ``s`` (x indices, then t index if present)."""
    g = E.grid
    s = _check_index(g, s)
    idx = [slice(None)] * g.ndim
    for a, i in zip(g.x_axes, s):
        idx[a] = i
    if g.has_t_axis:
        idx[g.t_axis] = s[-1]
    return E.mask[tuple(idx)]


def essential_projection(E):
    """Columns with a section of positive measure."""
    return E.section_count() > 0


# persistence ----------------------------------------------------------


class FormatError(ValueError):
    pass


def save(obj, path):
    """Write a GridFunction or VoxelSet in the STNR1 format."""
    g = obj.grid
    if isinstance(obj, GridFunction):
        kind = KIND_FUNCTION
        payload = np.ascontiguousarray(obj.values, dtype="<f8").tobytes()
    elif isinstance(obj, VoxelSet):
        kind = KIND_SET
        payload = np.ascontiguousarray(obj.mask, dtype=np.uint8).tobytes()
    else:
        raise TypeError(f"cannot save {type(obj).__name__}")
    parts = [_HEADER.pack(MAGIC, kind, g.n, g.k, int(g.has_t_axis))]
    parts += [_AXIS.pack(d, h) for d, h in zip(g.dims, g.spacing)]
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))
        fh.write(payload)


def header_size(naxes):
    return _HEADER.size + naxes * _AXIS.size


def read_header(buf):
    """Parse the STNR1 header; returns ``(kind, grid, offset)``."""
    if len(buf) < _HEADER.size:
        raise FormatError("truncated header")
    magic, kind, n, k, has_t = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise FormatError("bad magic")
    if kind not in (KIND_FUNCTION, KIND_SET):
        raise FormatError(f"unknown kind {kind}")
    if has_t not in (0, 1):
        raise FormatError(f"bad t-axis flag {has_t}")
    naxes = n + has_t
    if len(buf) < header_size(naxes):
        raise FormatError("truncated header")
    dims, spacing = [], []
    off = _HEADER.size
    for _ in range(naxes):
        d, h = _AXIS.unpack_from(buf, off)
        off += _AXIS.size
        dims.append(d)
        spacing.append(h)
    cells = math.prod(dims)
    if cells > MAX_CELLS:
        raise FormatError(f"dimension overflow: {cells} cells")
    try:
        grid = Grid(tuple(dims), tuple(spacing), k, bool(has_t))
    except ValueError as exc:
        raise FormatError(f"invalid grid: {exc}") from None
    return kind, grid, off


def load(path):
    """Read an STNR1 file back into a GridFunction or VoxelSet."""
    with open(path, "rb") as fh:
        buf = fh.read()
    kind, grid, off = read_header(buf)
    cells = math.prod(grid.dims)
    width = 8 if kind == KIND_FUNCTION else 1
    expected = off + cells * width
    if len(buf) < expected:
        raise FormatError(f"truncated payload: expected {expected} bytes, got {len(buf)}")
    if len(buf) > expected:
        raise FormatError(f"trailing bytes: expected {expected} bytes, got {len(buf)}")
    if kind == KIND_FUNCTION:
        values = np.frombuffer(buf, dtype="<f8", count=cells, offset=off).reshape(grid.dims)
        if np.isnan(values).any():
            raise FormatError("NaN in payload")
        try:
            return GridFunction(grid, values.astype(np.float64))
        except ValueError as exc:
            raise FormatError(str(exc)) from None
    raw = np.frombuffer(buf, dtype=np.uint8, count=cells, offset=off)
    if np.any(raw > 1):
        raise FormatError("set payload must contain only 0 and 1")
    return VoxelSet(grid, raw.reshape(grid.dims).astype(bool))
