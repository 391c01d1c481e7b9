"""Brute-force reference implementations, written with plain loops.

Nothing here imports the library's algorithms; only array shapes and grid
geometry (cell centres) are shared, and those are recomputed by hand.
"""

import itertools
import math
from fractions import Fraction

import numpy as np


def centre(i, N, h):
    return (i - (N - 1) / 2) * h


def cell_ranking(shape, spacing):
    """y-cells ranked by exact |y|^2, ties by ascending coordinates."""
    cells = list(itertools.product(*[range(N) for N in shape]))

    def key(c):
        # doubled offsets are exact integers; Fractions keep spacings exact
        r2 = sum(Fraction(2 * i - (N - 1)) ** 2 * Fraction(h) ** 2 for i, N, h in zip(c, shape, spacing))
        coords = tuple(Fraction(2 * i - (N - 1)) * Fraction(h) for i, N, h in zip(c, shape, spacing))
        return (r2, coords)

    return sorted(cells, key=key)


def rearrange(values, n_x, spacing):
    """Per x-column: largest value to the first ranked cell, and so on."""
    values = np.asarray(values, dtype=float)
    out = np.empty_like(values)
    x_shape, y_shape = values.shape[:n_x], values.shape[n_x:]
    ranking = cell_ranking(y_shape, spacing[n_x:])
    for x in itertools.product(*[range(N) for N in x_shape]):
        col = sorted((values[x + c] for c in ranking), reverse=True)
        for v, c in zip(col, ranking):
            out[x + c] = v
    return out


def symmetrize_set(mask, n_x, spacing):
    mask = np.asarray(mask, dtype=bool)
    out = np.zeros_like(mask)
    x_shape, y_shape = mask.shape[:n_x], mask.shape[n_x:]
    ranking = cell_ranking(y_shape, spacing[n_x:])
    for x in itertools.product(*[range(N) for N in x_shape]):
        m = sum(bool(mask[x + c]) for c in ranking)
        for c in ranking[:m]:
            out[x + c] = True
    return out


def value_at(u, idx):
    """Zero extension outside the array."""
    if any(i < 0 or i >= N for i, N in zip(idx, u.shape)):
        return 0.0
    return float(u[idx])


def forward_integral(u, spacing, f):
    """Sum of f(forward gradient) over the grid plus a one-cell zero border.

    ``f`` receives the full gradient vector as a list.
    """
    u = np.asarray(u, dtype=float)
    vol = math.prod(spacing)
    total = 0.0
    for idx in itertools.product(*[range(-1, N + 1) for N in u.shape]):
        g = []
        for a, h in enumerate(spacing):
            nb = list(idx)
            nb[a] += 1
            g.append((value_at(u, tuple(nb)) - value_at(u, idx)) / h)
        total += f(g) * vol
    return total


def face_perimeter(mask, spacing, weight):
    """Sum over exposed faces of ``weight(axis, sign)`` * face area.

    ``sign`` is the sign of the inner normal along ``axis``.
    """
    mask = np.asarray(mask, dtype=bool)
    vol = math.prod(spacing)
    total = 0.0
    for idx in itertools.product(*[range(N) for N in mask.shape]):
        if not mask[idx]:
            continue
        for a, h in enumerate(spacing):
            for step in (1, -1):
                nb = list(idx)
                nb[a] += step
                inside = 0 <= nb[a] < mask.shape[a] and mask[tuple(nb)]
                if not inside:
                    # exposed face on the +step side: inner normal points -step
                    total += weight(a, -step) * vol / h
    return total


def count_above(col, t):
    return sum(1 for v in col if v > t)


def barycentre(section, spacing):
    """Centroid of the true cells of a k-dim boolean array."""
    pts = [tuple(centre(i, N, h) for i, N, h in zip(c, section.shape, spacing))
           for c in itertools.product(*[range(N) for N in section.shape]) if section[c]]
    k = section.ndim
    return [sum(p[d] for p in pts) / len(pts) for d in range(k)]
