"""Convex gradient integrands f, their recession functions and surface lifts.

Gradient vectors are laid out like grid axes: the first ``n - k`` components
are the x-part, the last ``k`` the y-part. Surface normals of subgraphs carry
one more trailing component, the t-part. All evaluators are vectorized over
leading axes.
"""

import numpy as np

__all__ = [
    "RadialAffineIntegrand",
    "PowerIntegrand",
    "SurfaceIntegrand",
    "RecessionError",
    "recession",
    "lift",
    "euclidean_norm",
    "y_norm",
    "homogeneity_selftest",
    "random_affine",
]


class RecessionError(ValueError):
    pass


def _split(xi, k):
    xi = np.asarray(xi, dtype=np.float64)
    n_x = xi.shape[-1] - k
    if n_x < 0:
        raise ValueError(f"vector of length {xi.shape[-1]} has no room for k={k}")
    return xi[..., :n_x], np.sqrt(np.sum(xi[..., n_x:] ** 2, axis=-1))


class RadialAffineIntegrand:
    """``f(xi) = max_j (a_j . xi_x + b_j |xi_y| + c_j)^+``.

    Parameters
    ----------
    pieces : iterable of (a, b, c)
        ``a`` has length ``n - k``; ``b >= 0``; ``c <= 0``.
    n_x : int, optional
        Length of the x-part; needed only when ``pieces`` is empty.
    """

    strictly_convex = False

    def __init__(self, pieces, n_x=None):
        a_list, b_list, c_list = [], [], []
        for a, b, c in pieces:
            a = np.atleast_1d(np.asarray(a, dtype=np.float64)) if np.size(a) else np.zeros(0)
            b, c = float(b), float(c)
            if b < 0:
                raise ValueError(f"b_j must be >= 0 for radial symmetry, got {b}")
            if c > 0:
                raise ValueError(f"c_j must be <= 0 so that f(0) = 0, got {c}")
            if not (np.all(np.isfinite(a)) and np.isfinite(b) and np.isfinite(c)):
                raise ValueError("piece coefficients must be finite")
            a_list.append(a)
            b_list.append(b)
            c_list.append(c)
        lengths = {a.size for a in a_list}
        if n_x is not None:
            lengths.add(int(n_x))
        if len(lengths) > 1:
            raise ValueError(f"inconsistent x-part lengths {sorted(lengths)}")
        self.n_x = lengths.pop() if lengths else 0
        m = len(a_list)
        self.a = np.array(a_list).reshape(m, self.n_x)
        self.b = np.array(b_list)
        self.c = np.array(c_list)

    @property
    def pieces(self):
        return [(self.a[j].copy(), float(self.b[j]), float(self.c[j])) for j in range(len(self.b))]

    def _eval(self, xi_x, r, c_scale):
        out = np.zeros(np.shape(r))
        for j in range(self.b.size):
            val = xi_x @ self.a[j] + self.b[j] * r + self.c[j] * c_scale
            np.maximum(out, val, out=out)
        return out

    def __call__(self, xi, k):
        xi_x, r = _split(xi, k)
        if xi_x.shape[-1] != self.n_x and self.b.size:
            raise ValueError(f"expected x-part of length {self.n_x}, got {xi_x.shape[-1]}")
        return self._eval(xi_x, r, 1.0)

    evaluate = __call__

    def linear_growth_constant(self):
        """``C`` with ``f(xi) <= C (1 + |xi|)``."""
        if not self.b.size:
            return 0.0
        return float(np.max(np.linalg.norm(self.a, axis=1) + self.b))

    def __repr__(self):
        return f"RadialAffineIntegrand({len(self.b)} pieces, n_x={self.n_x})"


class PowerIntegrand:
    """``f(xi) = alpha |xi_x|^p + beta |xi_y|^p`` with ``p >= 1``."""

    def __init__(self, alpha, beta, p):
        alpha, beta, p = float(alpha), float(beta), float(p)
        if alpha < 0 or beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if not p >= 1:
            raise ValueError(f"exponent must be >= 1, got {p}")
        self.alpha, self.beta, self.p = alpha, beta, p

    @property
    def strictly_convex(self):
        return self.p > 1 and self.alpha > 0 and self.beta > 0

    @property
    def trivial(self):
        return self.alpha == 0 and self.beta == 0

    def __call__(self, xi, k):
        xi_x, r = _split(xi, k)
        out = self.beta * r**self.p
        if self.alpha:
            out = out + self.alpha * np.sqrt(np.sum(xi_x**2, axis=-1)) ** self.p
        return out

    evaluate = __call__

    def __repr__(self):
        return f"PowerIntegrand(alpha={self.alpha:g}, beta={self.beta:g}, p={self.p:g})"


def recession(f):
    """Recession function ``f_inf(z) = lim f(tz)/t``, computed exactly."""
    if isinstance(f, RadialAffineIntegrand):
        return RadialAffineIntegrand(
            [(a, b, 0.0) for a, b, _ in f.pieces], n_x=f.n_x
        )
    if isinstance(f, PowerIntegrand):
        if f.p == 1 or f.trivial:
            return f
        raise RecessionError("recession infinite")
    raise TypeError(f"no recession rule for {type(f).__name__}")


class SurfaceIntegrand:
    """Positively 1-homogeneous integrand of a normal vector.

    ``radial(xi_x, r, xi_t)`` evaluates ``F~`` where ``r = |xi_y|``; ``xi_t``
    is ``None`` for integrands of sets without a t-axis. The value may be
    ``+inf`` when ``may_be_infinite`` is set.
    """

    def __init__(self, radial, name, may_be_infinite=False, needs_t=False):
        self.radial = radial
        self.name = name
        self.may_be_infinite = may_be_infinite
        self.needs_t = needs_t

    def __call__(self, xi, k, has_t=None):
        xi = np.asarray(xi, dtype=np.float64)
        has_t = self.needs_t if has_t is None else has_t
        if has_t:
            space, xi_t = xi[..., :-1], xi[..., -1]
        else:
            if self.needs_t:
                raise ValueError(f"{self.name} needs a t-component")
            space, xi_t = xi, None
        xi_x, r = _split(space, k)
        return self.radial(xi_x, r, xi_t)

    def __repr__(self):
        return f"SurfaceIntegrand({self.name})"


def _norm_all(xi_x, r, xi_t):
    s = np.sum(xi_x**2, axis=-1) + r**2
    if xi_t is not None:
        s = s + xi_t**2
    return np.sqrt(s)


def euclidean_norm():
    """``F(nu) = |nu|``: the perimeter."""
    return SurfaceIntegrand(_norm_all, "euclidean")


def y_norm():
    """``F(nu) = |nu_y|``."""
    return SurfaceIntegrand(lambda xi_x, r, xi_t: np.asarray(r, dtype=np.float64) + 0.0, "y_norm")


def lift(f):
    """Surface integrand ``F_f`` on normals to the subgraph of ``u``.

    For ``xi_t < 0`` it is ``f(-xi_space / xi_t) (-xi_t)``; for ``xi_t >= 0``
    it is the recession function of ``f``.
    """
    if isinstance(f, RadialAffineIntegrand):
        a, b, c = f.a, f.b, f.c

        def radial(xi_x, r, xi_t):
            s = np.maximum(-xi_t, 0.0)
            out = np.zeros(np.shape(r))
            for j in range(b.size):
                np.maximum(out, xi_x @ a[j] + b[j] * r + c[j] * s, out=out)
            return out

        return SurfaceIntegrand(radial, f"lift({f!r})", needs_t=True)

    if isinstance(f, PowerIntegrand):
        alpha, beta, p = f.alpha, f.beta, f.p

        def radial(xi_x, r, xi_t):
            xn = np.sqrt(np.sum(xi_x**2, axis=-1))
            top = alpha * xn**p + beta * r**p
            neg = xi_t < 0
            out = np.empty(np.shape(r))
            with np.errstate(divide="ignore", invalid="ignore"):
                s = np.where(neg, -xi_t, 1.0)
                out[...] = np.where(neg, top / s ** (p - 1), 0.0)
            if p == 1:
                out[~neg] = top[~neg]
            else:
                nz = (~neg) & (top > 0)
                out[nz] = np.inf
            return out

        return SurfaceIntegrand(radial, f"lift({f!r})", may_be_infinite=p > 1, needs_t=True)

    raise TypeError(f"no lift rule for {type(f).__name__}")


def homogeneity_selftest(F, k, dim, samples=1000, seed=0, has_t=None):
    """Worst relative defect of ``F(l xi) = l F(xi)`` and of ``F(0) = 0``.

    Returns a dict with ``defect`` (max of ``|F(l xi) - l F(xi)| / (1 + l |xi|)``
    over random ``xi`` and ``l`` in (0, 10]) and ``zero_value``.
    """
    rng = np.random.default_rng(seed)
    xi = rng.normal(size=(samples, dim))
    lam = rng.uniform(0.0, 10.0, size=samples)
    lam[lam == 0] = 10.0
    with np.errstate(invalid="ignore"):
        lhs = F(xi * lam[:, None], k, has_t)
        rhs = lam * F(xi, k, has_t)
        both_inf = np.isinf(lhs) & np.isinf(rhs)
        diff = np.where(both_inf, 0.0, np.abs(lhs - rhs))
    diff = np.where(np.isnan(diff), np.inf, diff)
    rel = diff / (1.0 + lam * np.linalg.norm(xi, axis=1))
    zero = float(F(np.zeros((1, dim)), k, has_t)[0])
    defect = float(rel.max())
    if zero != 0.0:
        defect = max(defect, abs(zero))
    return {"defect": defect, "zero_value": zero, "samples": samples}


def random_affine(n_x, pieces=5, seed=0):
    """Radial-affine integrand with random admissible pieces.

    ``a ~ N(0, 1/4)``, ``b ~ U(0.2, 2)``, ``c ~ -U(0, 1)``; one piece keeps
    ``c = 0`` so the integrand has genuine linear growth from the origin.
    """
    rng = np.random.default_rng(seed)
    out = []
    for j in range(int(pieces)):
        a = 0.5 * rng.normal(size=n_x)
        b = rng.uniform(0.2, 2.0)
        c = 0.0 if j == 0 else -rng.uniform(0.0, 1.0)
        out.append((a, b, c))
    return RadialAffineIntegrand(out, n_x=n_x)
