import numpy as np
import pytest

from steiner.integrand import (
    PowerIntegrand,
    RadialAffineIntegrand,
    RecessionError,
    SurfaceIntegrand,
    euclidean_norm,
    homogeneity_selftest,
    lift,
    random_affine,
    recession,
    y_norm,
)


def test_single_piece_is_y_norm():
    f = RadialAffineIntegrand([((0.0,), 1.0, 0.0)])
    xi = np.array([[0.7, 3.0], [-2.0, -4.0]])
    np.testing.assert_allclose(f(xi, 1), [3.0, 4.0])


def test_affine_piece_value():
    f = RadialAffineIntegrand([((1.0,), 0.0, -1.0)])
    assert f(np.array([3.0, 0.0]), 1) == pytest.approx(2.0)


def test_value_at_zero_and_empty_pieces():
    f = random_affine(2, 5, seed=1)
    assert f(np.zeros(4), 2) == 0.0
    g = RadialAffineIntegrand([], n_x=1)
    assert g(np.array([5.0, 1.0]), 1) == 0.0


def test_radial_in_y():
    f = random_affine(1, 5, seed=2)
    rng = np.random.default_rng(0)
    for _ in range(100):
        x = rng.normal()
        y = rng.normal(size=2)
        rot = np.array([[np.cos(1.1), -np.sin(1.1)], [np.sin(1.1), np.cos(1.1)]])
        a = f(np.r_[x, y], 2)
        b = f(np.r_[x, rot @ y], 2)
        assert a == pytest.approx(b, abs=1e-12)


def test_constructor_rejects_inadmissible_pieces():
    with pytest.raises(ValueError):
        RadialAffineIntegrand([((0.0,), -1.0, 0.0)])
    with pytest.raises(ValueError):
        RadialAffineIntegrand([((0.0,), 1.0, 0.5)])
    with pytest.raises(ValueError):
        RadialAffineIntegrand([((0.0,), 1.0, 0.0), ((0.0, 1.0), 1.0, 0.0)])
    with pytest.raises(ValueError):
        PowerIntegrand(-1, 1, 2)
    with pytest.raises(ValueError):
        PowerIntegrand(1, 1, 0.5)


@pytest.mark.parametrize("f,k,dim", [
    (random_affine(1, 5, seed=3), 1, 2),
    (random_affine(1, 5, seed=4), 2, 3),
    (PowerIntegrand(1.0, 2.0, 2.0), 1, 2),
    (PowerIntegrand(0.5, 1.0, 1.0), 2, 3),
    (PowerIntegrand(1.0, 1.0, 3.5), 1, 3),
])
def test_convexity_probe(f, k, dim):
    rng = np.random.default_rng(5)
    xi = rng.normal(size=(10_000, dim)) * 3
    eta = rng.normal(size=(10_000, dim)) * 3
    th = rng.random(10_000)[:, None]
    lhs = f(th * xi + (1 - th) * eta, k)
    rhs = th[:, 0] * f(xi, k) + (1 - th[:, 0]) * f(eta, k)
    assert np.all(lhs <= rhs + 1e-10 * (1 + np.abs(rhs)))


def test_linear_growth():
    f = random_affine(2, 5, seed=6)
    C = f.linear_growth_constant()
    rng = np.random.default_rng(7)
    xi = rng.normal(size=(5000, 4)) * rng.exponential(10, size=(5000, 1))
    assert np.all(f(xi, 2) <= C * (1 + np.linalg.norm(xi, axis=1)) + 1e-12)


def test_recession_examples():
    f = RadialAffineIntegrand([((0.0,), 1.0, 0.0)])
    r = recession(f)
    assert r.pieces[0][1:] == (1.0, 0.0)
    g = recession(RadialAffineIntegrand([((1.0,), 0.0, -1.0)]))
    assert g(np.array([2.5, 7.0]), 1) == pytest.approx(2.5)
    assert g(np.array([-2.5, 7.0]), 1) == 0.0
    assert recession(RadialAffineIntegrand([], n_x=0))(np.array([3.0]), 1) == 0.0


def test_recession_is_the_limit():
    f = random_affine(1, 5, seed=8)
    r = recession(f)
    rng = np.random.default_rng(9)
    z = rng.normal(size=(200, 3))
    t = 1e7
    np.testing.assert_allclose(f(t * z, 2) / t, r(z, 2), atol=1e-6)


def test_recession_power():
    assert recession(PowerIntegrand(0, 1, 1)).p == 1
    with pytest.raises(RecessionError, match="recession infinite"):
        recession(PowerIntegrand(1, 1, 2))
    # trivial power integrand has a zero recession
    assert recession(PowerIntegrand(0, 0, 3)).trivial


def test_lift_of_y_norm():
    F = lift(PowerIntegrand(0.0, 1.0, 1.0))
    rng = np.random.default_rng(10)
    xi = rng.normal(size=(500, 4))
    np.testing.assert_allclose(F(xi, 2), np.linalg.norm(xi[:, 1:3], axis=1), rtol=1e-14)
    G = lift(RadialAffineIntegrand([((0.0,), 1.0, 0.0)]))
    np.testing.assert_allclose(G(xi, 2), np.linalg.norm(xi[:, 1:3], axis=1), rtol=1e-14)


def test_lift_branch_example():
    F = lift(RadialAffineIntegrand([((1.0,), 0.0, -1.0)]))
    assert F(np.array([2.0, 0.0, -1.0]), 1) == pytest.approx(1.0)
    assert F(np.zeros(3), 1) == 0.0
    assert F(np.array([0.0, 0.0, -1.0]), 1) == 0.0


def test_lift_matches_formula_on_negative_t():
    f = random_affine(1, 5, seed=11)
    F = lift(f)
    rng = np.random.default_rng(12)
    xi = rng.normal(size=(300, 4))
    xi[:, -1] = -np.abs(xi[:, -1]) - 0.1
    s = -xi[:, -1]
    expect = f(xi[:, :3] / s[:, None], 2) * s
    np.testing.assert_allclose(F(xi, 2), expect, rtol=1e-12, atol=1e-12)


def test_lift_zero_t_equals_recession():
    f = random_affine(2, 5, seed=13)
    F, r = lift(f), recession(f)
    rng = np.random.default_rng(14)
    xi = rng.normal(size=(300, 5))
    xi[:, -1] = 0.0
    np.testing.assert_array_equal(F(xi, 2), r(xi[:, :4], 2))


def test_lift_power_infinite_branch():
    F = lift(PowerIntegrand(1.0, 1.0, 2.0))
    assert F.may_be_infinite
    assert F(np.array([1.0, 0.0, 0.5]), 1) == np.inf
    assert F(np.array([0.0, 0.0, 1.0]), 1) == 0.0
    assert F(np.array([1.0, 1.0, -2.0]), 1) == pytest.approx(2.0 / 2.0)


def test_lift_radial_in_y():
    F = lift(random_affine(1, 4, seed=15))
    a = F(np.array([0.3, 1.0, 0.0, -0.5]), 2)
    b = F(np.array([0.3, 0.6, 0.8, -0.5]), 2)
    assert a == pytest.approx(b)


@pytest.mark.parametrize("seed", range(5))
def test_homogeneity_of_lifts(seed):
    F = lift(random_affine(1, 5, seed=seed))
    rep = homogeneity_selftest(F, 1, 3, samples=2000, seed=seed, has_t=True)
    assert rep["defect"] <= 1e-12
    assert rep["zero_value"] == 0.0


def test_homogeneity_of_norms():
    assert homogeneity_selftest(y_norm(), 1, 2)["defect"] == 0.0
    assert homogeneity_selftest(euclidean_norm(), 2, 3)["defect"] <= 1e-12


def test_homogeneity_flags_constant_evaluator():
    bad = SurfaceIntegrand(lambda xi_x, r, xi_t: np.ones_like(r), "one")
    rep = homogeneity_selftest(bad, 1, 2)
    assert rep["zero_value"] == 1.0
    assert rep["defect"] > 0.5


def test_surface_monotone_in_r():
    F = lift(PowerIntegrand(1.0, 1.0, 1.5))
    r = np.linspace(0, 3, 50)
    vals = F(np.stack([np.full(50, 0.4), r, np.full(50, -1.0)], axis=1), 1)
    assert np.all(np.diff(vals) > 0)


def test_strictly_convex_metadata():
    assert not random_affine(1, 3).strictly_convex
    assert PowerIntegrand(1, 1, 2).strictly_convex
    assert not PowerIntegrand(0, 1, 2).strictly_convex
