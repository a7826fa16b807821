import numpy as np
import pytest

from spinauto.fiber import left_matrix, right_matrix
from spinauto.geometry import (
    Grid, LCConnection, MetricField, NotPositiveDefinite, christoffels, exterior_derivative, gradient,
    orthonormal_frame, partial,
)
from spinauto.scenario import metric_array

from oracles import conformal_connection_symbolic

TWO_PI = 2 * np.pi


def conformal_metric(n, amplitude=0.1):
    grid = Grid(n)
    return MetricField(grid, metric_array(grid, "conformal", {"amplitudes": [amplitude], "frequencies": [1.0], "axes": [0]}))


def test_grid_rejects_small_n():
    with pytest.raises(ValueError):
        Grid(3)


def test_partial_is_fourth_order():
    errors = []
    for n in (8, 16, 32):
        x = Grid(n).coords()
        f = np.sin(TWO_PI * x[..., 2])
        errors.append(np.max(np.abs(partial(f, 2, 1.0 / n) - TWO_PI * np.cos(TWO_PI * x[..., 2]))))
    assert errors[0] / errors[1] > 15 and errors[1] / errors[2] > 15.5


def test_metric_constructor_validation():
    grid = Grid(4)
    g = np.broadcast_to(np.eye(4), grid.shape + (4, 4)).copy()
    g[..., 0, 1] = 0.1
    with pytest.raises(ValueError, match="symmetric"):
        MetricField(grid, g)
    g = np.broadcast_to(np.eye(4), grid.shape + (4, 4)).copy()
    g[1, 2, 3, 0, 2, 2] = -1.0
    with pytest.raises(NotPositiveDefinite) as info:
        MetricField(grid, g)
    assert info.value.point == (1, 2, 3, 0)


def test_flat_christoffels_vanish():
    grid = Grid(6)
    metric = MetricField(grid, metric_array(grid, "flat", {}))
    assert not christoffels(metric).any()


def test_conformal_christoffels_match_formula():
    gamma_exact, _ = conformal_connection_symbolic(0.1)
    errors = []
    for n in (8, 16):
        metric = conformal_metric(n)
        gamma = christoffels(metric)
        x0 = Grid(n).coords()[..., 0]
        expected = np.stack([gamma_exact(v) for v in x0[:, 0, 0, 0]])  # depends on x0 only
        err = np.max(np.abs(gamma[:, 0, 0, 0] - expected))
        errors.append(err)
        # the classical conformal formula as a second check
        df = 0.1 * TWO_PI * np.cos(TWO_PI * x0[:, 0, 0, 0])
        dvec = np.zeros((n, 4))
        dvec[:, 0] = df
        eye = np.eye(4)
        formula = (np.einsum("lm,xn->xlmn", eye, dvec) + np.einsum("ln,xm->xlmn", eye, dvec)
                   - np.einsum("mn,xl->xlmn", eye, dvec))
        np.testing.assert_allclose(expected, formula, atol=1e-12)
    assert errors[1] < 2e-3
    assert errors[0] / errors[1] > 12


def test_christoffels_symmetric():
    metric = MetricField(Grid(6), metric_array(Grid(6), "perturbed", {"amplitudes": [0.2], "seed": 4}))
    gamma = christoffels(metric)
    np.testing.assert_array_equal(gamma, np.swapaxes(gamma, -1, -2))


def test_orthonormal_frame_examples():
    grid = Grid(4)
    flat = MetricField(grid, metric_array(grid, "flat", {}))
    np.testing.assert_array_equal(orthonormal_frame(flat), np.broadcast_to(np.eye(4), grid.shape + (4, 4)))

    g = np.zeros(grid.shape + (4, 4))
    h1, h2 = 2.5, 0.4
    for a, h in enumerate((h1, h1, h2, h2)):
        g[..., a, a] = h
    frame = orthonormal_frame(MetricField(grid, g))
    np.testing.assert_allclose(frame[0, 0, 0, 0], np.diag([h1**-0.5, h1**-0.5, h2**-0.5, h2**-0.5]), atol=1e-15)

    metric = conformal_metric(8)
    f = 0.1 * np.sin(TWO_PI * Grid(8).coords()[..., 0])
    np.testing.assert_allclose(orthonormal_frame(metric), np.exp(-f)[..., None, None] * np.eye(4), atol=1e-14)


def test_frame_is_orthonormal_oriented_and_triangular():
    metric = MetricField(Grid(6), metric_array(Grid(6), "perturbed", {"amplitudes": [0.3], "seed": 1}))
    E = orthonormal_frame(metric)
    gram = np.einsum("...mk,...mn,...nl->...kl", E, metric.g, E)
    np.testing.assert_allclose(gram, np.broadcast_to(np.eye(4), gram.shape), atol=1e-12)
    assert np.all(np.linalg.det(E) > 0)
    np.testing.assert_array_equal(np.tril(E, -1), 0)  # Gram-Schmidt in coordinate order


def test_flat_frame_connection_vanishes():
    lc = LCConnection.from_metric(MetricField(Grid(6), metric_array(Grid(6), "flat", {})))
    assert not lc.theta.any() and not lc.a.any() and not lc.b.any()


def test_conformal_frame_connection_matches_symbolic():
    _, theta_exact = conformal_connection_symbolic(0.1)
    errors = []
    for n in (8, 16):
        lc = LCConnection.from_metric(conformal_metric(n))
        x0 = Grid(n).coords()[:, 0, 0, 0, 0]
        expected = np.stack([theta_exact(v) for v in x0])
        errors.append(np.max(np.abs(lc.theta[:, 0, 0, 0] - expected)))
        # left/right parts against the split of the symbolic form
        a, b = lc.a[:, 0, 0, 0], lc.b[:, 0, 0, 0]
        np.testing.assert_allclose(left_matrix(a) + right_matrix(b), lc.theta[:, 0, 0, 0], atol=1e-12)
    assert errors[1] < 2e-3
    assert errors[0] / errors[1] > 12


def test_frame_connection_skew_and_split():
    lc = LCConnection.from_metric(MetricField(Grid(8), metric_array(Grid(8), "perturbed", {"amplitudes": [0.2], "seed": 2})))
    np.testing.assert_allclose(lc.theta + np.swapaxes(lc.theta, -1, -2), 0.0, atol=1e-12)
    np.testing.assert_allclose(left_matrix(lc.a) + right_matrix(lc.b), lc.theta, atol=1e-12)


def test_metric_compatibility_converges():
    residuals = []
    for n in (8, 16):
        grid = Grid(n)
        lc = LCConnection.from_metric(MetricField(grid, metric_array(grid, "product", {})))
        residuals.append(lc.compatibility_residual)
    assert residuals[1] < 2e-3
    assert residuals[0] / residuals[1] > 12


def test_exterior_derivative_examples():
    n = 16
    grid = Grid(n)
    x = grid.coords()
    const = np.zeros(grid.shape + (4,))
    const[..., 2] = 3.0
    assert np.max(np.abs(exterior_derivative(const, 1, grid.h))) < 1e-12

    errors = []
    for n in (8, 16):
        grid = Grid(n)
        x = grid.coords()
        alpha = np.zeros(grid.shape + (4,))
        alpha[..., 1] = np.sin(TWO_PI * x[..., 0])
        d_alpha = exterior_derivative(alpha, 1, grid.h)
        expected = np.zeros(grid.shape + (4, 4))
        expected[..., 0, 1] = TWO_PI * np.cos(TWO_PI * x[..., 0])
        expected[..., 1, 0] = -expected[..., 0, 1]
        errors.append(np.max(np.abs(d_alpha - expected)))
    assert errors[1] < 1e-2 and errors[0] / errors[1] > 15


@pytest.mark.parametrize("k", [0, 1, 2])
def test_d_squared_vanishes(k):
    grid = Grid(16)
    x = grid.coords()
    rng = np.random.default_rng(k)
    shape = (4,) * k
    alpha = np.zeros(grid.shape + shape)
    for idx in np.ndindex(*shape):
        coeff = rng.normal(size=4)
        alpha[(...,) + idx] = sum(c * np.sin(TWO_PI * x[..., a] + a) for a, c in enumerate(coeff))
    if k:
        alpha = _antisymmetrize(alpha, k)
    dd = exterior_derivative(exterior_derivative(alpha, k, grid.h), k + 1, grid.h)
    assert np.max(np.abs(dd)) < 1e-6


def _antisymmetrize(alpha, k):
    import itertools
    out = np.zeros_like(alpha)
    for perm in itertools.permutations(range(k)):
        sign = np.linalg.det(np.eye(k)[list(perm)])
        out += sign * np.transpose(alpha, tuple(range(4)) + tuple(4 + p for p in perm))
    return out


def test_exterior_derivative_rejects_top_degree():
    with pytest.raises(ValueError):
        exterior_derivative(np.zeros((4, 4, 4, 4) + (4,) * 4), 4, 0.25)


def test_gradient_layout():
    grid = Grid(8)
    x = grid.coords()
    f = np.stack([np.sin(TWO_PI * x[..., 1]), np.cos(TWO_PI * x[..., 3])], axis=-1)
    grad = gradient(f, grid.h)
    assert grad.shape == grid.shape + (4, 2)
    np.testing.assert_array_equal(grad[..., 1, 0], partial(f[..., 0], 1, grid.h))
