from math import pi

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewhol.connection import levi_civita_curvature
from skewhol.geometry import (
    ChartDomainError,
    FlatTorus,
    ProductManifold,
    RoundSphere2,
    central_difference,
    christoffel_fd,
    christoffel_lc,
    manifold_from_dict,
    metric_at,
    quadrature_grid,
    sample_points,
)


def test_torus_metric_is_identity(t3):
    assert np.array_equal(metric_at(t3, [0.3, 1.2, 4.0]), np.eye(3))


def test_product_metric_blocks():
    M = ProductManifold(RoundSphere2(2.0), FlatTorus((2 * pi, 2 * pi)))
    g = metric_at(M, [pi / 3, 0.0, 0.0, 0.0])
    # r^2 = 4 and r^2 sin^2(pi/3) = 4 * 3/4 = 3
    assert np.allclose(g, np.diag([4.0, 3.0, 1.0, 1.0]), atol=1e-15)


def test_sphere_christoffels_at_equator(s2xt2):
    G = christoffel_lc(s2xt2, [pi / 2, 0.5, 0, 0])
    assert np.allclose(G, 0.0, atol=1e-15)


def test_sphere_christoffels_at_quarter(s2xt2):
    G = christoffel_lc(s2xt2, [pi / 4, 0.5, 0, 0])
    # Gamma^theta_phiphi = -sin cos = -1/2 and Gamma^phi_thetaphi = cot = 1
    assert G[0, 1, 1] == pytest.approx(-0.5)
    assert G[1, 0, 1] == pytest.approx(1.0)
    assert G[1, 1, 0] == pytest.approx(1.0)
    expected_zero = np.ones_like(G, dtype=bool)
    for idx in [(0, 1, 1), (1, 0, 1), (1, 1, 0)]:
        expected_zero[idx] = False
    assert np.all(G[expected_zero] == 0.0)


def test_christoffel_fd_close_to_closed_form(s2xt2):
    p = [0.9, 2.0, 1.0, 3.0]
    assert np.max(np.abs(christoffel_fd(s2xt2, p) - christoffel_lc(s2xt2, p))) < 1e-6


def test_christoffel_fd_second_order(s2xt2):
    p = [0.9, 2.0, 1.0, 3.0]
    exact = christoffel_lc(s2xt2, p)
    e1 = np.max(np.abs(christoffel_fd(s2xt2, p, h=1e-2) - exact))
    e2 = np.max(np.abs(christoffel_fd(s2xt2, p, h=5e-3) - exact))
    assert e1 / e2 == pytest.approx(4.0, rel=0.05)


def test_christoffel_fd_fifty_points(s2xt2, rng):
    pts = sample_points(s2xt2, 50, rng)
    worst = max(np.max(np.abs(christoffel_fd(s2xt2, p) - christoffel_lc(s2xt2, p))) for p in pts)
    assert worst < 1e-6


def test_central_difference_of_polynomial():
    f = lambda x: x[..., 0] ** 3 + 2 * x[..., 1]
    d = central_difference(f, np.array([1.0, 5.0]), 1e-3, order=4)
    assert d == pytest.approx([3.0, 2.0], rel=1e-10)


def test_central_difference_batched():
    f = lambda x: np.sin(x[..., 0]) * x[..., 1]
    p = np.array([[0.1, 2.0], [0.7, -1.0], [1.3, 0.5]])
    d = central_difference(f, p, 1e-4, order=4)
    assert d.shape == (2, 3)
    assert np.allclose(d[0], np.cos(p[:, 0]) * p[:, 1], atol=1e-10)
    assert np.allclose(d[1], np.sin(p[:, 0]), atol=1e-10)


def test_central_difference_rejects_order():
    with pytest.raises(ValueError):
        central_difference(lambda x: x, np.zeros(2), 1e-3, order=3)


@pytest.mark.parametrize(
    "M, expected",
    [
        (ProductManifold(FlatTorus((2 * pi,)), FlatTorus((2 * pi,))), 4 * pi**2),
        (ProductManifold(RoundSphere2(1.0), FlatTorus((1.0,))), 4 * pi),
        (ProductManifold(RoundSphere2(1.0), FlatTorus((2 * pi,))), 8 * pi**2),
    ],
)
def test_quadrature_total_weight_is_volume(M, expected):
    nodes, weights = quadrature_grid(M)
    assert weights.sum() == pytest.approx(expected, rel=1e-12)
    assert nodes.shape == (len(weights), M.n)


def test_sphere_quadrature_integrates_cos_squared():
    M = ProductManifold(RoundSphere2(1.0), FlatTorus((1.0,)))
    nodes, weights = quadrature_grid(M)
    # integral of cos^2(theta) over the unit sphere is 4 pi / 3
    assert np.dot(weights, np.cos(nodes[:, 0]) ** 2) == pytest.approx(4 * pi / 3, rel=1e-12)


def test_quadrature_rejects_coarse_sphere():
    M = ProductManifold(RoundSphere2(1.0), FlatTorus((1.0,)))
    with pytest.raises(ValueError):
        quadrature_grid(M, (2, 4))


@settings(max_examples=40, deadline=None)
@given(
    st.floats(0.15 + 1e-9, pi - 0.15 - 1e-9),
    st.floats(0, 2 * pi),
    st.floats(0.2, 5.0),
)
def test_metric_symmetric_positive_definite(theta, phi, radius):
    M = ProductManifold(RoundSphere2(radius), FlatTorus((2 * pi, 3.0)))
    g = metric_at(M, [theta, phi, 0.1, 0.2])
    assert np.array_equal(g, g.T)
    assert np.all(np.linalg.eigvalsh(g) > 0)


def test_levi_civita_curvature_block_diagonal(s2xt2, rng):
    for p in sample_points(s2xt2, 5, rng):
        R = levi_civita_curvature(s2xt2, p).R
        assert np.all(R[2:, :2] == 0.0) and np.all(R[:2, 2:] == 0.0)
        assert np.all(R[2:, 2:] == 0.0)


@pytest.mark.parametrize("radius", [0.5, 1.0, 2.0])
def test_sphere_sectional_curvature(radius):
    M = ProductManifold(RoundSphere2(radius), FlatTorus((2 * pi,)))
    p = np.array([1.1, 0.4, 0.0])
    R = levi_civita_curvature(M, p).R
    g = metric_at(M, p)
    # K = g(R(e_th, e_ph) e_ph, e_th) / (|e_th|^2 |e_ph|^2)
    num = g[0] @ R[:, 1, 0, 1]
    assert num / (g[0, 0] * g[1, 1]) == pytest.approx(1.0 / radius**2, rel=1e-12)


@pytest.mark.parametrize("theta", [0.0, 0.1, pi - 0.1, pi, np.nan])
def test_pole_points_rejected(s2xt2, theta):
    with pytest.raises(ChartDomainError):
        metric_at(s2xt2, [theta, 0.0, 0.0, 0.0])


def test_wrong_dimension_rejected(t3):
    with pytest.raises(ChartDomainError):
        metric_at(t3, [0.0, 0.0])


def test_stencil_near_margin_fails_only_in_open_chart(s2xt2):
    with pytest.raises(ChartDomainError):
        christoffel_fd(s2xt2, [0.16, 0.0, 0.0, 0.0], h=0.2)
    christoffel_fd(s2xt2, [0.16, 0.0, 0.0, 0.0], h=1e-3)


def test_periodic_coordinates_fold(t3):
    assert t3.canonicalize([2 * pi + 0.5, -0.5, 0.0]) == pytest.approx([0.5, 2 * pi - 0.5, 0.0])


def test_invalid_factors():
    with pytest.raises(ValueError):
        RoundSphere2(-1.0)
    with pytest.raises(ValueError):
        FlatTorus((0.0,))


def test_manifold_round_trip(s2xt2):
    M = manifold_from_dict(s2xt2.to_dict())
    assert M == s2xt2 and M.name == "S2xT2"


def test_samples_respect_margin(s2xt2, rng):
    pts = sample_points(s2xt2, 200, rng)
    assert np.all(pts[:, 0] > 0.15) and np.all(pts[:, 0] < pi - 0.15)
    s2xt2.canonicalize(pts)
