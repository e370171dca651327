import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capiso.geometry import (
    CapParams,
    RadialGraph,
    ScalarField,
    area_element,
    bubble_volume,
    graph_distance,
    graph_volume,
    gregory_weights,
    grad_vector,
    integrate_surface,
    make_grid,
    normal_field,
    sobolev_norms,
    sphere_area,
    surface_point,
    tangential_gradient,
    unit_normal,
    w_profile,
    w_values,
)


def test_capparams_validation():
    with pytest.raises(ValueError):
        CapParams(1, 0.0)
    with pytest.raises(ValueError):
        CapParams(3, 1.0)
    with pytest.raises(ValueError):
        CapParams(3, -1.2)
    CapParams(2, -0.99)


def test_make_grid_errors():
    with pytest.raises(ValueError):
        make_grid(3, resolution=4)
    with pytest.raises(ValueError):
        make_grid(2, azimuth_count=16)
    with pytest.raises(ValueError):
        make_grid(3, theta_end=4.0)


def test_grid_nodes_and_weights():
    for n in (2, 3, 4):
        g = make_grid(n, resolution=64)
        assert np.all(np.diff(g.theta) > 0)
        assert np.all(g.theta_weights > 0)


@pytest.mark.parametrize("n,expected,tol", [(3, 2 * math.pi, 1e-10), (2, math.pi, 1e-12),
                                            (4, math.pi**2, 1e-10)])
def test_cap_area_examples(n, expected, tol):
    g = make_grid(n, resolution=64)
    assert abs(integrate_surface(g, 1.0) - expected) <= tol


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_cap_area_all_dimensions(n):
    g = make_grid(n, resolution=64)
    assert abs(integrate_surface(g, 1.0) - sphere_area(n - 1) / 2) <= 1e-10


def test_gregory_weights_exact_for_low_degree():
    w = gregory_weights(32, 1.0)
    x = np.linspace(0, 1, 33)
    for d in range(8):
        assert abs(w @ x**d - 1.0 / (d + 1)) < 1e-13


def test_integrate_examples():
    g = make_grid(3, resolution=64)
    assert abs(integrate_surface(g, np.cos(g.theta)) - math.pi) < 1e-10
    gc = make_grid(3, theta_end=math.pi / 3, resolution=64)
    assert abs(integrate_surface(gc, 1.0) - math.pi) < 1e-10


def test_full_grid_matches_zonal():
    gz = make_grid(3, resolution=64)
    gf = make_grid(3, resolution=64, azimuth_count=32)
    u = np.cos(gz.theta) ** 2 + 0.3
    assert abs(integrate_surface(gz, u) - integrate_surface(gf, gz.expand(u, 32))) < 1e-12


def test_w_profile_examples():
    z = np.array([1.0, 0.0])
    w = w_values(0.5, z)
    assert abs(w[0] - 0.5) < 1e-15
    assert abs(w[1] - math.sqrt(0.75)) < 1e-15
    assert np.allclose(w_values(0.0, np.linspace(0, 1, 7)), 1.0)


@pytest.mark.parametrize("lam", [-0.9, -0.5, 0.0, 0.5, 0.9])
@pytest.mark.parametrize("n", [2, 3])
def test_w_defining_relation(n, lam):
    g = make_grid(n, resolution=64)
    w = w_profile(CapParams(n, lam), g).values
    y = w[:, None] * g.dirs
    y[:, -1] += lam
    assert np.max(np.abs(np.linalg.norm(y, axis=1) - 1.0)) <= 1e-12


def test_tangential_gradient_examples():
    g = make_grid(3, resolution=64)
    assert np.max(tangential_gradient(g, np.full(g.shape, 2.0)).values) < 1e-10
    err = np.max(np.abs(tangential_gradient(g, np.cos(g.theta)).values - np.sin(g.theta)))
    assert err < 1e-7


def test_gradient_convergence_order():
    errs = []
    for res in (32, 64):
        g = make_grid(3, resolution=res)
        exact = -3 * np.sin(3 * g.theta)
        dth = np.sum(grad_vector(g, np.cos(3 * g.theta)) * g.e_theta, axis=-1)
        errs.append(np.max(np.abs(dth - exact)))
    assert errs[0] / errs[1] >= 12


def test_gradient_fewer_than_five_nodes():
    g = make_grid(3, resolution=8)
    with pytest.raises(ValueError):
        grad_vector(g.__class__(**{**g.__dict__, "resolution": 3}), np.ones(g.shape))


def test_sobolev_examples():
    g = make_grid(3, resolution=128)
    l1, l2, h1 = sobolev_norms(g, np.full(g.shape, 0.1))
    assert abs(l2 - 0.01 * 2 * math.pi) < 1e-12 and abs(h1 - l2) < 1e-12
    l1, l2, h1 = sobolev_norms(g, np.cos(g.theta))
    assert abs(l2 - 2 * math.pi / 3) < 1e-10
    assert abs((h1 - l2) - 4 * math.pi / 3) < 1e-8
    assert abs(h1 - 2 * math.pi) < 1e-8
    assert sobolev_norms(g, np.zeros(g.shape)) == (0.0, 0.0, 0.0)


def test_graph_volume_examples():
    g = make_grid(3, resolution=128)
    one = RadialGraph(g, np.ones(g.shape))
    assert abs(graph_volume(one) - 2 * math.pi / 3) < 1e-12
    w = w_profile(CapParams(3, 0.5), g)
    assert abs(graph_volume(w) - math.pi * 0.25 * 2.5 / 3) < 1e-8
    for s in (0.5, 2.0):
        assert abs(graph_volume(w.scaled(s)) / (s**3 * graph_volume(w)) - 1) < 1e-12


def test_radial_graph_rejects_nonpositive():
    g = make_grid(3, resolution=16)
    v = np.ones(g.shape)
    v[3] = 0.0
    with pytest.raises(ValueError):
        RadialGraph(g, v)
    with pytest.raises(ValueError):
        ScalarField(g, np.ones(5))


def test_area_element_examples():
    for n in (2, 3, 4):
        g = make_grid(n, resolution=64)
        assert np.allclose(area_element(RadialGraph(g, np.full(g.shape, 1.5))).values, 1.5 ** (n - 1))
    g = make_grid(3, resolution=128)
    p = CapParams(3, 0.3)
    w = w_profile(p, g)
    gw = grad_vector(g, w)
    omega = w.values * np.sqrt(w.values**2 + np.sum(gw * gw, axis=-1))
    assert np.max(np.abs(area_element(w).values - omega)) < 1e-10


@pytest.mark.parametrize("n", [2, 3])
def test_unit_normal_bubble(n):
    lam = 0.4
    g = make_grid(n, resolution=128)
    w = w_profile(CapParams(n, lam), g)
    nu = normal_field(w)
    expected = w.values[:, None] * g.dirs
    expected[:, -1] += lam
    assert np.max(np.abs(nu - expected)) < 1e-8
    assert np.allclose(unit_normal(RadialGraph(g, np.ones(g.shape)), 5), g.embed(g.dirs[5]))


def test_normal_unit_and_orthogonal():
    g = make_grid(3, resolution=128)
    f = RadialGraph(g, 1 + 0.2 * np.cos(2 * g.theta) + 0.1 * np.cos(3 * g.theta))
    nu = normal_field(f)
    assert np.max(np.abs(np.linalg.norm(nu, axis=-1) - 1)) < 1e-12
    # tangent of the meridian curve f(theta) x(theta)
    D = g.diff_matrix()
    tan = (D @ f.values)[:, None] * g.dirs + f.values[:, None] * g.e_theta
    dots = np.abs(np.sum(nu * tan, axis=-1))[4:-4]
    assert np.max(dots) <= 10 * g.h**2


def test_surface_point():
    g = make_grid(3, resolution=32, azimuth_count=8)
    f = RadialGraph(g, np.full(g.shape, 2.0))
    sp = surface_point(f, (4, 3))
    assert abs(np.linalg.norm(sp.position) - 2.0) < 1e-14
    assert abs(np.linalg.norm(sp.normal) - 1.0) < 1e-12
    assert abs(sp.area_element - 4.0) < 1e-12


def test_graph_distance_examples():
    g = make_grid(3, resolution=128)
    f = RadialGraph(g, 1 + 0.1 * np.cos(g.theta))
    assert graph_distance(f, f) == (0.0, 0.0)
    d0, d1 = graph_distance(f, RadialGraph(g, f.values + 0.3))
    assert abs(d0 - 0.3) < 1e-14 and d1 < 1e-12
    d0, d1 = graph_distance(f, RadialGraph(g, f.values + 0.01 * np.cos(g.theta)))
    assert abs(d0 - 0.01) < 1e-14 and abs(d1 - 0.01) < 1e-8


def test_bubble_volume_closed_forms():
    for lam in (-0.5, 0.0, 0.3, 0.9):
        assert abs(bubble_volume(3, lam) - math.pi * (1 - lam) ** 2 * (2 + lam) / 3) < 1e-13
        assert abs(bubble_volume(2, lam) - (math.acos(lam) - lam * math.sqrt(1 - lam * lam))) < 1e-13


def test_refinement_consistency():
    vals = []
    for res in (128, 256):
        g = make_grid(3, resolution=res)
        f = RadialGraph(g, w_values(0.5, g.height) * (1 + 0.1 * np.cos(2 * g.theta)))
        vals.append((graph_volume(f), integrate_surface(g, area_element(f).values)))
    for a, b in zip(*vals):
        assert abs(a - b) / abs(b) < 1e-8


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 5.0), st.integers(2, 4))
def test_volume_scaling_property(s, n):
    g = make_grid(n, resolution=32)
    f = RadialGraph(g, 1 + 0.2 * np.cos(g.theta))
    assert math.isclose(graph_volume(f.scaled(s)), s**n * graph_volume(f), rel_tol=1e-12)
