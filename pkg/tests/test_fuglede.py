import math

import numpy as np
import pytest

from capiso.fuglede import (
    B_form,
    c1_norm,
    chain_check,
    coercivity_fit,
    expansion_residual_sweep,
    half_space_form,
    loglog_fit,
    nash_report,
    standard_direction,
    strong_probe,
    volume_expansion_residual,
    volume_expansion_sweep,
    volume_normalized_graph,
    zonal_fourier,
)
from capiso.cones import ConeSpec
from capiso.geometry import (
    CapParams,
    ScalarField,
    bubble_volume,
    graph_volume,
    integrate_surface,
    make_grid,
    w_values,
)


def test_B_form_constant_example():
    p = CapParams(3, 0.0)
    g = make_grid(p)
    u = ScalarField(g, np.full(g.shape, 0.1))
    assert abs(B_form(u, p) + 0.0628319) < 1e-7
    assert abs(B_form(u, p) - half_space_form(u)) < 1e-14


def test_B_form_reduces_at_zero_lambda():
    p = CapParams(3, 0.0)
    g = make_grid(p)
    u = ScalarField(g, zonal_fourier(g, [0.1, -0.3, 0.05]))
    assert abs(B_form(u, p) - half_space_form(u)) < 1e-12


@pytest.mark.parametrize("n,lam", [(2, 0.5), (3, -0.5), (3, 0.5)])
def test_expansion_slope_three(n, lam):
    p = CapParams(n, lam)
    g = make_grid(p)
    fit = expansion_residual_sweep(standard_direction(g), np.logspace(-3, -1, 9), p)
    assert fit.degenerate or 2.8 <= fit.slope <= 3.2


def test_coercivity_constants():
    c, C = coercivity_fit(CapParams(3, 0.3), samples=20)
    assert c > 0 and math.isfinite(C)


def test_volume_normalized_graph():
    p = CapParams(3, 0.4)
    g = make_grid(p)
    f, u = volume_normalized_graph(standard_direction(g), 0.05, p)
    assert abs(graph_volume(f) - bubble_volume(3, 0.4)) < 1e-13
    assert np.allclose(f.values - w_values(0.4, g.height), u.values)
    f0, u0 = volume_normalized_graph(standard_direction(g), 0.0, p)
    assert np.max(np.abs(u0.values)) < 1e-13
    with pytest.raises(ValueError):
        volume_normalized_graph(standard_direction(g), -100.0, p)


def test_volume_expansion_exact_in_plane():
    p = CapParams(2, 0.3)
    g = make_grid(p)
    u = ScalarField(g, 0.1 * np.cos(3 * g.theta))
    assert volume_expansion_residual(u, p) < 1e-15


def test_volume_expansion_cubic_term():
    p = CapParams(3, 0.0)
    g = make_grid(p)
    c = 0.05
    r = volume_expansion_residual(ScalarField(g, np.full(g.shape, c)), p)
    assert abs(r - 2 * math.pi * c**3 / 3) < 1e-14
    fit = volume_expansion_sweep(ScalarField(g, np.cos(g.theta)), np.logspace(-3, -1, 9), p)
    assert abs(fit.slope - 3.0) < 0.01


def test_loglog_fit_examples():
    s = np.logspace(-3, -1, 9)
    fit = loglog_fit(zip(s, s**3))
    assert abs(fit.slope - 3) < 1e-12 and fit.r_squared > 0.999999
    fit = loglog_fit(zip(s, 2 * s**2))
    assert abs(fit.slope - 2) < 1e-12 and abs(fit.intercept - math.log(2)) < 1e-12
    rng = np.random.default_rng(0)
    fit = loglog_fit(zip(s, s**2 * np.exp(rng.normal(0, 0.01, s.size))))
    assert abs(fit.slope - 2) < 0.05
    with pytest.raises(ValueError):
        loglog_fit([(1, 1), (2, 2)])
    with pytest.raises(ValueError):
        loglog_fit(zip(s, -s))


def test_zero_direction_is_degenerate():
    p = CapParams(3, 0.2)
    g = make_grid(p)
    fit = expansion_residual_sweep(ScalarField(g, np.zeros(g.shape)), np.logspace(-3, -1, 9), p)
    assert fit.degenerate


def test_nash_constant_field():
    p = CapParams(3, 0.0)
    g = make_grid(p)
    area = integrate_surface(g, 1.0)
    rows = nash_report([ScalarField(g, np.full(g.shape, 0.2))], [0.1, 0.5], g)
    for r in rows:
        assert abs(r["ratio"] - r["delta"] ** r["alpha"] / area) < 1e-12
    assert nash_report([ScalarField(g, np.zeros(g.shape))], [0.1], g) == []
    with pytest.raises(ValueError):
        nash_report([ScalarField(g, np.ones(g.shape))], [1.5], g)


def test_c1_norm():
    g = make_grid(3)
    u = np.cos(g.theta)
    assert abs(c1_norm(g, u) - 2.0) < 1e-6


def test_chain_check_stats():
    p = CapParams(3, 0.0)
    a, b = chain_check(6, 0.05, p, seed=3, resolution=64)
    assert a.count == 6 and b.count == 6
    assert a.min <= a.median <= a.max
    assert a.max == max(a.values)
    assert a.stability < 0.05 and b.stability < 0.05
    with pytest.raises(ValueError):
        chain_check(2, 0.1, p, seed=0)


def test_chain_check_reproducible():
    p = CapParams(2, 0.5)
    first = chain_check(3, 0.05, p, seed=1, resolution=64)[0].values
    second = chain_check(3, 0.05, p, seed=1, resolution=64)[0].values
    assert np.array_equal(first, second)


def test_strong_probe_cone():
    mu, al = strong_probe(ConeSpec(3, math.pi / 4), ensemble_size=4, resolution=64)
    assert mu.count == 4 and mu.min > 0 and al.min > 0
