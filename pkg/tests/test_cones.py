import math

import numpy as np
import pytest

from capiso.capillarity import deficit, fraenkel_alpha, mu_sq
from capiso.cones import (
    ConeSpec,
    K_volume,
    alpha_C,
    cone_fuglede_form,
    cone_grid,
    cone_report,
    deficit_C,
    mu_C0_sq,
    mu_C0_sq_divergence,
    mu_C_sq,
    perimeter_C,
)
from capiso.fuglede import volume_expansion_sweep
from capiso.geometry import RadialGraph, ScalarField, integrate_surface


def test_spec_validation():
    with pytest.raises(ValueError):
        ConeSpec(3, 0.0)
    with pytest.raises(ValueError):
        ConeSpec(3, 2.0)
    assert ConeSpec(3, math.pi / 2).is_half_space


@pytest.mark.parametrize("n,omega,expected", [(3, math.pi / 2, 2 * math.pi / 3),
                                              (3, math.pi / 3, math.pi / 3),
                                              (2, math.pi / 4, math.pi / 4)])
def test_K_volume_examples(n, omega, expected):
    assert abs(K_volume(ConeSpec(n, omega)) - expected) < 1e-10


@pytest.mark.parametrize("n,omega", [(2, math.pi / 6), (3, math.pi / 4), (3, math.pi / 3)])
def test_scaled_cone_ball_is_optimal(n, omega):
    spec = ConeSpec(n, omega)
    g = cone_grid(spec)
    f = RadialGraph(g, np.full(g.shape, 1.7))
    assert abs(deficit_C(f, spec)) < 1e-12
    assert abs(mu_C_sq(f, spec)[0]) < 1e-14
    assert abs(alpha_C(f, spec)[0]) < 1e-14
    assert abs(mu_C0_sq(f, spec)) < 1e-14
    assert abs(perimeter_C(f, spec) - n * K_volume(spec) * 1.7 ** (n - 1)) < 1e-9


def test_mu_C0_divergence_identity():
    spec = ConeSpec(3, math.pi / 3)
    g = cone_grid(spec, 256)
    f = RadialGraph(g, 1 + 0.1 * np.cos(math.pi * g.theta / spec.omega))
    assert abs(mu_C0_sq(f, spec) - mu_C0_sq_divergence(f, spec)) < 1e-7


def test_deficit_positive_off_ball():
    spec = ConeSpec(3, math.pi / 4)
    g = cone_grid(spec)
    f = RadialGraph(g, 1 + 0.05 * np.cos(math.pi * g.theta / spec.omega))
    assert deficit_C(f, spec) > 0
    r = cone_report(f, spec)
    assert r.mu_C_sq > 0 and r.alpha_C > 0


def test_fuglede_form_constant():
    for n, omega in [(3, math.pi / 3), (2, math.pi / 4), (3, math.pi / 2)]:
        spec = ConeSpec(n, omega)
        g = cone_grid(spec)
        c = 0.3
        area = integrate_surface(g, 1.0)
        u = ScalarField(g, np.full(g.shape, c))
        assert abs(cone_fuglede_form(u, spec) + 0.5 * (n - 1) * c * c * area) < 1e-10


def test_volume_expansion_slope_on_cone():
    spec = ConeSpec(3, math.pi / 3)
    g = cone_grid(spec)
    u = ScalarField(g, np.cos(math.pi * g.theta / spec.omega))
    fit = volume_expansion_sweep(u, np.logspace(-3, -1, 9), spec.params, base=1.0)
    assert abs(fit.slope - 3.0) < 0.05


def test_half_space_delegates_to_capillarity():
    spec = ConeSpec(3, math.pi / 2)
    g = cone_grid(spec)
    f = RadialGraph(g, 1 + 0.05 * np.cos(2 * g.theta) + 0.02 * np.cos(4 * g.theta))
    p = spec.params
    assert abs(deficit_C(f, spec) - deficit(f, p)) < 1e-12
    assert abs(mu_C_sq(f, spec)[0] - mu_sq(f, p)[0]) < 1e-12
    assert abs(alpha_C(f, spec)[0] - fraenkel_alpha(f, p)[0]) < 1e-12


def test_wrong_cross_section_rejected():
    spec = ConeSpec(3, math.pi / 3)
    g = cone_grid(ConeSpec(3, math.pi / 4))
    with pytest.raises(ValueError):
        perimeter_C(RadialGraph(g, np.ones(g.shape)), spec)
