import math

import numpy as np
import pytest

from capiso.geometry import CapParams, RadialGraph, bubble_volume, graph_volume, make_grid, w_profile
from capiso.oracle import (
    bubble_indicator,
    cap_volume_exact,
    graph_indicator,
    mc_symdiff,
    mc_volume,
    richardson,
)


def test_closed_forms():
    assert abs(cap_volume_exact(3, 0.0) - 2 * math.pi / 3) < 1e-15
    assert abs(cap_volume_exact(3, 0.5) - 0.6544985) < 1e-7
    assert abs(cap_volume_exact(2, 0.0) - math.pi / 2) < 1e-15
    for lam in (-0.7, 0.2):
        assert abs(cap_volume_exact(3, lam) - bubble_volume(3, lam)) < 1e-13
    with pytest.raises(ValueError):
        cap_volume_exact(4, 0.0)
    with pytest.raises(ValueError):
        cap_volume_exact(3, 1.0)


def test_mc_half_ball():
    region = bubble_indicator(3, 0.0, [0.0, 0.0], 1.0)
    est = mc_volume(region, ([-1, -1, 0], [1, 1, 1]), 200_000, seed=0)
    assert est.agrees(2 * math.pi / 3)
    assert abs(est.value - 2.0944) < 4 * est.standard_error


def test_mc_cap_bubble():
    region = bubble_indicator(3, 0.5, [0.0, 0.0], 1.0)
    est = mc_volume(region, ([-1, -1, 0], [1, 1, 1]), 200_000, seed=1)
    assert est.agrees(0.6544985)


def test_mc_empty_region_and_errors():
    est = mc_volume(lambda x: np.zeros(len(x), bool), ([0, 0], [1, 1]), 1000, seed=0)
    assert est.value == 0.0 and est.standard_error == 0.0
    with pytest.raises(ValueError):
        mc_volume(lambda x: x[:, 0] > 0, ([0, 0], [0, 1]), 10, seed=0)
    with pytest.raises(ValueError):
        bubble_indicator(3, 0.0, [0, 0], 0.0)


def test_mc_deterministic():
    region = bubble_indicator(2, 0.2, [0.1], 1.0)
    a = mc_volume(region, ([-1.3, 0], [1.3, 1.3]), 300_000, seed=4)
    b = mc_volume(region, ([-1.3, 0], [1.3, 1.3]), 300_000, seed=4)
    assert a == b


@pytest.mark.parametrize("n,az", [(2, 0), (3, 0), (3, 32)])
def test_graph_indicator_volume(n, az):
    p = CapParams(n, 0.0)
    g = make_grid(p, resolution=64, azimuth_count=az)
    th = g.theta if az == 0 else g.theta[:, None]
    pert = 1 + 0.1 * np.cos(2 * th)
    if az:
        pert = pert + 0.05 * np.sin(th) ** 2 * np.cos(g.phi)[None, :]
    f = RadialGraph(g, w_profile(p, g).values * pert)
    lo = np.concatenate([np.full(n - 1, -1.2), [0.0]])
    est = mc_volume(graph_indicator(f), (lo, np.full(n, 1.2)), 200_000, seed=2)
    assert est.agrees(graph_volume(f), 4.0)


def test_mc_symdiff_of_bubble_is_zero_and_scale_checked():
    p = CapParams(2, 0.3)
    g = make_grid(p, resolution=64)
    w = w_profile(p, g)
    est = mc_symdiff(w, p, [0.0], 1.0, 100_000, seed=0)
    assert est.value < 1e-3
    with pytest.raises(ValueError):
        mc_symdiff(w, p, [0.0], -1.0, 10, seed=0)


def _simpson(k):
    x = np.linspace(0, 1, k + 1)
    y = np.exp(x)
    return (1 / (3 * k)) * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())


def test_richardson_simpson():
    r = richardson(_simpson, [8, 16, 32, 64])
    assert r.observed_order >= 3.5
    assert abs(r.extrapolated - (math.e - 1)) < 1e-10
    assert not r.non_monotone


def test_richardson_exact_and_oscillating():
    r = richardson(lambda k: 2.0, [8, 16, 32])
    assert r.error_estimate == 0.0 and r.extrapolated == 2.0
    r = richardson(lambda k: 1.0 + (-1) ** (k // 8) / k, [8, 16, 32, 64])
    assert r.non_monotone
    with pytest.raises(ValueError):
        richardson(lambda k: 1.0, [8, 16])
    with pytest.raises(ValueError):
        richardson(lambda k: 1.0, [8, 16, 40])
