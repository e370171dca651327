"""Functionals on circular convex cones and on the half space.

A cone of half-angle ``omega`` around ``e_n`` has cross section
``{theta <= omega}``; ``omega = pi/2`` is the half space, whose translation
group is the whole hyperplane.  There every functional is the ``lam = 0``
capillarity functional.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

from . import capillarity as cap
from .capillarity import TranslationCandidate, surface_data
from .geometry import (
    AngularGrid,
    CapParams,
    RadialGraph,
    ScalarField,
    grad_vector,
    graph_volume,
    integrate_surface,
    make_grid,
)

__all__ = [
    "ConeSpec",
    "ConeReport",
    "cone_grid",
    "K_volume",
    "perimeter_C",
    "mu_C0_sq",
    "mu_C0_sq_divergence",
    "alpha_C",
    "deficit_C",
    "mu_C_sq",
    "cone_fuglede_form",
    "cone_report",
]


@dataclass(frozen=True)
class ConeSpec:
    """Circular cone in ``R^n`` with half-angle ``omega`` in ``(0, pi/2]``."""

    n: int
    omega: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("dimension must be an integer >= 2")
        if not (0.0 < self.omega <= pi / 2.0 + 1e-15):
            raise ValueError("omega must lie in (0, pi/2] (convex cones only)")
        object.__setattr__(self, "omega", min(float(self.omega), pi / 2.0))

    @property
    def is_half_space(self) -> bool:
        return self.omega == pi / 2.0

    @property
    def params(self) -> CapParams:
        return CapParams(self.n, 0.0)


@dataclass
class ConeReport:
    volume: float
    perimeter_C: float
    mu_C0_sq: float
    mu_C_sq: float
    mu_argmin: TranslationCandidate
    alpha_C: float
    alpha_argmin: TranslationCandidate
    deficit_C: float

    def as_dict(self) -> dict:
        def cand(c):
            return {"magnitude": c.magnitude, "direction": list(c.direction), "value": c.value}

        return {
            "volume": self.volume,
            "perimeter_C": self.perimeter_C,
            "mu_C0_sq": self.mu_C0_sq,
            "mu_C_sq": self.mu_C_sq,
            "mu_argmin": cand(self.mu_argmin),
            "alpha_C": self.alpha_C,
            "alpha_argmin": cand(self.alpha_argmin),
            "deficit_C": self.deficit_C,
        }


def cone_grid(spec: ConeSpec, resolution: int = 128, azimuth_count: int = 0) -> AngularGrid:
    """Grid on the cross section; for ``n = 2`` the arc has length ``2 omega``."""
    te = 2.0 * spec.omega if spec.n == 2 else spec.omega
    return make_grid(spec.n, te, resolution, azimuth_count)


def _check(f: RadialGraph, spec: ConeSpec):
    if f.grid.n != spec.n or abs(f.grid.opening - spec.omega) > 1e-14:
        raise ValueError("graph does not live on this cone's cross section")


def K_volume(spec: ConeSpec, resolution: int = 128) -> float:
    """``|K_C| = |Sigma_C|/n`` by quadrature of ``f = 1``."""
    g = cone_grid(spec, resolution)
    return graph_volume(RadialGraph(ScalarField(g, np.ones(g.shape))))


def perimeter_C(f: RadialGraph, spec: ConeSpec) -> float:
    """Relative perimeter inside the cone (the lateral contact is free)."""
    _check(f, spec)
    return integrate_surface(f.grid, surface_data(f).J)


def mu_C0_sq(f: RadialGraph, spec: ConeSpec) -> float:
    """``1/2 int |nu - x/|x||^2`` over the free boundary."""
    _check(f, spec)
    sd = surface_data(f)
    d = sd.nu - f.grid.dirs
    return 0.5 * integrate_surface(f.grid, np.sum(d * d, axis=-1) * sd.J)


def mu_C0_sq_divergence(f: RadialGraph, spec: ConeSpec) -> float:
    """``P_C(E) - int_E (n - 1)/|x|``."""
    _check(f, spec)
    sd = surface_data(f)
    return integrate_surface(f.grid, sd.J - f.values ** (spec.n - 1))


def _scale(f: RadialGraph, spec: ConeSpec) -> float:
    """``s`` with ``|s K_C| = |E|``."""
    Kv = integrate_surface(f.grid, np.full(f.grid.shape, 1.0 / spec.n))
    return (graph_volume(f) / Kv) ** (1.0 / spec.n)


def _zero(n: int, value: float) -> TranslationCandidate:
    return TranslationCandidate(0.0, tuple([1.0] + [0.0] * (n - 2)), float(value))


def alpha_C(f: RadialGraph, spec: ConeSpec):
    """Fraenkel asymmetry in the cone and its optimal translation."""
    _check(f, spec)
    if spec.is_half_space:
        return cap.fraenkel_alpha(f, spec.params)
    n = spec.n
    s = _scale(f, spec)
    V = graph_volume(f)
    val = integrate_surface(f.grid, np.abs(f.values**n - s**n) / n) / V
    return val, _zero(n, val)


def deficit_C(f: RadialGraph, spec: ConeSpec) -> float:
    _check(f, spec)
    if spec.is_half_space:
        return cap.deficit(f, spec.params)
    n = spec.n
    Kv = integrate_surface(f.grid, np.full(f.grid.shape, 1.0 / n))
    V = graph_volume(f)
    return perimeter_C(f, spec) / (n * Kv ** (1.0 / n) * V ** ((n - 1.0) / n)) - 1.0


def mu_C_sq(f: RadialGraph, spec: ConeSpec):
    """Normalized oscillation asymmetry ``mu_C^2`` and its optimal translation.

    Returns ``(value, candidate)``.
    """
    _check(f, spec)
    if spec.is_half_space:
        val, c, _ = cap.mu_sq(f, spec.params)
        return val, c
    s = _scale(f, spec)
    val = mu_C0_sq(f, spec) / s ** (spec.n - 1)
    return val, _zero(spec.n, val)


def cone_fuglede_form(u: ScalarField, spec: ConeSpec) -> float:
    """``1/2 int (|grad u|^2 - (n - 1) u^2)`` over the cross section."""
    grid = u.grid
    if grid.n != spec.n or abs(grid.opening - spec.omega) > 1e-14:
        raise ValueError("field does not live on this cone's cross section")
    gu = grad_vector(grid, u)
    return 0.5 * integrate_surface(grid, np.sum(gu * gu, axis=-1) - (spec.n - 1) * u.values**2)


def cone_report(f: RadialGraph, spec: ConeSpec) -> ConeReport:
    mu, mu_arg = mu_C_sq(f, spec)
    al, al_arg = alpha_C(f, spec)
    return ConeReport(
        volume=graph_volume(f),
        perimeter_C=perimeter_C(f, spec),
        mu_C0_sq=mu_C0_sq(f, spec),
        mu_C_sq=mu,
        mu_argmin=mu_arg,
        alpha_C=al,
        alpha_argmin=al_arg,
        deficit_C=deficit_C(f, spec),
    )
