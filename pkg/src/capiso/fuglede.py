"""Second-order expansion of ``P_lam`` around the bubble and related probes."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi

import numpy as np

from .capillarity import barycenters, deficit, mu0_sq, perimeter_lambda
from .geometry import (
    AngularGrid,
    CapParams,
    RadialGraph,
    ScalarField,
    bubble_volume,
    grad_vector,
    graph_volume,
    integrate_surface,
    make_grid,
    sobolev_norms,
    w_profile,
    w_values,
)

__all__ = [
    "FitResult",
    "RatioStats",
    "B_form",
    "half_space_form",
    "volume_normalized_graph",
    "standard_direction",
    "expansion_residual_sweep",
    "volume_expansion_residual",
    "volume_expansion_sweep",
    "zonal_fourier",
    "random_perturbation",
    "chain_check",
    "strong_probe",
    "nash_report",
    "loglog_fit",
    "coercivity_fit",
]


@dataclass
class FitResult:
    """Least-squares line through ``(log s, log value)``.

    ``degenerate`` is set when fewer than 5 usable points remain; ``dropped``
    lists the sample points removed as below the numerical floor.
    """

    slope: float
    intercept: float
    r_squared: float
    points: list
    dropped: list = field(default_factory=list)
    degenerate: bool = False

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "points": [[float(a), float(b)] for a, b in self.points],
            "dropped": [[float(a), float(b)] for a, b in self.dropped],
            "degenerate": self.degenerate,
        }


@dataclass
class RatioStats:
    """Summary of an empirical ratio over an ensemble at two resolutions."""

    name: str
    count: int
    min: float
    median: float
    max: float
    resolutions: tuple
    max_refined: float
    stability: float
    values: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "count": self.count,
            "min": self.min,
            "median": self.median,
            "max": self.max,
            "resolutions": list(self.resolutions),
            "max_refined": self.max_refined,
            "stability": self.stability,
        }


def loglog_fit(points, min_points: int = 5) -> FitResult:
    """Fit ``log value = slope log s + intercept``.

    Raises
    ------
    ValueError
        On nonpositive data or fewer than ``min_points`` points.
    """
    pts = [(float(a), float(b)) for a, b in points]
    if len(pts) < min_points:
        raise ValueError(f"need at least {min_points} points, got {len(pts)}")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss if ss > 0 else 1.0
    return FitResult(float(slope), float(intercept), float(min(max(r2, 0.0), 1.0)), pts)


def _fit_with_floor(points, floor: float) -> FitResult:
    keep = [(a, b) for a, b in points if b > floor]
    drop = [(a, b) for a, b in points if b <= floor]
    if len(keep) < 5:
        return FitResult(float("nan"), float("nan"), 0.0, keep, drop, degenerate=True)
    fit = loglog_fit(keep)
    fit.dropped = drop
    return fit


# ---------------------------------------------------------------------------
# quadratic forms


def _vals(u):
    return u.values if isinstance(u, ScalarField) else np.asarray(u, dtype=float)


def B_form(u: ScalarField, params: CapParams) -> float:
    """Second-order term of ``P_lam`` at the bubble for a volume-preserving ``u``."""
    grid = u.grid
    n = params.n
    w = w_values(params.lam, grid.height)
    gw = grad_vector(grid, w)
    gu = grad_vector(grid, u)
    uv = u.values
    q = w * w + np.sum(gw * gw, axis=-1)
    omega = w ** (n - 2) * np.sqrt(q)
    gwu = np.sum(gw * gu, axis=-1)
    gu2 = np.sum(gu * gu, axis=-1)
    gw2 = np.sum(gw * gw, axis=-1)
    brace = gu2 - gwu**2 / q - 2.0 * w * uv * gwu / q + gw2 * uv**2 / q
    integrand = 0.5 * (1 - n) * w ** (n - 2) * uv**2 + 0.5 * w ** (2 * n - 4) / omega * brace
    return integrate_surface(grid, integrand)


def half_space_form(u: ScalarField) -> float:
    """``1/2 int |grad u|^2 - (n - 1) u^2``."""
    grid = u.grid
    gu = grad_vector(grid, u)
    return 0.5 * integrate_surface(grid, np.sum(gu * gu, axis=-1) - (grid.n - 1) * u.values**2)


def volume_normalized_graph(phi, t: float, params: CapParams, grid: AngularGrid | None = None,
                            target: float | None = None):
    """``f_t = sigma (w + t phi)`` with ``|E_t| = |B^lam|``.

    Returns ``(RadialGraph, u_t)`` with ``u_t = f_t - w``.
    """
    grid = phi.grid if isinstance(phi, ScalarField) else grid
    n = params.n
    w = w_values(params.lam, grid.height)
    raw = w + t * _vals(phi)
    if np.any(raw <= 0):
        raise ValueError("w + t phi must be positive")
    V = integrate_surface(grid, raw**n / n)
    if target is None:
        if not grid.is_half_space:
            raise ValueError("target volume required off the half sphere")
        target = bubble_volume(n, params.lam)
    sigma = (target / V) ** (1.0 / n)
    f = sigma * raw
    return RadialGraph(ScalarField(grid, f)), ScalarField(grid, f - w)


def standard_direction(grid: AngularGrid) -> ScalarField:
    """Smooth zonal direction ``z^2 - z/2`` with ``z = <x, e_n>``."""
    z = grid.height
    return ScalarField(grid, z * z - 0.5 * z)


def expansion_residual_sweep(phi: ScalarField, s_list, params: CapParams,
                             floor: float = 1e-13) -> FitResult:
    """Fit of ``|P_lam(E_s) - P_lam(B) - B(u_s)|`` against ``s``."""
    s_list = np.asarray(s_list, dtype=float)
    if len(s_list) < 5:
        raise ValueError("at least 5 values of s are required")
    grid = phi.grid
    w = w_profile(params, grid)
    P0 = perimeter_lambda(w, params)
    pts = []
    for s in s_list:
        f, u = volume_normalized_graph(phi, s, params)
        r = abs(perimeter_lambda(f, params) - P0 - B_form(u, params))
        pts.append((s, r))
    return _fit_with_floor(pts, floor * max(1.0, abs(P0)))


def volume_expansion_residual(u, params: CapParams, grid: AngularGrid | None = None,
                              base=None) -> float:
    """``|vol(w + u) - int (w^n/n + w^{n-1} u + (n-1)/2 w^{n-2} u^2)|``.

    ``base`` replaces ``w`` (e.g. ``1`` on cone grids).
    """
    grid = u.grid if isinstance(u, ScalarField) else grid
    n = grid.n
    uv = _vals(u)
    w = w_values(params.lam, grid.height) if base is None else np.broadcast_to(base, grid.shape)
    exact = integrate_surface(grid, (w + uv) ** n / n)
    pred = integrate_surface(grid, w**n / n + w ** (n - 1) * uv + 0.5 * (n - 1) * w ** (n - 2) * uv**2)
    return abs(exact - pred)


def volume_expansion_sweep(u: ScalarField, s_list, params: CapParams, base=None,
                           floor: float = 1e-15) -> FitResult:
    pts = [(s, volume_expansion_residual(u * s, params, base=base)) for s in s_list]
    return _fit_with_floor(pts, floor)


# ---------------------------------------------------------------------------
# ensembles


def zonal_fourier(grid: AngularGrid, coeffs) -> np.ndarray:
    """``sum_j a_j cos(2 j theta (pi/2)/opening)`` evaluated on the grid.

    On ``n = 2`` arcs the polar angle is measured from the arc's start, so the
    odd modes break the left-right symmetry.
    """
    if grid.kind == "arc":
        ang = grid.theta * (pi / 2.0) / grid.opening
        scale = 1.0
    else:
        ang = grid.theta * (pi / 2.0) / grid.opening
        scale = 2.0
    th = ang if grid.kind != "full" else ang[:, None]
    out = np.zeros(grid.shape)
    for j, a in enumerate(coeffs, start=1):
        out = out + a * np.cos(scale * j * th)
    return out


def c1_norm(grid: AngularGrid, u) -> float:
    g = grad_vector(grid, u)
    return float(np.max(np.abs(_vals(u))) + np.max(np.linalg.norm(g, axis=-1)))


def random_perturbation(rng: np.random.Generator, modes: int = 6, decay: float = 2.0):
    """Random zonal-Fourier coefficients with an algebraic envelope."""
    return rng.normal(size=modes) / np.arange(1, modes + 1) ** decay


def _sample(params: CapParams, grid: AngularGrid, coeffs, cap: float, ref_grid=None):
    """Volume-normalized graph with ``||u||_{C^1} = cap`` measured on ``ref_grid``."""
    rg = ref_grid or grid
    base = zonal_fourier(rg, coeffs)
    scale = cap / c1_norm(rg, base)
    phi = ScalarField(grid, scale * zonal_fourier(grid, coeffs))
    return volume_normalized_graph(phi, 1.0, params)


def _ratio_stats(name, v1, v2, resolutions) -> RatioStats:
    v1 = np.asarray(v1)
    v2 = np.asarray(v2)
    m1 = float(np.max(v1))
    m2 = float(np.max(v2))
    return RatioStats(name, int(v1.size), float(np.min(v1)), float(np.median(v1)), m1,
                      tuple(resolutions), m2, abs(m2 - m1) / abs(m1), v1)


def chain_check(ensemble_size: int, perturbation_cap: float, params: CapParams, seed: int,
                resolution: int = 128, modes: int = 6):
    """Ratio statistics of ``mu0^2/||u||_H1^2`` and ``||u||_H1^2/(D + |bar|^2)``.

    Each sample is drawn from ``default_rng([seed, index])``, evaluated at
    ``resolution`` and ``2 * resolution``.
    """
    if perturbation_cap > 0.05:
        raise ValueError("perturbation cap must be at most 0.05")
    grids = [make_grid(params.n, None, resolution), make_grid(params.n, None, 2 * resolution)]
    r1 = [[], []]
    r2 = [[], []]
    for i in range(ensemble_size):
        rng = np.random.default_rng([seed, i])
        coeffs = random_perturbation(rng, modes)
        amp = perturbation_cap * rng.uniform(0.2, 1.0)
        if not np.any(coeffs):
            continue
        for level, grid in enumerate(grids):
            f, u = _sample(params, grid, coeffs, amp, ref_grid=grids[0])
            _, _, h1 = sobolev_norms(grid, u)
            if h1 == 0.0:
                continue
            m0 = mu0_sq(f, params)
            bar, _ = barycenters(f, params)
            D = deficit(f, params)
            r1[level].append(m0 / h1)
            r2[level].append(h1 / (D + float(bar @ bar)))
    res = (resolution, 2 * resolution)
    return (_ratio_stats("mu0_sq / H1_sq", *r1, res),
            _ratio_stats("H1_sq / (deficit + |bar_H|^2)", *r2, res))


def strong_probe(target, ensemble_size: int = 50, seed: int = 0, resolution: int = 128,
                 cap_range=(0.01, 0.5), modes: int = 6):
    """Ratio statistics of ``mu^2/D`` and ``alpha^2/D`` on random graphs.

    ``target`` is ``CapParams`` (capillarity) or ``ConeSpec`` (cone
    functionals).  The C^1 size of the perturbation is log-uniform in
    ``cap_range``, so the ensemble reaches large deformations.  Every sample is
    evaluated at ``resolution`` and ``2 * resolution``.
    """
    from . import capillarity as cap
    from . import cones

    is_cone = isinstance(target, cones.ConeSpec)
    if is_cone:
        grids = [cones.cone_grid(target, r) for r in (resolution, 2 * resolution)]
    else:
        grids = [make_grid(target.n, None, r) for r in (resolution, 2 * resolution)]
    lo, hi = cap_range
    r_mu = [[], []]
    r_al = [[], []]
    for i in range(ensemble_size):
        rng = np.random.default_rng([seed, i])
        coeffs = random_perturbation(rng, modes)
        amp = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
        if not np.any(coeffs):
            continue
        base = zonal_fourier(grids[0], coeffs)
        scale = amp / c1_norm(grids[0], base)
        for level, grid in enumerate(grids):
            u = scale * zonal_fourier(grid, coeffs)
            if is_cone:
                f = RadialGraph(ScalarField(grid, 1.0 + u))
                D = cones.deficit_C(f, target)
                m, _ = cones.mu_C_sq(f, target)
                a, _ = cones.alpha_C(f, target)
            else:
                f, _ = volume_normalized_graph(ScalarField(grid, u), 1.0, target)
                D = cap.deficit(f, target)
                m, _, _ = cap.mu_sq(f, target)
                a, _ = cap.fraenkel_alpha(f, target)
            r_mu[level].append(m / D)
            r_al[level].append(a * a / D)
    res = (resolution, 2 * resolution)
    return (_ratio_stats("mu_sq / deficit", *r_mu, res),
            _ratio_stats("alpha_sq / deficit", *r_al, res))


def coercivity_fit(params: CapParams, samples: int = 40, seed: int = 0, resolution: int = 128):
    """Fit ``B(u) >= c int |grad u|^2 - C int u^2`` over random fields.

    Returns ``(c, C)``: ``c`` is the regression slope of ``B/int u^2`` against
    ``int|grad u|^2/int u^2`` and ``C`` the smallest constant covering all
    samples.
    """
    grid = make_grid(params.n, None, resolution)
    rows = []
    for i in range(samples):
        rng = np.random.default_rng([seed, i])
        u = ScalarField(grid, zonal_fourier(grid, random_perturbation(rng, 8, 1.0)))
        _, l2, h1 = sobolev_norms(grid, u)
        g2 = h1 - l2
        rows.append((g2 / l2, B_form(u, params) / l2))
    x = np.array([r[0] for r in rows])
    y = np.array([r[1] for r in rows])
    # least-squares slope, then the smallest C covering every sample
    c = float(np.polyfit(x, y, 1)[0])
    C = float(np.max(c * x - y))
    return c, C


def nash_report(u_list, delta_list, sigma0: AngularGrid | None = None):
    """Table of ``(int u^2 - delta int|grad u|^2) delta^{alpha}/(int|u|)^2``.

    ``alpha = k/2`` with ``k = max(n, 4)``; entries with ``int|u| = 0`` are
    skipped.
    """
    rows = []
    for i, u in enumerate(u_list):
        grid = u.grid if isinstance(u, ScalarField) else sigma0
        k = max(grid.n, 4)
        alpha = k / 2.0
        l1, l2, h1 = sobolev_norms(grid, u)
        if l1 == 0.0:
            continue
        g2 = h1 - l2
        for delta in delta_list:
            if not 0.0 < delta < 1.0:
                raise ValueError("delta must lie in (0, 1)")
            rows.append({"index": i, "delta": float(delta), "alpha": alpha, "k0": 4,
                         "ratio": (l2 - delta * g2) * delta**alpha / l1**2})
    return rows
