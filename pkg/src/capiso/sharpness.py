"""Sharpness family ``E_t`` and the elementary inequalities behind it.

``E_t`` is the volume-normalized graph ``sigma_t (w_lam + t phi)`` where
``phi`` is axisymmetric, supported away from the pole and the equator, and
orthogonal to ``w_lam^{n-1}``.  Along the family both the deficit and the
oscillation asymmetry scale like ``t^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .capillarity import deficit, mu0_sq, mu_sq
from .fuglede import FitResult, _fit_with_floor, volume_normalized_graph
from .geometry import (
    AngularGrid,
    CapParams,
    RadialGraph,
    ScalarField,
    integrate_surface,
    make_grid,
    w_values,
)

__all__ = [
    "Bump",
    "DEFAULT_BUMPS",
    "bump",
    "build_direction",
    "SharpnessSweep",
    "sharpness_sweep",
    "symmetric_factor_check",
    "elementary_inequality_mc",
    "geometric_estimate_probe",
    "mc_rng",
]


@dataclass(frozen=True)
class Bump:
    """``(1 - ((z - a)/r)^2)^4`` on ``|z - a| < r``, in the height ``z``."""

    a: float
    r: float

    def __post_init__(self):
        if not (self.r > 0 and 0.0 < self.a - self.r and self.a + self.r < 1.0):
            raise ValueError("bump support must lie strictly inside (0, 1)")


DEFAULT_BUMPS = (Bump(0.3, 0.2), Bump(0.75, 0.2))


def bump(b: Bump, z) -> np.ndarray:
    s = (np.asarray(z, dtype=float) - b.a) / b.r
    return np.where(np.abs(s) < 1.0, (1.0 - s * s) ** 4, 0.0)


def build_direction(params: CapParams, grid: AngularGrid, bump_spec=DEFAULT_BUMPS) -> ScalarField:
    """``phi = bump_1 - c bump_2`` with ``int w^{n-1} phi = 0`` on ``grid``."""
    if not grid.is_half_space or grid.n != params.n:
        raise ValueError("grid must be the half sphere of matching dimension")
    b1, b2 = bump_spec
    z = grid.height
    p1, p2 = bump(b1, z), bump(b2, z)
    wn = w_values(params.lam, z) ** (params.n - 1)
    i1, i2 = integrate_surface(grid, wn * p1), integrate_surface(grid, wn * p2)
    if i1 == 0.0 or i2 == 0.0:
        raise ValueError("degenerate bumps: zero weighted integral")
    return ScalarField(grid, p1 - (i1 / i2) * p2)


@dataclass
class SharpnessSweep:
    t: np.ndarray
    D: np.ndarray
    mu_sq: np.ndarray
    mu0_sq: np.ndarray
    fit_D: FitResult
    fit_mu: FitResult
    ratio_bracket: tuple
    factor_ok: list = field(default_factory=list)

    @property
    def ratio_spread(self) -> float:
        lo, hi = self.ratio_bracket
        return hi / lo if lo > 0 else float("inf")

    def as_dict(self) -> dict:
        return {
            "t": self.t.tolist(),
            "D": self.D.tolist(),
            "mu_sq": self.mu_sq.tolist(),
            "mu0_sq": self.mu0_sq.tolist(),
            "slope_D": self.fit_D.as_dict(),
            "slope_mu_sq": self.fit_mu.as_dict(),
            "ratio_bracket": list(self.ratio_bracket),
            "ratio_spread": self.ratio_spread,
            "factor_20_ok": list(self.factor_ok),
        }


def sharpness_sweep(params: CapParams, t_list=None, resolution: int = 128,
                    bump_spec=DEFAULT_BUMPS, floor: float = 1e-13) -> SharpnessSweep:
    """Evaluate ``D``, ``mu^2`` and ``mu_0^2`` along ``E_t`` and fit slopes."""
    t = np.asarray(np.logspace(-3, -1, 7) if t_list is None else t_list, dtype=float)
    if t.size < 6 or np.any(t <= 0) or np.any(np.diff(t) <= 0) or t[-1] > 0.1:
        raise ValueError("t_list must be >= 6 increasing values in (0, 0.1]")
    grid = make_grid(params, resolution=resolution)
    phi = build_direction(params, grid, bump_spec)
    D, M, M0, ok = [], [], [], []
    for ti in t:
        f, _ = volume_normalized_graph(phi, float(ti), params)
        d = deficit(f, params)
        m, _, _ = mu_sq(f, params)
        m0 = mu0_sq(f, params)
        D.append(d)
        M.append(m)
        M0.append(m0)
        ok.append(bool(m0 <= 20.0 * m + 1e-8))
    D, M, M0 = np.array(D), np.array(M), np.array(M0)
    fit_D = _fit_with_floor(list(zip(t, D)), floor)
    fit_mu = _fit_with_floor(list(zip(t, M)), floor)
    keep = (D > floor) & (M > floor)
    r = D[keep] / M[keep]
    bracket = (float(r.min()), float(r.max())) if r.size else (float("nan"), float("nan"))
    return SharpnessSweep(t, D, M, M0, fit_D, fit_mu, bracket, ok)


def symmetric_factor_check(f: RadialGraph, params: CapParams):
    """``(mu0_sq, mu_sq, mu0_sq <= 20 mu_sq + 1e-8)`` for an axisymmetric graph."""
    if f.grid.kind == "full":
        v = f.values
        if np.max(np.abs(v - v[:, :1])) > 1e-12 * np.max(np.abs(v)):
            raise ValueError("graph is not axisymmetric")
    m0 = mu0_sq(f, params)
    m, _, _ = mu_sq(f, params)
    return m0, m, bool(m0 <= 20.0 * m + 1e-8)


# ---------------------------------------------------------------------------
# Monte Carlo probes of the elementary inequalities


def mc_rng(seed: int, block: int) -> np.random.Generator:
    """Counter-based stream for ``(seed, block)``."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, block], dtype=np.uint64)))


def _blocks(samples: int, block_size: int):
    full, rest = divmod(samples, block_size)
    return [block_size] * full + ([rest] if rest else [])


def _unit(x):
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def elementary_violation(v, w) -> np.ndarray:
    """``<(v+2w)/|v+2w|, v> - <(v+w)/|v+w|, v>`` (nonpositive when it holds)."""
    v, w = np.asarray(v, float), np.asarray(w, float)
    a = np.sum(_unit(v + w) * v, axis=-1)
    b = np.sum(_unit(v + 2.0 * w) * v, axis=-1)
    return b - a


def elementary_inequality_mc(samples: int = 1_000_000, seed: int = 0, tol: float = 1e-12,
                             block_size: int = 250_000) -> int:
    """Violations of ``<(v+w)/|v+w|, v> >= <(v+2w)/|v+2w|, v>`` over random
    pairs in the plane; ``w = 0`` and parallel pairs are excluded."""
    count = 0
    for i, m in enumerate(_blocks(samples, block_size)):
        rng = mc_rng(seed, i)
        v = rng.normal(size=(m, 2))
        w = rng.normal(size=(m, 2)) * rng.lognormal(0.0, 1.5, size=(m, 1))
        cross = v[:, 0] * w[:, 1] - v[:, 1] * w[:, 0]
        nv, nw = np.linalg.norm(v, axis=1), np.linalg.norm(w, axis=1)
        good = (nw > 1e-12) & (np.abs(cross) > 1e-12 * nv * nw)
        d = elementary_violation(v[good], w[good])
        count += int(np.sum(d > tol * np.maximum(1.0, nv[good])))
    return count


def geometric_estimate_probe(samples: int = 1_000_000, seed: int = 0, dim: int = 3,
                             block_size: int = 250_000) -> float:
    """Empirical ``C`` in ``|v - (w+z)/|w+z||^2 >= |v - w/|w||^2 - C |z|``.

    Samples ``|v| = 1``, ``|w|`` in ``[1/2, 2]`` and ``|z|`` in ``(0, 1/4]``.
    """
    best = 0.0
    for i, m in enumerate(_blocks(samples, block_size)):
        rng = mc_rng(seed, i)
        v = _unit(rng.normal(size=(m, dim)))
        w = _unit(rng.normal(size=(m, dim))) * rng.uniform(0.5, 2.0, size=(m, 1))
        z = _unit(rng.normal(size=(m, dim))) * (0.25 * rng.uniform(size=(m, 1)))
        nz = np.linalg.norm(z, axis=1)
        ok = nz > 0
        lhs = np.sum((v - _unit(w + z)) ** 2, axis=1)
        rhs = np.sum((v - _unit(w)) ** 2, axis=1)
        q = (rhs[ok] - lhs[ok]) / nz[ok]
        if q.size:
            best = max(best, float(q.max()))
    return best
