"""Independent ground truth: closed forms, Monte Carlo and Richardson refinement.

Nothing here reuses the quadrature code paths it is meant to check.  Random
streams come from the counter-based Philox4x64 generator keyed by
``(seed, block)``; blocks have a fixed size and are reduced in order, so an
estimate depends only on ``(seed, N)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import acos, log, pi, sqrt

import numpy as np
from scipy.interpolate import CubicSpline, RegularGridInterpolator

from .geometry import CapParams, RadialGraph

__all__ = [
    "cap_volume_exact",
    "McEstimate",
    "mc_volume",
    "mc_symdiff",
    "graph_indicator",
    "bubble_indicator",
    "RichardsonResult",
    "richardson",
    "BLOCK_SIZE",
]

BLOCK_SIZE = 1 << 17


def cap_volume_exact(n: int, lam: float) -> float:
    """``|B^lam|`` from the elementary closed forms in the plane and in space."""
    if not -1.0 < lam < 1.0:
        raise ValueError("lambda must lie in (-1, 1)")
    if n == 2:
        return acos(lam) - lam * sqrt(1.0 - lam * lam)
    if n == 3:
        return pi * (1.0 - lam) ** 2 * (2.0 + lam) / 3.0
    raise ValueError("closed form available for n = 2 and n = 3 only")


@dataclass(frozen=True)
class McEstimate:
    value: float
    standard_error: float
    count: int
    seed: int

    def agrees(self, reference: float, sigmas: float = 3.0) -> bool:
        return abs(self.value - reference) <= sigmas * self.standard_error

    def as_dict(self) -> dict:
        return {"value": self.value, "standard_error": self.standard_error,
                "count": self.count, "seed": self.seed}


def _stream(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, block], dtype=np.uint64)))


def mc_volume(region, bbox, N: int, seed: int) -> McEstimate:
    """Hit-or-miss volume of ``region`` (a vectorized predicate on ``(m, d)``
    point arrays) inside the box ``bbox = (lower, upper)``."""
    lo, hi = (np.asarray(b, dtype=float) for b in bbox)
    if lo.shape != hi.shape or lo.ndim != 1 or np.any(hi <= lo):
        raise ValueError("empty bounding box")
    if N < 1:
        raise ValueError("N must be positive")
    box = float(np.prod(hi - lo))
    hits = 0
    done = 0
    block = 0
    while done < N:
        m = min(BLOCK_SIZE, N - done)
        pts = lo + (hi - lo) * _stream(seed, block).random((m, lo.size))
        hits += int(np.count_nonzero(region(pts)))
        done += m
        block += 1
    p = hits / N
    return McEstimate(p * box, sqrt(p * (1.0 - p) / N) * box, N, seed)


# ---------------------------------------------------------------------------
# point-membership tests


def _arc_start(grid) -> float:
    return (pi - grid.theta_end) / 2.0


def _radial_interpolant(f: RadialGraph):
    """Callable mapping unit directions ``(m, d)`` to interpolated radii."""
    grid = f.grid
    v = f.values
    if grid.kind == "arc":
        spline = CubicSpline(grid.theta, v)
        t0 = _arc_start(grid)

        def radius(u):
            t = np.arctan2(u[:, 1], u[:, 0]) - t0
            inside = (t >= 0) & (t <= grid.theta_end)
            out = np.zeros(len(u))
            out[inside] = spline(t[inside])
            return out, inside

        return radius
    if grid.kind == "zonal":
        # even extension across the pole keeps the spline smooth there
        th = np.concatenate([-grid.theta[:0:-1], grid.theta])
        spline = CubicSpline(th, np.concatenate([v[:0:-1], v]))

        def radius(u):
            t = np.arccos(np.clip(u[:, -1], -1.0, 1.0))
            inside = t <= grid.theta_end
            out = np.zeros(len(u))
            out[inside] = spline(t[inside])
            return out, inside

        return radius
    # full grid: periodic in azimuth, even reflection through the pole
    M = grid.azimuth_count
    half = M // 2
    phi = np.concatenate([grid.phi - 2 * pi, grid.phi, grid.phi + 2 * pi])
    vals = np.concatenate([v, v, v], axis=1)
    refl = np.roll(v, -half, axis=1)[1:][::-1]
    refl = np.concatenate([refl, refl, refl], axis=1)
    th = np.concatenate([-grid.theta[1:][::-1], grid.theta])
    table = np.concatenate([refl, vals], axis=0)
    interp = RegularGridInterpolator((th, phi), table, method="cubic")

    def radius(u):
        t = np.arccos(np.clip(u[:, 2], -1.0, 1.0))
        p = np.mod(np.arctan2(u[:, 1], u[:, 0]), 2 * pi)
        inside = t <= grid.theta_end
        out = np.zeros(len(u))
        out[inside] = interp(np.stack([t[inside], p[inside]], axis=-1))
        return out, inside

    return radius


def graph_indicator(f: RadialGraph):
    """Predicate ``x in E`` for the star-shaped set bounded by the graph."""
    radius = _radial_interpolant(f)

    def region(x):
        r = np.linalg.norm(x, axis=1)
        u = x / np.where(r > 0, r, 1.0)[:, None]
        rad, inside = radius(u)
        return inside & (r < rad)

    return region


def bubble_indicator(n: int, lam: float, x_prime, s: float):
    """Predicate ``x in s B^lam + x'`` with ``B^lam = B_1(-lam e_n) cap H^+``."""
    if s <= 0:
        raise ValueError("scale must be positive")
    c = np.zeros(n)
    c[: n - 1] = np.atleast_1d(np.asarray(x_prime, dtype=float))
    c[-1] = -s * lam

    def region(x):
        return (x[:, -1] > 0) & (np.sum((x - c) ** 2, axis=1) < s * s)

    return region


def mc_symdiff(f: RadialGraph, params: CapParams, x_prime, s: float, N: int,
               seed: int) -> McEstimate:
    """Monte Carlo ``|E Delta (s B^lam + x')|`` on the half space."""
    if s <= 0:
        raise ValueError("scale must be positive")
    n = params.n
    if f.grid.n != n or not f.grid.is_half_space:
        raise ValueError("graph must live on the half sphere of matching dimension")
    xp = np.zeros(n - 1)
    xp[:] = np.atleast_1d(np.asarray(x_prime, dtype=float))
    R_e = 1.05 * float(np.max(f.values))
    R_b = s * (1.0 + abs(params.lam)) + float(np.linalg.norm(xp))
    R = max(R_e, R_b)
    lo = np.concatenate([np.full(n - 1, -R), [0.0]])
    hi = np.full(n, R)
    in_e = graph_indicator(f)
    in_b = bubble_indicator(n, params.lam, xp, s)
    return mc_volume(lambda x: in_e(x) ^ in_b(x), (lo, hi), N, seed)


# ---------------------------------------------------------------------------
# Richardson refinement


@dataclass(frozen=True)
class RichardsonResult:
    extrapolated: float
    error_estimate: float
    observed_order: float
    non_monotone: bool
    values: tuple

    def as_dict(self) -> dict:
        return {"extrapolated": self.extrapolated, "error_estimate": self.error_estimate,
                "observed_order": self.observed_order, "non_monotone": self.non_monotone,
                "values": list(self.values)}


def richardson(evaluate, resolutions, order: float | None = None) -> RichardsonResult:
    """Extrapolate ``evaluate(res)`` over geometrically refined resolutions.

    The convergence order is ``order`` when given, otherwise the one observed
    on the last three levels.  The error estimate is the Richardson correction
    from the last two levels.  Differences that change sign or fail to shrink
    raise the ``non_monotone`` flag.
    """
    res = [float(r) for r in resolutions]
    if len(res) < 3:
        raise ValueError("at least 3 resolutions are required")
    ratios = [b / a for a, b in zip(res, res[1:])]
    if any(r <= 1 for r in ratios) or max(ratios) - min(ratios) > 1e-12 * max(ratios):
        raise ValueError("resolutions must be geometric and increasing")
    ratio = ratios[0]
    vals = [float(evaluate(int(r))) for r in resolutions]
    d = np.diff(vals)
    scale = max(abs(v) for v in vals) or 1.0
    if np.all(np.abs(d) <= 1e-15 * scale):
        return RichardsonResult(vals[-1], 0.0, float("inf"), False, tuple(vals))
    non_monotone = bool(np.any(d[1:] * d[:-1] < 0) or np.any(np.abs(d[1:]) >= np.abs(d[:-1])))
    d1, d2 = d[-2], d[-1]
    observed = log(abs(d1 / d2)) / log(ratio) if d2 != 0 and d1 != 0 else float("inf")
    p = observed if order is None else float(order)
    if not np.isfinite(p) or p <= 0:
        return RichardsonResult(vals[-1], float(abs(d2)), float(observed), True, tuple(vals))
    corr = d2 / (ratio**p - 1.0)
    return RichardsonResult(float(vals[-1] + corr), float(abs(corr)), float(observed),
                            non_monotone, tuple(vals))
