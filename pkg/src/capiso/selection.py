"""Finite-dimensional analogue of the selection principle.

The penalized functionals

    F_k(F) = P_lam(F) + Lambda ||F| - |B^lam|| - mu^2_{lam,0}(F)/k + |b~(F)|^2
    G_k(F) = P_C(F)   + Lambda ||F| - |K_C||   - mu^2_{C,0}(F)/k   + |b~(F)|^2

are minimized over the nodal values of a radial graph on a fixed grid (arc
for ``n = 2``, zonal for ``n >= 3``).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import ceil, pi

import numpy as np

from .capillarity import _clip_moment, psi
from .cones import ConeSpec, cone_grid
from .fuglede import FitResult, _fit_with_floor
from .geometry import (
    AngularGrid,
    CapParams,
    RadialGraph,
    ScalarField,
    bubble_volume,
    make_grid,
    w_values,
)

__all__ = [
    "k_lambda",
    "SelectionConfig",
    "SelectionTrace",
    "CapillaritySelection",
    "ConeSelection",
    "F_k",
    "G_k",
    "gradient",
    "check_gradient",
    "minimize",
    "standard_inits",
    "selection_sweep",
    "SweepResult",
]


def k_lambda(lam: float) -> int:
    """Least integer ``>= max(10, 4/(1 - |lam|))``."""
    if not -1.0 < lam < 1.0:
        raise ValueError("lambda must lie in (-1, 1)")
    return int(ceil(max(10.0, 4.0 / (1.0 - abs(lam))) - 1e-12))


@dataclass
class SelectionConfig:
    """Optimizer settings.

    ``Lambda`` defaults to ``4 n`` when left as ``None``.  ``band`` is the
    relative volume gap below which the volume term is treated as active.
    """

    k: float
    Lambda: float | None = None
    max_iters: int = 5000
    armijo: float = 1e-4
    shrink: float = 0.5
    gradient_mode: str = "analytic"
    init: RadialGraph | None = None
    tol: float = 1e-8
    multistart: int = 3
    band: float = 1e-10
    fd_step: float = 1e-6

    def __post_init__(self):
        if self.gradient_mode not in ("analytic", "finite-difference"):
            raise ValueError("gradient_mode must be 'analytic' or 'finite-difference'")
        if self.max_iters < 1 or not (0 < self.shrink < 1) or not (0 < self.armijo < 1):
            raise ValueError("invalid step rule parameters")


@dataclass
class SelectionTrace:
    values: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    final_grad_norm: float = float("nan")
    final: RadialGraph | None = None
    converged: bool = False
    message: str = ""
    symdiff: float = float("nan")
    volume_gap: float = float("nan")
    b_tilde: np.ndarray | None = None
    guard_violations: int = 0

    @property
    def monotone(self) -> bool:
        v = np.asarray(self.values)
        return bool(np.all(np.diff(v) <= 0.0))

    def as_dict(self) -> dict:
        return {
            "iterations": len(self.values) - 1,
            "initial_value": self.values[0] if self.values else None,
            "final_value": self.values[-1] if self.values else None,
            "final_grad_norm": self.final_grad_norm,
            "converged": self.converged,
            "message": self.message,
            "symdiff": self.symdiff,
            "volume_gap": self.volume_gap,
            "b_tilde": None if self.b_tilde is None else [float(v) for v in self.b_tilde],
            "guard_violations": self.guard_violations,
            "monotone": self.monotone,
        }


class _Functional:
    """Shared machinery: nodal integrand partials and assembly."""

    grid: AngularGrid
    k: float
    Lambda: float
    target: float

    def __init__(self, grid: AngularGrid, k: float, Lambda: float, target: float):
        if grid.kind == "full":
            raise ValueError("selection runs on arc or zonal grids")
        self.grid = grid
        self.n = grid.n
        self.k = float(k)
        self.Lambda = float(Lambda)
        self.target = float(target)
        self.W = grid.measure
        self.D = grid.diff_matrix(even_at_pole=grid.kind == "zonal")
        self.X = grid.dirs
        self.T = grid.e_theta

    def graph(self, F) -> RadialGraph:
        return RadialGraph(ScalarField(self.grid, F, smooth_at_pole=self.grid.kind == "zonal"))

    # subclasses supply _smooth(F) -> (value, h_F, h_g, extras)

    def volume(self, F):
        return float(self.W @ (F**self.n / self.n)), self.W * F ** (self.n - 1)

    def smooth_part(self, F):
        """Value and gradient of everything except the volume penalty."""
        val, hF, hg = self._integrand(F)
        grad = self.W * hF + self.D.T @ (self.W * hg)
        bt, bt_grad = self._btilde(F)
        return val + float(bt @ bt), grad + 2.0 * bt_grad.T @ bt

    def value(self, F) -> float:
        s, _ = self.smooth_part(F)
        V, _ = self.volume(F)
        return s + self.Lambda * abs(V - self.target)

    def gradient(self, F) -> np.ndarray:
        """Gradient off the kink; on it the volume term contributes 0."""
        _, g = self.smooth_part(F)
        V, gV = self.volume(F)
        return g + self.Lambda * np.sign(V - self.target) * gV

    def _jac(self, F):
        n = self.n
        g = self.D @ F
        r = np.sqrt(F * F + g * g)
        J = F ** (n - 2) * r
        J_F = (n - 2) * F ** (n - 3) * r + F ** (n - 1) / r
        J_g = F ** (n - 2) * g / r
        return g, r, J, J_F, J_g

    def _btilde(self, F):
        return np.zeros(0), np.zeros((0, F.size))

    def guard_ok(self, F) -> bool:
        return True


class CapillaritySelection(_Functional):
    """``F_k`` for given ``params`` on a half-sphere grid."""

    def __init__(self, params: CapParams, grid: AngularGrid, k: float, Lambda: float | None = None):
        if not grid.is_half_space:
            raise ValueError("capillarity selection needs a half-sphere grid")
        if k < k_lambda(params.lam):
            raise ValueError(f"k must be >= k_lambda = {k_lambda(params.lam)}")
        Lambda = 4.0 * params.n if Lambda is None else Lambda
        if Lambda <= 2 * params.n:
            raise ValueError("Lambda must exceed 2n")
        super().__init__(grid, k, Lambda, bubble_volume(params.n, params.lam))
        self.params = params
        self.lam = params.lam
        self.e_n = np.zeros(self.X.shape[-1])
        self.e_n[-1] = 1.0

    def _pieces(self, F):
        n, lam, k = self.n, self.lam, self.k
        g, r, J, J_F, J_g = self._jac(F)
        X, T = self.X, self.T
        G = g[:, None] * T
        m = F[:, None] ** (n - 1) * X - F[:, None] ** (n - 2) * G
        y = F[:, None] * X + lam * self.e_n
        ny = np.linalg.norm(y, axis=-1)
        q = y / ny[:, None]
        mq = np.sum(m * q, axis=-1)
        return g, r, J, J_F, J_g, G, m, q, ny, mq

    def _integrand(self, F):
        n, lam, k = self.n, self.lam, self.k
        g, r, J, J_F, J_g, G, m, q, ny, mq = self._pieces(F)
        X, T = self.X, self.T
        h = (1.0 - 1.0 / k) * J - lam * m[:, -1] + mq / k
        m_F = (n - 1) * F[:, None] ** (n - 2) * X - (n - 2) * F[:, None] ** (n - 3) * G
        Xq = np.sum(X * q, axis=-1)
        q_F = (X - Xq[:, None] * q) / ny[:, None]
        mq_F = np.sum(m_F * q, axis=-1) + np.sum(m * q_F, axis=-1)
        Tq = np.sum(T * q, axis=-1)
        Tn = T[:, -1]
        Fn2 = F ** (n - 2)
        h_F = (1.0 - 1.0 / k) * J_F - lam * m_F[:, -1] + mq_F / k
        h_g = (1.0 - 1.0 / k) * J_g + lam * Fn2 * Tn - Fn2 * Tq / k
        return float(self.W @ h), h_F, h_g

    def _btilde(self, F):
        if self.grid.kind == "zonal":
            return np.zeros(0), np.zeros((0, F.size))
        n = self.n
        comps, grads = [], []
        for j in range(self.X.shape[-1] - 1):
            xj = self.X[:, j]
            comps.append(float(self.W @ _clip_moment(xj, 0.0, F, n)))
            grads.append(self.W * F ** (n - 1) * psi(F * xj))
        return np.array(comps), np.array(grads)

    def parts(self, F) -> dict:
        """Named terms of ``F_k``."""
        n, lam = self.n, self.lam
        g, r, J, J_F, J_g, G, m, q, ny, mq = self._pieces(F)
        P = float(self.W @ (J - lam * m[:, -1]))
        Pp = float(self.W @ J)
        mu = float(self.W @ (J - mq))
        bt, _ = self._btilde(F)
        V, _ = self.volume(F)
        return {"P_lambda": P, "P_plain": Pp, "mu0_sq": mu, "volume": V,
                "b_tilde": bt, "volume_gap": V - self.target}

    def guard_ok(self, F) -> bool:
        p = self.parts(F)
        return p["P_lambda"] - p["mu0_sq"] / self.k >= 0.5 * (1 - abs(self.lam)) * p["P_plain"] - 1e-8

    def reference(self) -> np.ndarray:
        return w_values(self.lam, self.grid.height)


class ConeSelection(_Functional):
    """``G_k`` on a cone with ``omega < pi/2`` (the half space uses ``F_k``)."""

    def __init__(self, spec: ConeSpec, grid: AngularGrid, k: float, Lambda: float | None = None):
        if spec.is_half_space:
            raise ValueError("use CapillaritySelection with lambda = 0 for the half space")
        if k <= 4:
            raise ValueError("k must exceed 4")
        Lambda = 4.0 * spec.n if Lambda is None else Lambda
        if Lambda <= 2 * spec.n:
            raise ValueError("Lambda must exceed 2n")
        super().__init__(grid, k, Lambda, float(grid.measure.sum()) / spec.n)
        self.spec = spec

    def _integrand(self, F):
        n, k = self.n, self.k
        g, r, J, J_F, J_g = self._jac(F)
        h = (1.0 - 1.0 / k) * J + F ** (n - 1) / k
        h_F = (1.0 - 1.0 / k) * J_F + (n - 1) * F ** (n - 2) / k
        h_g = (1.0 - 1.0 / k) * J_g
        return float(self.W @ h), h_F, h_g

    def parts(self, F) -> dict:
        g, r, J, J_F, J_g = self._jac(F)
        P = float(self.W @ J)
        mu = float(self.W @ (J - F ** (self.n - 1)))
        V, _ = self.volume(F)
        return {"P_C": P, "mu0_sq": mu, "volume": V, "b_tilde": np.zeros(0),
                "volume_gap": V - self.target}

    def guard_ok(self, F) -> bool:
        p = self.parts(F)
        return p["P_C"] - p["mu0_sq"] / self.k >= 0.5 * p["P_C"] - 1e-8

    def reference(self) -> np.ndarray:
        return np.ones(self.grid.shape)


def _functional(target, config: SelectionConfig, grid: AngularGrid | None = None,
                resolution: int = 128):
    if isinstance(target, _Functional):
        return target
    if isinstance(target, CapParams):
        grid = grid or make_grid(target.n, None, resolution)
        return CapillaritySelection(target, grid, config.k, config.Lambda)
    if isinstance(target, ConeSpec):
        if target.is_half_space:
            grid = grid or cone_grid(target, resolution)
            return CapillaritySelection(target.params, grid, config.k, config.Lambda)
        grid = grid or cone_grid(target, resolution)
        return ConeSelection(target, grid, config.k, config.Lambda)
    raise TypeError("target must be CapParams or ConeSpec")


def F_k(f: RadialGraph, params: CapParams, config: SelectionConfig) -> float:
    return CapillaritySelection(params, f.grid, config.k, config.Lambda).value(f.values)


def G_k(f: RadialGraph, spec: ConeSpec, config: SelectionConfig) -> float:
    fn = _functional(spec, config, grid=f.grid)
    return fn.value(f.values)


def _fd_gradient(fn: _Functional, F, h: float) -> np.ndarray:
    out = np.zeros_like(F)
    for i in range(F.size):
        e = np.zeros_like(F)
        e[i] = h * max(1.0, abs(F[i]))
        out[i] = (fn.value(F + e) - fn.value(F - e)) / (2.0 * e[i])
    return out


def gradient(functional, f: RadialGraph, config: SelectionConfig) -> ScalarField:
    """Gradient of the discretized functional with respect to nodal values."""
    fn = _functional(functional, config, grid=f.grid)
    F = f.values
    if config.gradient_mode == "finite-difference":
        return ScalarField(f.grid, _fd_gradient(fn, F, config.fd_step))
    return ScalarField(f.grid, fn.gradient(F))


def check_gradient(functional, f: RadialGraph, config: SelectionConfig, probes: int = 20,
                   seed: int = 0, eps: float = 1e-6) -> float:
    """Largest relative error of the analytic directional derivative against
    central differences over random directions."""
    fn = _functional(functional, config, grid=f.grid)
    rng = np.random.default_rng(seed)
    F = f.values
    g = fn.gradient(F)
    worst = 0.0
    ang = fn.grid.theta * (pi / 2.0) / fn.grid.opening
    for _ in range(probes):
        # smooth random direction: low Fourier modes with random phases
        c = rng.normal(size=6)
        ph = rng.uniform(0, 2 * pi, size=6)
        v = sum(c[j] * np.cos((j + 1) * ang + (ph[j] if fn.grid.kind == "arc" else 0.0))
                for j in range(6))
        a = float(g @ v)
        b = (fn.value(F + eps * v) - fn.value(F - eps * v)) / (2.0 * eps)
        worst = max(worst, abs(a - b) / max(abs(a), abs(b), 1e-300))
    return worst


# ---------------------------------------------------------------------------
# descent


def _metric(fn: _Functional) -> np.ndarray:
    W = np.maximum(fn.W, 1e-3 * fn.W.max() / fn.W.size)
    return np.diag(W) + fn.D.T @ (W[:, None] * fn.D)


def _rescale(fn: _Functional, F):
    V, _ = fn.volume(F)
    return F * (fn.target / V) ** (1.0 / fn.n)


def _direction(fn: _Functional, F, Ainv_solve, band: float):
    """Descent direction from the minimal-norm subgradient."""
    s_val, gS = fn.smooth_part(F)
    V, gV = fn.volume(F)
    gap = V - fn.target
    L = fn.Lambda
    if abs(gap) <= band * fn.target:
        pS, pV = Ainv_solve(gS), Ainv_solve(gV)
        c = float(gS @ pV) / float(gV @ pV)
        c = min(max(c, -L), L)
        g = gS - c * gV
        p = pS - c * pV
    else:
        g = gS + L * np.sign(gap) * gV
        p = Ainv_solve(g)
    return g, p


def _run(fn: _Functional, F0: np.ndarray, config: SelectionConfig) -> SelectionTrace:
    from scipy.linalg import cho_factor, cho_solve

    cf = cho_factor(_metric(fn))

    def solve(b):
        return cho_solve(cf, b)

    trace = SelectionTrace()
    F = F0.copy()
    val = fn.value(F)
    if not np.isfinite(val):
        raise ValueError("initial graph gives a non-finite value")
    trace.values.append(val)
    if not fn.guard_ok(F):
        trace.guard_violations += 1
    alpha = 1.0
    use_fd = config.gradient_mode == "finite-difference"
    for it in range(config.max_iters):
        g, p = _direction(fn, F, solve, config.band)
        if use_fd:
            g = _fd_gradient(fn, F, config.fd_step)
            p = solve(g)
        gnorm = float(np.sqrt(max(g @ p, 0.0)))
        trace.grad_norms.append(gnorm)
        if gnorm <= config.tol * (1.0 + abs(val)):
            trace.converged = True
            trace.message = "gradient tolerance reached"
            break
        slope = float(g @ p)
        a = min(1.0, 2.0 * alpha)
        accepted = False
        for _ in range(60):
            Fn = F - a * p
            if np.all(Fn > 0):
                cands = [Fn, _rescale(fn, Fn)]
                vals = [fn.value(c) for c in cands]
                j = int(np.argmin(vals))
                if vals[j] < val and vals[j] <= val - config.armijo * a * slope:
                    F, val = cands[j], vals[j]
                    accepted = True
                    break
            a *= config.shrink
        if not accepted:
            if slope <= 1e-12 * (1.0 + abs(val)):
                # predicted decrease below the rounding of the value
                trace.converged = True
                trace.message = "stationary to rounding"
            else:
                trace.message = "line search failed"
            break
        alpha = a
        trace.values.append(val)
        if not fn.guard_ok(F):
            trace.guard_violations += 1
    else:
        trace.message = "iteration limit reached"
    g, p = _direction(fn, F, solve, config.band)
    trace.final_grad_norm = float(np.sqrt(max(g @ p, 0.0)))
    trace.final = fn.graph(F)
    ref = fn.reference()
    trace.symdiff = float(fn.W @ (np.abs(F**fn.n - ref**fn.n) / fn.n))
    parts = fn.parts(F)
    trace.volume_gap = abs(parts["volume_gap"])
    trace.b_tilde = parts["b_tilde"]
    return trace


def standard_inits(fn: _Functional, count: int = 3) -> list:
    """Deformed references ``w (1 + 0.1 cos 2 theta')`` and two companions."""
    ref = fn.reference()
    grid = fn.grid
    ang = grid.theta * (pi / 2.0) / grid.opening
    if grid.kind == "arc":
        # arc variable runs over [0, pi]: even and odd modes about the axis
        modes = [np.cos(2 * ang), -np.cos(2 * ang), np.cos(ang)]
    else:
        modes = [np.cos(2 * ang), -np.cos(2 * ang), np.cos(4 * ang)]
    return [ref * (1.0 + 0.1 * m) for m in modes[:count]]


def minimize(functional, config: SelectionConfig, grid: AngularGrid | None = None,
             resolution: int = 128):
    """Minimize ``F_k`` (``CapParams``) or ``G_k`` (``ConeSpec``).

    Runs from ``config.init`` when given, otherwise from the standard
    multistart set, and returns ``(graph, trace)`` of the best run.
    """
    if config.init is not None:
        grid = config.init.grid
    fn = _functional(functional, config, grid=grid, resolution=resolution)
    inits = [config.init.values] if config.init is not None else standard_inits(fn, config.multistart)
    best = None
    for F0 in inits:
        if np.any(F0 <= 0):
            raise ValueError("initial graph must be positive")
        tr = _run(fn, np.asarray(F0, dtype=float), config)
        if best is None or tr.values[-1] < best.values[-1]:
            best = tr
    return best.final, best


@dataclass
class SweepResult:
    fit: FitResult
    k_list: list
    traces: list
    floor: float

    def as_dict(self) -> dict:
        return {
            "fit": self.fit.as_dict(),
            "floor": self.floor,
            "per_k": [{"k": k, **t.as_dict()} for k, t in zip(self.k_list, self.traces)],
        }


def selection_sweep(k_list, target, config: SelectionConfig, grid: AngularGrid | None = None,
                    resolution: int = 128, floor: float = 1e-6) -> SweepResult:
    """Minimize for each ``k`` and fit ``log |F_k Delta B|`` against ``log k``.

    ``floor`` is relative to the reference volume; values below it count as
    collapse onto the reference set.
    """
    k_list = list(k_list)
    if len(k_list) < 5:
        raise ValueError("at least 5 values of k are required")
    traces = []
    fn0 = None
    for k in k_list:
        cfg = replace(config, k=k)
        fn = _functional(target, cfg, grid=grid, resolution=resolution)
        fn0 = fn0 or fn
        _, tr = minimize(fn, cfg)
        traces.append(tr)
    abs_floor = floor * fn0.target
    fit = _fit_with_floor([(k, t.symdiff) for k, t in zip(k_list, traces)], abs_floor)
    return SweepResult(fit, k_list, traces, abs_floor)
