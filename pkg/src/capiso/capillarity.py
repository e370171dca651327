"""Capillarity functionals of radial graphs over the upper half sphere."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, pi

import numpy as np
from scipy import integrate, optimize

from .geometry import (
    AngularGrid,
    CapParams,
    RadialGraph,
    ScalarField,
    bubble_volume,
    grad_vector,
    graph_volume,
    integrate_surface,
    sphere_area,
)

__all__ = [
    "DomainError",
    "TranslationCandidate",
    "CapReport",
    "SurfaceData",
    "surface_data",
    "perimeter_lambda",
    "perimeter_plain",
    "wetted_area",
    "wetted_area_flux",
    "mu0_sq",
    "mu0_sq_divergence",
    "inverse_distance_bulk",
    "bubble_radial",
    "sym_diff_bubble",
    "fraenkel_alpha",
    "mu_sq",
    "deficit",
    "barycenters",
    "btilde",
    "btilde_center",
    "psi",
    "cap_report",
    "DEFAULT_AZIMUTH",
]

#: azimuthal nodes used when a zonal n = 3 field meets a translated centre
DEFAULT_AZIMUTH = 64
PSI_CLAMP = 100.0


class DomainError(ValueError):
    """A translated bubble does not contain the origin."""


@dataclass(frozen=True)
class TranslationCandidate:
    """A point ``x'`` of the boundary hyperplane and the objective value there.

    ``magnitude`` and the unit ``direction`` (length ``n - 1``) describe the
    offset; for axisymmetric inputs the direction is the one searched along.
    """

    magnitude: float
    direction: tuple
    value: float

    @property
    def offset(self) -> np.ndarray:
        return self.magnitude * np.asarray(self.direction, dtype=float)


@dataclass
class CapReport:
    volume: float
    perimeter_lambda: float
    perimeter_plain: float
    wetted_area: float
    mu0_sq: float
    mu_sq: float | None
    mu_argmin: TranslationCandidate | None
    r_E: float
    alpha: float | None
    alpha_argmin: TranslationCandidate | None
    deficit: float
    barycenter_H: np.ndarray
    b_tilde: np.ndarray
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        def cand(c):
            if c is None:
                return None
            return {"magnitude": c.magnitude, "direction": list(c.direction), "value": c.value}

        return {
            "volume": self.volume,
            "perimeter_lambda": self.perimeter_lambda,
            "perimeter_plain": self.perimeter_plain,
            "wetted_area": self.wetted_area,
            "mu0_sq": self.mu0_sq,
            "mu_sq": self.mu_sq,
            "mu_argmin": cand(self.mu_argmin),
            "r_E": self.r_E,
            "alpha": self.alpha,
            "alpha_argmin": cand(self.alpha_argmin),
            "deficit": self.deficit,
            "barycenter_H": [float(v) for v in self.barycenter_H],
            "b_tilde": [float(v) for v in self.b_tilde],
            **self.extras,
        }


# ---------------------------------------------------------------------------
# surface quantities


@dataclass(frozen=True, eq=False)
class SurfaceData:
    """Per-node surface quantities of a graph.

    ``P`` are surface points, ``nu`` unit normals, ``J`` the area element and
    ``m = J nu``.  Vectors are in grid coordinates.
    """

    grid: AngularGrid
    F: np.ndarray
    G: np.ndarray
    P: np.ndarray
    nu: np.ndarray
    J: np.ndarray
    m: np.ndarray


def surface_data(f: RadialGraph) -> SurfaceData:
    grid = f.grid
    n = grid.n
    F = f.values
    G = grad_vector(grid, f)
    r = np.sqrt(F * F + np.sum(G * G, axis=-1))
    P = F[..., None] * grid.dirs
    m = F[..., None] ** (n - 2) * (P - G)
    J = F ** (n - 2) * r
    nu = m / J[..., None]
    return SurfaceData(grid, F, G, P, nu, J, m)


def _params_match(f: RadialGraph, params: CapParams, half_space: bool = True):
    if f.grid.n != params.n:
        raise ValueError("graph dimension does not match params")
    if half_space and not f.grid.is_half_space:
        raise ValueError("capillarity functionals need a half-sphere grid")


def _sd(f) -> SurfaceData:
    return f if isinstance(f, SurfaceData) else surface_data(f)


def perimeter_lambda(f: RadialGraph, params: CapParams) -> float:
    """``P_lam = int (1 - lam <e_n, nu>) dA`` over the free boundary."""
    _params_match(f, params)
    sd = surface_data(f)
    return integrate_surface(f.grid, sd.J - params.lam * sd.m[..., -1])


def perimeter_plain(f: RadialGraph) -> float:
    """Unweighted area of the free boundary."""
    return integrate_surface(f.grid, surface_data(f).J)


def wetted_area(f: RadialGraph, params: CapParams) -> float:
    """Measure of the contact region on the hyperplane (direct formula)."""
    _params_match(f, params)
    grid = f.grid
    F = f.values
    if grid.kind == "arc":
        return float(F[0] + F[-1])
    if grid.kind == "zonal":
        n = grid.n
        return float(sphere_area(n - 2) / (n - 1) * F[-1] ** (n - 1))
    # polar-coordinates area of the equatorial trace, trapezoid in phi
    return float(np.mean(F[-1] ** 2) * pi)


def wetted_area_flux(f: RadialGraph, params: CapParams) -> float:
    """``int <e_n, nu> dA``, equal to the wetted area by the divergence theorem."""
    _params_match(f, params)
    return integrate_surface(f.grid, surface_data(f).m[..., -1])


def mu0_sq(f: RadialGraph, params: CapParams) -> float:
    """``1/2 int |nu - (x + lam e_n)/|x + lam e_n||^2`` over the free boundary."""
    _params_match(f, params)
    sd = surface_data(f)
    return _mu_center(sd, _lam_vec(sd.grid, params.lam))


def _lam_vec(grid: AngularGrid, lam: float) -> np.ndarray:
    c = np.zeros(grid.dirs.shape[-1])
    c[-1] = -lam
    return c


def _mu_center(sd: SurfaceData, center: np.ndarray) -> float:
    q = sd.P - center
    r = np.linalg.norm(q, axis=-1)[..., None]
    # a center on the surface itself is a null set with bounded integrand
    q = np.where(r > 0, q / np.where(r > 0, r, 1.0), sd.nu)
    d = sd.nu - q
    return 0.5 * integrate_surface(sd.grid, np.sum(d * d, axis=-1) * sd.J)


def mu0_sq_divergence(f: RadialGraph, params: CapParams) -> float:
    """Surface-minus-bulk form of ``mu^2_{lam,0}``."""
    _params_match(f, params)
    sd = surface_data(f)
    lam = params.lam
    if lam == 0.0:
        surf = integrate_surface(f.grid, sd.J)
    else:
        z = f.grid.height
        ph = sd.F * np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        surf = integrate_surface(f.grid, sd.J - lam * sd.m[..., -1] / np.sqrt(ph * ph + lam * lam))
    return surf - inverse_distance_bulk(f, lam)


# ---------------------------------------------------------------------------
# bulk integral of (n - 1)/|y + lam e_n|


def _binomial_parts(n: int, a, d, t):
    """Polynomial factor and asinh coefficient of the radial antiderivative.

    ``int (t + a)^{n-1} / sqrt(t^2 + d^2) dt = poly(t) sqrt(t^2 + d^2) + C asinh(t/d)``.
    """
    d2 = d * d
    A = [np.zeros_like(t), np.ones_like(t)]
    c = [np.ones_like(d), np.zeros_like(d)]
    for k in range(2, n):
        A.append(t ** (k - 1) / k - (k - 1) * d2 / k * A[k - 2])
        c.append(-(k - 1) * d2 / k * c[k - 2])
    poly = np.zeros_like(t)
    C = np.zeros_like(d)
    for k in range(n):
        b = comb(n - 1, k) * a ** (n - 1 - k)
        poly = poly + b * A[k]
        C = C + b * c[k]
    return poly, C


def _asinh_coefficient(n: int, a, d):
    return _binomial_parts(n, a, d, np.zeros_like(a))[1]


def _log_plus(x, d):
    """``log(x + sqrt(x^2 + d^2))`` for ``x >= 0``, with ``0`` at ``x = d = 0``."""
    s = x + np.sqrt(x * x + d * d)
    with np.errstate(divide="ignore"):
        return np.where(s > 0, np.log(np.where(s > 0, s, 1.0)), 0.0)


def _radial_bulk(n: int, lam: float, F, z, drop_log: bool):
    """``(n-1) int_0^F r^{n-1}/|r x + lam e_n| dr`` per direction.

    With ``drop_log`` the singular part ``-2 C log d`` is removed everywhere;
    the caller adds its exact integral back.
    """
    a = -lam * z
    d = abs(lam) * np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    t1, t2 = -a, F - a
    total = np.zeros_like(F)
    C = None
    sg = []
    for t, sign in ((t2, 1.0), (t1, -1.0)):
        poly, C = _binomial_parts(n, a, d, t)
        s = np.sign(t)
        sg.append(s)
        total = total + sign * (poly * np.sqrt(t * t + d * d) + C * s * _log_plus(np.abs(t), d))
    kappa = -C * (sg[0] - sg[1])
    coef = kappa + 2.0 * C if drop_log else kappa
    with np.errstate(divide="ignore", invalid="ignore"):
        logd = np.where(coef != 0.0, coef * np.log(np.where(d > 0, d, 1.0)), 0.0)
    if np.any((d == 0) & (coef != 0)):
        raise FloatingPointError("unresolved logarithmic singularity")
    return (n - 1) * (total + logd)


@lru_cache(maxsize=256)
def _singular_integral(n: int, lam: float, kind: str, theta_end: float) -> float:
    """Exact surface integral of ``-2 C(theta) log d(theta)``.

    ``d`` vanishes linearly at the pole; the logarithm of the distance to the
    pole is handed to QUADPACK as an algebraic-logarithmic weight.
    """
    t0 = (pi - theta_end) / 2.0

    def parts(theta):
        # returns (coefficient of log|theta - pole|, smooth remainder)
        if kind == "arc":
            ang = theta + t0
            z = np.sin(ang)
            dist = abs(pi / 2.0 - ang)
            weight = 1.0
        else:
            z = np.cos(theta)
            dist = theta
            weight = sphere_area(n - 2) * np.sin(theta) ** (n - 2)
        a = -lam * z
        d = abs(lam) * np.sqrt(max(1.0 - z * z, 0.0))
        C = float(_asinh_coefficient(n, np.array(a), np.array(d)))
        ratio = np.sinc(dist / pi)  # sin(dist)/dist, equal to d / (|lam| dist)
        return -2.0 * C * weight, -2.0 * C * weight * np.log(abs(lam) * ratio)

    opts = dict(epsabs=1e-15, epsrel=1e-13, limit=400)
    smooth = integrate.quad(lambda t: parts(t)[1], 0.0, theta_end, **opts)[0]
    if kind == "arc":
        mid = pi / 2.0 - t0
        left = integrate.quad(lambda t: parts(t)[0], 0.0, mid, weight="alg-logb",
                              wvar=(0.0, 0.0), **opts)[0]
        right = integrate.quad(lambda t: parts(t)[0], mid, theta_end, weight="alg-loga",
                               wvar=(0.0, 0.0), **opts)[0]
        return smooth + left + right
    sing = integrate.quad(lambda t: parts(t)[0], 0.0, theta_end, weight="alg-loga",
                          wvar=(0.0, 0.0), **opts)[0]
    return smooth + sing


def inverse_distance_bulk(f: RadialGraph, lam: float) -> float:
    """``int_E (n - 1)/|y + lam e_n| dy`` for the set below the graph."""
    grid = f.grid
    n = grid.n
    F = f.values
    if lam == 0.0:
        return integrate_surface(grid, F ** (n - 1))
    z = grid.height
    pole = grid.theta_end / 2.0 if grid.kind == "arc" else 0.0
    i_pole = int(np.argmin(np.abs(grid.theta - pole)))
    F_pole = F[i_pole] if grid.kind != "full" else np.min(F[i_pole])
    singular = lam < 0.0 and F_pole > abs(lam)
    vals = _radial_bulk(n, lam, F, z, singular)
    out = integrate_surface(grid, vals)
    if singular:
        out += (n - 1) * _singular_integral(n, lam, grid.kind, grid.theta_end)
    return out


# ---------------------------------------------------------------------------
# translated bubbles


def _hvec(grid: AngularGrid, x_prime) -> np.ndarray:
    """Horizontal offset as a vector in grid coordinates (vertical part 0)."""
    xp = np.atleast_1d(np.asarray(x_prime, dtype=float))
    d = grid.dirs.shape[-1]
    out = np.zeros(d)
    if grid.kind == "zonal":
        if np.any(xp != 0):
            raise ValueError("zonal grids only represent x' = 0; expand to a full grid")
        return out
    if xp.size != d - 1:
        raise ValueError(f"offset must have {d - 1} components")
    out[:-1] = xp
    return out


def _bubble_on_dirs(lam: float, c_h: np.ndarray, s: float, dirs: np.ndarray) -> np.ndarray:
    c = c_h.copy()
    c[-1] -= s * lam
    cc = float(c @ c)
    if cc >= s * s:
        raise DomainError("origin is not inside the translated bubble")
    xc = dirs @ c
    return xc + np.sqrt(xc * xc + s * s - cc)


def bubble_radial(params: CapParams, x_prime, s: float, x) -> np.ndarray:
    """Radial function of ``s B^lam + x'`` in the unit direction(s) ``x`` (in R^n)."""
    x = np.asarray(x, dtype=float)
    c = np.zeros(params.n)
    c[: params.n - 1] = np.atleast_1d(np.asarray(x_prime, dtype=float))
    return _bubble_on_dirs(params.lam, c, float(s), x)


def _full_setup(f: RadialGraph, azimuth: int):
    """Return (grid, values, smooth flag) on a grid supporting any offset."""
    grid = f.grid
    if grid.kind == "zonal":
        if grid.n != 3:
            raise ValueError("translation-dependent functionals need n in {2, 3}")
        g3 = grid.with_azimuth(azimuth)
        return RadialGraph(ScalarField(g3, grid.expand(f.values, azimuth)))
    return f


def sym_diff_bubble(f: RadialGraph, params: CapParams, x_prime, s: float,
                    azimuth: int = DEFAULT_AZIMUTH) -> float:
    """``|E Delta (s B^lam + x')|`` as ``int |f^n - g^n|/n``."""
    _params_match(f, params)
    if s <= 0:
        raise ValueError("scale must be positive")
    xp = np.atleast_1d(np.asarray(x_prime, dtype=float))
    if f.grid.kind == "zonal" and np.all(xp == 0):
        g = _bubble_on_dirs(params.lam, np.zeros(2), s, f.grid.dirs)
        n = params.n
        return integrate_surface(f.grid, np.abs(f.values**n - g**n) / n)
    if f.grid.kind == "zonal" and params.n == 3:
        xp = np.array([np.linalg.norm(xp), 0.0])
    ff = _full_setup(f, azimuth)
    g = _bubble_on_dirs(params.lam, _hvec(ff.grid, xp), s, ff.grid.dirs)
    n = params.n
    return integrate_surface(ff.grid, np.abs(ff.values**n - g**n) / n)


def _search(obj, kind: str, R: float, coarse: int = 41, tol: float = 1e-9):
    """Minimize ``obj`` over offsets.

    ``kind`` is ``"line"`` (x' in [-R, R]), ``"radial"`` (|x'| in [0, R]
    along ``e_1``) or ``"plane"`` (the disk of radius R).
    """
    if kind in ("line", "radial"):
        lo = -R if kind == "line" else 0.0
        xs = np.linspace(lo, R, coarse)
        vals = np.array([obj(np.array([x])) for x in xs])
        i = int(np.argmin(vals))
        a, b = xs[max(i - 1, 0)], xs[min(i + 1, coarse - 1)]
        res = optimize.minimize_scalar(lambda x: obj(np.array([x])), bounds=(a, b),
                                       method="bounded", options={"xatol": tol})
        cands = [(vals[i], xs[i]), (float(res.fun), float(res.x)), (obj(np.array([0.0])), 0.0)]
        v, x = min(cands, key=lambda p: p[0])
        return float(v), np.array([x])
    # plane: polar coarse scan, then Nelder-Mead
    best = (obj(np.zeros(2)), np.zeros(2))
    for r in np.linspace(R / 8, R, 8):
        for ang in np.linspace(0, 2 * pi, 16, endpoint=False):
            p = r * np.array([np.cos(ang), np.sin(ang)])
            v = obj(p)
            if v < best[0]:
                best = (v, p)
    res = optimize.minimize(obj, best[1], method="Nelder-Mead",
                            options={"xatol": tol, "fatol": 1e-15, "maxiter": 2000})
    if res.fun < best[0]:
        best = (float(res.fun), np.asarray(res.x))
    return float(best[0]), best[1]


def _candidate(value: float, xp: np.ndarray, dim: int) -> TranslationCandidate:
    mag = float(np.linalg.norm(xp))
    if mag == 0.0:
        direction = tuple([1.0] + [0.0] * (dim - 1))
    else:
        direction = tuple(float(v) for v in xp / mag)
    return TranslationCandidate(mag, direction, float(value))


def _search_kind(f: RadialGraph) -> str:
    if f.grid.n == 2:
        return "line"
    if f.grid.n != 3:
        raise ValueError("translation search requires n in {2, 3}")
    return "radial" if f.grid.kind == "zonal" else "plane"


def fraenkel_alpha(f: RadialGraph, params: CapParams, azimuth: int = DEFAULT_AZIMUTH):
    """Fraenkel asymmetry and its optimal offset."""
    _params_match(f, params)
    kind = _search_kind(f)
    n = params.n
    V = graph_volume(f)
    s = (V / bubble_volume(n, params.lam)) ** (1.0 / n)
    ff = _full_setup(f, azimuth) if kind == "radial" else f
    R = min(2.0 * (1.0 + float(np.max(f.values))), s * np.sqrt(1.0 - params.lam**2) * (1 - 1e-12))

    def obj(xp):
        hv = _hvec(ff.grid, xp if kind != "radial" else np.array([xp[0], 0.0]))
        try:
            g = _bubble_on_dirs(params.lam, hv, s, ff.grid.dirs)
        except DomainError:
            return np.inf
        return integrate_surface(ff.grid, np.abs(ff.values**n - g**n) / n) / V

    val, xp = _search(obj, kind, R)
    return val, _candidate(val, xp, n - 1)


def mu_sq(f: RadialGraph, params: CapParams, azimuth: int = DEFAULT_AZIMUTH):
    """Oscillation asymmetry of the volume-rescaled set and its optimal offset.

    Returns ``(mu_sq, candidate, r_E)``.
    """
    _params_match(f, params)
    kind = _search_kind(f)
    n = params.n
    r_E = (graph_volume(f) / bubble_volume(n, params.lam)) ** (1.0 / n)
    fh = f.scaled(1.0 / r_E)
    ff = _full_setup(fh, azimuth) if kind == "radial" else fh
    sd = surface_data(ff)
    R = 2.0 * (1.0 + float(np.max(fh.values)))
    base = _lam_vec(ff.grid, params.lam)

    def obj(xp):
        hv = _hvec(ff.grid, xp if kind != "radial" else np.array([xp[0], 0.0]))
        return _mu_center(sd, base + hv)

    val, xp = _search(obj, kind, R)
    return val, _candidate(val, xp, n - 1), r_E


def deficit(f: RadialGraph, params: CapParams) -> float:
    """Relative excess of ``P_lam`` over the bubble of the same volume."""
    n = params.n
    V = graph_volume(f)
    B = bubble_volume(n, params.lam)
    return perimeter_lambda(f, params) / (n * B ** (1.0 / n) * V ** ((n - 1.0) / n)) - 1.0


# ---------------------------------------------------------------------------
# barycentres


def psi(t):
    """Clamp to ``[-100, 100]``."""
    return np.clip(t, -PSI_CLAMP, PSI_CLAMP)


def _pos_part_moment(beta, gamma_, F, n):
    """``int_0^F r^{n-1} (beta r + gamma)_+ dr`` elementwise."""
    beta, gamma_, F = np.broadcast_arrays(np.asarray(beta, float), np.asarray(gamma_, float),
                                          np.asarray(F, float))
    with np.errstate(divide="ignore", invalid="ignore"):
        root = np.where(beta != 0, -gamma_ / np.where(beta != 0, beta, 1.0), np.inf)
    lo = np.zeros_like(F)
    hi = F.copy()
    up = beta > 0
    down = beta < 0
    lo = np.where(up, np.clip(root, 0.0, F), lo)
    hi = np.where(down, np.clip(root, 0.0, F), hi)
    flat = beta == 0
    hi = np.where(flat & (gamma_ <= 0), lo, hi)
    return beta * (hi ** (n + 1) - lo ** (n + 1)) / (n + 1) + gamma_ * (hi**n - lo**n) / n


def _clip_moment(alpha, shift, F, n, M=PSI_CLAMP):
    """``int_0^F r^{n-1} psi(alpha r - shift) dr`` in closed form."""
    lin = alpha * F ** (n + 1) / (n + 1) - shift * F**n / n
    if np.max(np.abs(alpha) * F) + abs(float(np.max(np.abs(shift)))) <= M:
        return lin
    over = _pos_part_moment(alpha, -shift - M, F, n)
    under = _pos_part_moment(-alpha, shift - M, F, n)
    return lin - over + under


def btilde(f: RadialGraph, shift=None) -> np.ndarray:
    """``int_{E - shift} psi(y')`` componentwise, ``shift`` in the hyperplane."""
    grid = f.grid
    n = grid.n
    if grid.kind == "zonal" and (shift is None or not np.any(shift)):
        return np.zeros(n - 1)
    sh = np.zeros(grid.dirs.shape[-1] - 1) if shift is None else np.atleast_1d(shift)
    out = []
    for j in range(grid.dirs.shape[-1] - 1):
        vals = _clip_moment(grid.dirs[..., j], sh[j], f.values, n)
        out.append(integrate_surface(grid, vals))
    return np.array(out)


def barycenters(f: RadialGraph, params: CapParams) -> tuple[np.ndarray, np.ndarray]:
    """Horizontal barycentre and the clamped barycentre ``b~``."""
    grid = f.grid
    n = params.n
    if grid.kind == "zonal":
        return np.zeros(n - 1), np.zeros(n - 1)
    V = graph_volume(f)
    m = [integrate_surface(grid, f.values ** (n + 1) / (n + 1) * grid.dirs[..., j])
         for j in range(n - 1)]
    return np.array(m) / V, btilde(f)


def btilde_center(f: RadialGraph, params: CapParams, tol: float = 1e-10,
                  max_rounds: int = 20):
    """A point ``x*`` of the hyperplane with ``b~(E - x*) = 0``, or ``None``."""
    n = params.n
    if n not in (2, 3):
        raise ValueError("btilde_center requires n in {2, 3}")
    if f.grid.kind == "zonal":
        return np.zeros(n - 1)
    x = np.zeros(n - 1)
    for _ in range(max_rounds):
        b = btilde(f, x)
        nb = np.linalg.norm(b)
        if nb <= 1e-14:
            return x
        e = b / nb

        def g(t):
            return float(btilde(f, x + t * e) @ e)

        hi = max(1e-3, 2.0 * float(np.max(f.values)))
        k = 0
        while g(hi) > 0:
            hi *= 2.0
            k += 1
            if k > 60:
                return None
        t = optimize.bisect(g, 0.0, hi, xtol=tol * 0.1, maxiter=500)
        step = t * e
        x = x + step
        if np.linalg.norm(step) <= tol:
            return x
    return x


def cap_report(f: RadialGraph, params: CapParams, azimuth: int = DEFAULT_AZIMUTH) -> CapReport:
    _params_match(f, params)
    sd = surface_data(f)
    lam = params.lam
    V = graph_volume(f)
    P = integrate_surface(f.grid, sd.J - lam * sd.m[..., -1])
    Pp = integrate_surface(f.grid, sd.J)
    translations = params.n in (2, 3)
    mu = mu_arg = alpha = alpha_arg = None
    r_E = (V / bubble_volume(params.n, lam)) ** (1.0 / params.n)
    if translations:
        mu, mu_arg, r_E = mu_sq(f, params, azimuth)
        alpha, alpha_arg = fraenkel_alpha(f, params, azimuth)
    bar, bt = barycenters(f, params)
    return CapReport(
        volume=V,
        perimeter_lambda=P,
        perimeter_plain=Pp,
        wetted_area=wetted_area(f, params),
        mu0_sq=mu0_sq(f, params),
        mu_sq=mu,
        mu_argmin=mu_arg,
        r_E=r_E,
        alpha=alpha,
        alpha_argmin=alpha_arg,
        deficit=deficit(f, params),
        barycenter_H=bar,
        b_tilde=bt,
        extras={"wetted_area_flux": integrate_surface(f.grid, sd.m[..., -1]),
                "mu0_sq_divergence": mu0_sq_divergence(f, params)},
    )
