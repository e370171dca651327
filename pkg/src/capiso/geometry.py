"""Spherical-cap grids, quadrature, radial graphs and tangential calculus.

Three grid layouts share one interface:

``arc``
    ``n = 2``.  The node variable is the arc length ``t`` along a symmetric
    arc of the unit circle; ``theta_end = pi`` is the upper half circle.
``zonal``
    ``n >= 3``, axisymmetric fields.  ``theta`` is the polar angle from
    ``e_n`` and vectors are stored in meridian coordinates ``(rho, z)``.
``full``
    ``n = 3`` with an azimuthal layer, vectors in ``R^3``.

In every layout the vertical component of a vector is the last one, so
formulas written with ``vec[..., -1]`` for ``<., e_n>`` work unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from math import factorial, gamma, pi

import numpy as np
from scipy import special
from scipy.special import bernoulli

__all__ = [
    "CapParams",
    "AngularGrid",
    "ScalarField",
    "RadialGraph",
    "SurfacePoint",
    "make_grid",
    "sphere_area",
    "w_profile",
    "w_values",
    "integrate_surface",
    "tangential_gradient",
    "grad_vector",
    "sobolev_norms",
    "graph_volume",
    "area_element",
    "unit_normal",
    "surface_point",
    "graph_distance",
    "bubble_volume",
    "gregory_weights",
]


def sphere_area(k: int) -> float:
    """Area of the unit sphere ``S^k`` in ``R^{k+1}``."""
    return 2.0 * pi ** ((k + 1) / 2.0) / gamma((k + 1) / 2.0)


@dataclass(frozen=True)
class CapParams:
    """Ambient dimension ``n >= 2`` and capillarity parameter ``|lam| < 1``."""

    n: int
    lam: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.n!r}")
        if not (-1.0 < float(self.lam) < 1.0):
            raise ValueError(f"lambda must lie in (-1, 1), got {self.lam!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "lam", float(self.lam))


# ---------------------------------------------------------------------------
# quadrature and differentiation in the polar variable


@lru_cache(maxsize=16)
def _gregory_correction(q: int) -> np.ndarray:
    """Left-end corrections (unit spacing) of the Gregory rule of degree ``q``.

    Euler-Maclaurin endpoint terms with the odd derivatives replaced by
    one-sided differences on ``q + 1`` nodes; independent of the grid length.
    """
    B = bernoulli(q + 2)
    x = np.arange(q + 1.0)
    V = np.array([x**k / factorial(k) for k in range(q + 1)])
    c = np.zeros(q + 1)
    for k in range(1, q // 2 + 2):
        j = 2 * k - 1
        if j > q:
            break
        e = np.zeros(q + 1)
        e[j] = 1.0
        c += B[2 * k] / factorial(2 * k) * np.linalg.solve(V, e)
    return c


def gregory_weights(count: int, length: float) -> np.ndarray:
    """Weights of the end-corrected trapezoid rule on ``count`` intervals.

    Eight nodes are corrected at each end (fewer on very coarse grids), which
    integrates polynomials of degree 7 exactly with positive weights.
    """
    if count < 8:
        raise ValueError("at least 8 intervals are required")
    q = min(7, count // 2 - 1)
    h = length / count
    w = np.full(count + 1, h)
    w[0] = w[-1] = 0.5 * h
    c = _gregory_correction(q)
    w[: q + 1] += h * c
    w[count - q :][::-1] += h * c
    return w


DEFAULT_FD_ORDER = 6


@lru_cache(maxsize=64)
def _fd_stencil(offsets: tuple) -> np.ndarray:
    """First-derivative weights on integer ``offsets`` (unit spacing), exact rationals."""
    k = len(offsets)
    A = [[Fraction(o) ** j for o in offsets] for j in range(k)]
    b = [Fraction(1 if j == 1 else 0) for j in range(k)]
    # Gauss-Jordan in exact arithmetic
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(k):
        piv = next(r for r in range(col, k) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [v / pv for v in M[col]]
        for r in range(k):
            if r != col and M[r][col] != 0:
                fac = M[r][col]
                M[r] = [vr - fac * vc for vr, vc in zip(M[r], M[col])]
    return np.array([float(M[i][k]) for i in range(k)])


def _diff_matrix(count: int, h: float, even_at_pole: bool, order: int = 4) -> np.ndarray:
    """First-derivative matrix of the given even ``order`` on ``count + 1`` nodes.

    Central stencils in the interior, one-sided stencils of the same order at
    the ends, or mirror ghosts ``u(-jh) = u(jh)`` at the start when
    ``even_at_pole`` is set.
    """
    q = order // 2
    N = count + 1
    D = np.zeros((N, N))
    central = _fd_stencil(tuple(range(-q, q + 1)))
    for i in range(q, N - q):
        D[i, i - q : i + q + 1] = central
    for i in range(q):
        one = _fd_stencil(tuple(range(-i, order + 1 - i)))
        D[N - 1 - i, N - 1 - order :] = -one[::-1]
        if even_at_pole:
            for j, wgt in zip(range(i - q, i + q + 1), central):
                D[i, abs(j)] += wgt
        else:
            D[i, : order + 1] = one
    return D / h


@dataclass(frozen=True, eq=False)
class AngularGrid:
    """Quadrature nodes and weights on a cap cross section.

    Attributes
    ----------
    n : int
        Ambient dimension.
    theta_end : float
        Upper end of the node variable (arc length for ``n = 2``).
    resolution : int
        Number of intervals in the node variable.
    azimuth_count : int
        Number of azimuthal nodes, 0 for axisymmetric grids.
    theta : ndarray
        Nodes of the polar (or arc-length) variable.
    theta_weights : ndarray
        One-dimensional quadrature weights for ``theta``.
    measure : ndarray
        Full per-node weights, shape ``grid.shape``.
    dirs : ndarray
        Unit directions (``shape + (d,)``).
    """

    n: int
    theta_end: float
    resolution: int
    azimuth_count: int
    kind: str
    theta: np.ndarray
    theta_weights: np.ndarray
    measure: np.ndarray
    dirs: np.ndarray
    e_theta: np.ndarray
    e_phi: np.ndarray | None
    phi: np.ndarray | None
    fd_order: int = DEFAULT_FD_ORDER
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def shape(self) -> tuple:
        return self.measure.shape

    @property
    def h(self) -> float:
        return self.theta_end / self.resolution

    @property
    def height(self) -> np.ndarray:
        """``<x, e_n>`` per node."""
        return self.dirs[..., -1]

    @property
    def opening(self) -> float:
        """Polar half-angle of the cross section measured from ``e_n``."""
        return self.theta_end / 2.0 if self.kind == "arc" else self.theta_end

    @property
    def is_half_space(self) -> bool:
        return abs(self.opening - pi / 2.0) < 1e-14

    @property
    def area(self) -> float:
        return float(self.measure.sum())

    def same_as(self, other: "AngularGrid") -> bool:
        return self is other or (
            self.kind == other.kind
            and self.n == other.n
            and self.shape == other.shape
            and self.theta_end == other.theta_end
        )

    def diff_matrix(self, even_at_pole: bool = False) -> np.ndarray:
        key = ("D", bool(even_at_pole) and self.kind != "arc")
        if key not in self._cache:
            self._cache[key] = _diff_matrix(self.resolution, self.h, key[1], self.fd_order)
        return self._cache[key]

    def with_azimuth(self, count: int) -> "AngularGrid":
        """The full ``(theta, phi)`` grid with the same polar nodes (n = 3)."""
        if self.kind == "full":
            return self
        if self.n != 3:
            raise ValueError("azimuthal layer only exists for n = 3")
        key = ("az", int(count))
        if key not in self._cache:
            self._cache[key] = make_grid(3, self.theta_end, self.resolution, count, self.fd_order)
        return self._cache[key]

    def expand(self, values: np.ndarray, count: int) -> np.ndarray:
        """Broadcast zonal values onto ``with_azimuth(count)``."""
        if self.kind == "full":
            return values
        return np.repeat(values[:, None], count, axis=1)

    def embed(self, vec: np.ndarray) -> np.ndarray:
        """Express meridian vectors in ``R^n`` (first axis along ``e_1``)."""
        if self.kind != "zonal":
            return vec
        out = np.zeros(vec.shape[:-1] + (self.n,))
        out[..., 0] = vec[..., 0]
        out[..., -1] = vec[..., 1]
        return out


def make_grid(
    params: CapParams | int,
    theta_end: float | None = None,
    resolution: int = 128,
    azimuth_count: int = 0,
    fd_order: int = DEFAULT_FD_ORDER,
) -> AngularGrid:
    """Build a cap grid.

    Parameters
    ----------
    params : CapParams or int
        Parameters (only ``n`` is used) or the dimension itself.
    theta_end : float, optional
        Defaults to the half sphere: ``pi`` for ``n = 2`` (arc length of the
        half circle) and ``pi/2`` otherwise.
    resolution : int
        Number of intervals, at least 8.
    azimuth_count : int
        Azimuthal nodes; positive only for ``n = 3``.
    fd_order : int
        Order of the polar finite differences (4 or 6).
    """
    n = params.n if isinstance(params, CapParams) else int(params)
    if n < 2:
        raise ValueError("dimension must be >= 2")
    if theta_end is None:
        theta_end = pi if n == 2 else pi / 2.0
    theta_end = float(theta_end)
    if not (0.0 < theta_end <= pi):
        raise ValueError("theta_end must lie in (0, pi]")
    if resolution < 8:
        raise ValueError("resolution must be >= 8")
    if azimuth_count < 0 or (azimuth_count > 0 and n != 3):
        raise ValueError("azimuthal layer requires n = 3")
    if fd_order not in (4, 6):
        raise ValueError("fd_order must be 4 or 6")
    if 0 < azimuth_count < 4:
        raise ValueError("azimuth_count must be >= 4")
    theta = np.linspace(0.0, theta_end, resolution + 1)
    qw = gregory_weights(resolution, theta_end)
    if n == 2:
        t = theta + (pi - theta_end) / 2.0
        dirs = np.stack([np.cos(t), np.sin(t)], axis=-1)
        e_t = np.stack([-np.sin(t), np.cos(t)], axis=-1)
        return AngularGrid(2, theta_end, resolution, 0, "arc", theta, qw, qw.copy(),
                           dirs, e_t, None, None, fd_order)
    s, c = np.sin(theta), np.cos(theta)
    if azimuth_count == 0:
        measure = qw * sphere_area(n - 2) * s ** (n - 2)
        dirs = np.stack([s, c], axis=-1)
        e_t = np.stack([c, -s], axis=-1)
        return AngularGrid(n, theta_end, resolution, 0, "zonal", theta, qw, measure,
                           dirs, e_t, None, None, fd_order)
    phi = 2.0 * pi * np.arange(azimuth_count) / azimuth_count
    cp, sp = np.cos(phi), np.sin(phi)
    measure = np.outer(qw * s, np.full(azimuth_count, 2.0 * pi / azimuth_count))
    dirs = np.stack([np.outer(s, cp), np.outer(s, sp), np.outer(c, np.ones_like(phi))], -1)
    e_t = np.stack([np.outer(c, cp), np.outer(c, sp), np.outer(-s, np.ones_like(phi))], -1)
    e_p = np.stack([np.outer(np.ones_like(s), -sp), np.outer(np.ones_like(s), cp),
                    np.zeros((theta.size, azimuth_count))], -1)
    return AngularGrid(3, theta_end, resolution, azimuth_count, "full", theta, qw, measure,
                       dirs, e_t, e_p, phi, fd_order)


# ---------------------------------------------------------------------------
# fields


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Values of a real function at the nodes of ``grid``.

    ``smooth_at_pole`` requests the even reflection at ``theta = 0`` when
    differentiating zonal fields.
    """

    grid: AngularGrid
    values: np.ndarray
    smooth_at_pole: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values of shape {v.shape} do not match grid {self.grid.shape}")
        object.__setattr__(self, "values", v)

    def __add__(self, other):
        o = other.values if isinstance(other, ScalarField) else other
        return ScalarField(self.grid, self.values + o, self.smooth_at_pole)

    def __sub__(self, other):
        o = other.values if isinstance(other, ScalarField) else other
        return ScalarField(self.grid, self.values - o, self.smooth_at_pole)

    def __mul__(self, other):
        o = other.values if isinstance(other, ScalarField) else other
        return ScalarField(self.grid, self.values * o, self.smooth_at_pole)

    __rmul__ = __mul__


class RadialGraph:
    """The star-shaped set ``{r x : 0 < r < f(x)}`` for a positive field ``f``."""

    __slots__ = ("field",)

    def __init__(self, field_or_grid, values=None, smooth_at_pole: bool = False):
        if values is not None:
            field_or_grid = ScalarField(field_or_grid, values, smooth_at_pole)
        if not isinstance(field_or_grid, ScalarField):
            raise TypeError("RadialGraph needs a ScalarField or (grid, values)")
        if not np.all(field_or_grid.values > 0) or not np.all(np.isfinite(field_or_grid.values)):
            raise ValueError("radial function must be positive and finite at every node")
        self.field = field_or_grid

    @property
    def grid(self) -> AngularGrid:
        return self.field.grid

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    def scaled(self, s: float) -> "RadialGraph":
        return RadialGraph(ScalarField(self.grid, s * self.values, self.field.smooth_at_pole))

    def __repr__(self):
        return f"RadialGraph(kind={self.grid.kind}, n={self.grid.n}, shape={self.grid.shape})"


@dataclass(frozen=True)
class SurfacePoint:
    position: np.ndarray
    normal: np.ndarray
    area_element: float


def _values(u) -> np.ndarray:
    if isinstance(u, RadialGraph):
        return u.values
    if isinstance(u, ScalarField):
        return u.values
    return np.asarray(u, dtype=float)


def _grid_of(u, grid=None) -> AngularGrid:
    g = u.grid if isinstance(u, (RadialGraph, ScalarField)) else grid
    if grid is not None and g is not None and not grid.same_as(g):
        raise ValueError("field lives on a different grid")
    if g is None:
        raise ValueError("a grid is required")
    return g


def _pole_flag(u) -> bool:
    if isinstance(u, RadialGraph):
        return u.field.smooth_at_pole
    if isinstance(u, ScalarField):
        return u.smooth_at_pole
    return False


def grad_vector(grid: AngularGrid, u, even_at_pole: bool | None = None) -> np.ndarray:
    """Tangential gradient as a vector field of shape ``grid.shape + (d,)``."""
    v = _values(u)
    if grid.resolution + 1 < 5:
        raise ValueError("at least 5 polar nodes are required")
    if even_at_pole is None:
        even_at_pole = _pole_flag(u)
    D = grid.diff_matrix(even_at_pole)
    dth = D @ v
    if grid.kind != "full":
        return dth[..., None] * grid.e_theta
    # azimuthal derivative by FFT (exact for the trapezoid-resolved modes)
    m = grid.azimuth_count
    k = np.fft.fftfreq(m, d=1.0 / m)
    if m % 2 == 0:
        k[m // 2] = 0.0
    dph = np.real(np.fft.ifft(1j * k * np.fft.fft(v, axis=1), axis=1))
    s = np.sin(grid.theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        az = np.where(s[:, None] > 0, dph / s[:, None], 0.0)
    g = dth[..., None] * grid.e_theta + az[..., None] * grid.e_phi
    if grid.theta[0] == 0.0:
        # pole: d_theta u(0, phi) = <grad u, (cos phi, sin phi)>, fit mode 1
        gx = 2.0 * np.mean(dth[0] * np.cos(grid.phi))
        gy = 2.0 * np.mean(dth[0] * np.sin(grid.phi))
        g[0] = np.array([gx, gy, 0.0])
    return g


def tangential_gradient(grid: AngularGrid, u) -> ScalarField:
    """Pointwise ``|grad u|``."""
    g = grad_vector(grid, u)
    return ScalarField(grid, np.linalg.norm(g, axis=-1))


def integrate_surface(grid: AngularGrid, g) -> float:
    """Quadrature of ``g`` against the surface measure of the cap."""
    if isinstance(g, (ScalarField, RadialGraph)):
        _grid_of(g, grid)
    v = _values(g)
    if v.shape != grid.shape:
        v = np.broadcast_to(v, grid.shape)
    return float(np.sum(grid.measure * v))


def sobolev_norms(grid: AngularGrid, u) -> tuple[float, float, float]:
    """``(int |u|, int u^2, int u^2 + |grad u|^2)``."""
    v = _values(u)
    g = grad_vector(grid, u)
    l1 = integrate_surface(grid, np.abs(v))
    l2 = integrate_surface(grid, v * v)
    return l1, l2, l2 + integrate_surface(grid, np.sum(g * g, axis=-1))


def w_values(lam: float, height: np.ndarray) -> np.ndarray:
    """Radial function of the unit bubble as a function of ``z = <x, e_n>``."""
    z = np.asarray(height, dtype=float)
    return -lam * z + np.sqrt(1.0 - lam * lam * (1.0 - z * z))


def w_profile(params: CapParams, grid: AngularGrid) -> RadialGraph:
    """The bubble ``B^lam``: ``|w x + lam e_n| = 1``."""
    if grid.n != params.n:
        raise ValueError("grid dimension does not match params")
    return RadialGraph(ScalarField(grid, w_values(params.lam, grid.height)))


def graph_volume(f: RadialGraph) -> float:
    n = f.grid.n
    return integrate_surface(f.grid, f.values**n / n)


def _jac_parts(f: RadialGraph):
    grid = f.grid
    F = f.values
    G = grad_vector(grid, f)
    r = np.sqrt(F * F + np.sum(G * G, axis=-1))
    return F, G, r


def area_element(f: RadialGraph) -> ScalarField:
    """Tangential Jacobian ``f^{n-2} sqrt(f^2 + |grad f|^2)``."""
    F, _, r = _jac_parts(f)
    return ScalarField(f.grid, F ** (f.grid.n - 2) * r)


def normal_field(f: RadialGraph) -> np.ndarray:
    """Outer unit normals ``(f x - grad f)/sqrt(f^2 + |grad f|^2)`` (grid coordinates)."""
    F, G, r = _jac_parts(f)
    return (F[..., None] * f.grid.dirs - G) / r[..., None]


def _node_index(grid: AngularGrid, node):
    if isinstance(node, (int, np.integer)):
        return np.unravel_index(int(node), grid.shape)
    return tuple(node)


def unit_normal(f: RadialGraph, node) -> np.ndarray:
    """Outer unit normal in ``R^n`` at a node (flat index or index tuple)."""
    nu = normal_field(f)[_node_index(f.grid, node)]
    return f.grid.embed(nu)


def surface_point(f: RadialGraph, node) -> SurfacePoint:
    idx = _node_index(f.grid, node)
    pos = f.grid.embed(f.values[idx] * f.grid.dirs[idx])
    J = area_element(f).values[idx]
    return SurfacePoint(pos, unit_normal(f, node), float(J))


def graph_distance(f: RadialGraph, g: RadialGraph) -> tuple[float, float]:
    """Discrete ``sup |f - g|`` and ``sup |grad (f - g)|``."""
    if not f.grid.same_as(g.grid):
        raise ValueError("graphs live on different grids")
    d = f.values - g.values
    gd = grad_vector(f.grid, d, f.field.smooth_at_pole and g.field.smooth_at_pole)
    return float(np.max(np.abs(d))), float(np.max(np.linalg.norm(gd, axis=-1)))


@lru_cache(maxsize=256)
def bubble_volume(n: int, lam: float) -> float:
    """``|B^lam|``: volume of the unit ball above the height ``lam``."""
    # |B^lam| = omega_{n-1} int_lam^1 (1 - h^2)^{(n-1)/2} dh, via h^2 = u
    wn1 = pi ** ((n - 1) / 2.0) / gamma((n + 1) / 2.0)
    b = (n + 1) / 2.0
    full = special.beta(0.5, b)
    part = 0.5 * full * special.betaincc(0.5, b, lam * lam)
    return float(wn1 * (part if lam >= 0 else full - part))
