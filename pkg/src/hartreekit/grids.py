"""Radial discretization of R^N (N >= 5).

Functions of |x| are carried on a composite Gauss-Legendre grid over [0, R_max]
with geometrically stretched cells, plus an analytic power-law tail model
f(r) ~ c_tail * r^(-p_tail) for r > R_max.  Volume weights satisfy

    sum_i w_i f(r_i) ~ int_{B_Rmax} f(|x|) dx = |S^{N-1}| int_0^Rmax f r^{N-1} dr.

Translated objects are represented as a radial profile plus a single offset
distance (OffsetFn); their integrals against radial weights reduce to a 2-D
(s, theta) quadrature with the angular measure sin^{N-2}(theta) d(theta).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import roots_jacobi

from .errors import AccuracyWarning, DivergenceError, ParameterError

__all__ = [
    "RadialGrid",
    "RadialFn",
    "OffsetFn",
    "Pair",
    "sphere_area",
    "make_grid",
    "from_callable",
    "integrate",
    "lp_norm",
    "dirichlet_seminorm",
    "bicenter_integral",
    "axis_moment_integrals",
]

NODES_PER_CELL = 5
DEFAULT_THETA_NODES = 64


def sphere_area(N: int) -> float:
    """Surface measure |S^{N-1}| of the unit sphere in R^N."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Composite Gauss-Legendre quadrature nodes for radial integrals on R^N."""

    N: int
    r: np.ndarray          # node radii, strictly increasing, r[0] > 0
    w1: np.ndarray         # 1-D weights: int_0^R g(r) dr ~ sum w1_i g(r_i)
    edges: np.ndarray      # macro-cell edges, edges[0] = 0, edges[-1] = R_max
    node_cell: np.ndarray  # macro-cell index of each node
    R_max: float
    stretch: float
    parent: "RadialGrid | None" = None   # set when built via .scaled()
    scale_factor: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def M(self) -> int:
        return len(self.r)

    @property
    def omega(self) -> float:
        return sphere_area(self.N)

    @property
    def w(self) -> np.ndarray:
        """Volume weights: sum w_i f(r_i) ~ int_{B_R} f(|x|) dx."""
        key = "volume_weights"
        if key not in self._cache:
            self._cache[key] = self.omega * self.r ** (self.N - 1) * self.w1
        return self._cache[key]

    def scaled(self, c: float) -> "RadialGrid":
        """Grid with all radii multiplied by c > 0 (volume weights scale by c^N)."""
        if c <= 0:
            raise ParameterError("scale factor must be positive")
        root = self.parent if self.parent is not None else self
        return RadialGrid(
            N=self.N,
            r=self.r * c,
            w1=self.w1 * c,
            edges=self.edges * c,
            node_cell=self.node_cell,
            R_max=self.R_max * c,
            stretch=self.stretch,
            parent=root,
            scale_factor=self.scale_factor * c,
        )

    def deriv_matrix(self) -> np.ndarray:
        """Nodal differentiation matrix (degree-4 local polynomial stencils).

        Five-node sliding windows; one-sided at both ends.  Exact on
        polynomials up to degree 4, so the derivative is 4th-order accurate
        on smooth profiles.
        """
        key = "deriv_matrix"
        if key not in self._cache:
            r = self.r
            M = len(r)
            width = min(5, M)
            D = np.zeros((M, M))
            for i in range(M):
                lo = min(max(i - width // 2, 0), M - width)
                x = r[lo : lo + width] - r[i]
                h = max(abs(x[0]), abs(x[-1]))
                V = np.vander(x / h, width, increasing=True)
                coeffs = np.linalg.solve(V.T, np.eye(width)[1])  # d/dx at 0
                D[i, lo : lo + width] = coeffs / h
            self._cache[key] = D
        return self._cache[key]

    def stiffness(self) -> np.ndarray:
        """Symmetric PSD matrix A with u^T A u ~ int |grad u|^2 over the ball.

        Accurate as a quadratic form on smooth nodal vectors; nearly singular
        on sawtooth modes (centered stencils), so it must not be inverted.
        """
        key = "stiffness"
        if key not in self._cache:
            D = self.deriv_matrix()
            self._cache[key] = D.T @ (self.w[:, None] * D)
        return self._cache[key]

    def second_deriv_matrix(self) -> np.ndarray:
        """Nodal second-derivative matrix from the same 5-point polynomial fits.

        Unlike the square of the first-derivative matrix, direct stencils keep
        a large symbol at the grid's highest frequency, so the collocation
        Laplacian built from this matrix is safely invertible.
        """
        key = "second_deriv_matrix"
        if key not in self._cache:
            r = self.r
            M = len(r)
            width = min(5, M)
            D2 = np.zeros((M, M))
            for i in range(M):
                lo = min(max(i - width // 2, 0), M - width)
                x = r[lo : lo + width] - r[i]
                h = max(abs(x[0]), abs(x[-1]))
                V = np.vander(x / h, width, increasing=True)
                coeffs = np.linalg.solve(V.T, 2.0 * np.eye(width)[2])  # d2/dx2 at 0
                D2[i, lo : lo + width] = coeffs / h**2
            self._cache[key] = D2
        return self._cache[key]

    def laplacian_matrix(self) -> np.ndarray:
        """Radial Laplacian collocation matrix: u'' + (N-1) u'/r at the nodes."""
        key = "laplacian_matrix"
        if key not in self._cache:
            D = self.deriv_matrix()
            D2 = self.second_deriv_matrix()
            self._cache[key] = D2 + (self.N - 1) / self.r[:, None] * D
        return self._cache[key]


def make_grid(N: int, M: int, R_max: float, stretch: float = 1.0) -> RadialGrid:
    """Build the composite radial quadrature grid.

    M nodes are distributed over ceil-ish M/5 geometric cells (width ratio
    `stretch`), five Gauss-Legendre nodes per cell; remainder nodes go to the
    outermost cells.
    """
    if not (isinstance(N, (int, np.integer)) and N >= 5):
        raise ParameterError(f"dimension N must be an integer >= 5, got {N}")
    if not (isinstance(M, (int, np.integer)) and M >= 16):
        raise ParameterError(f"node count M must be an integer >= 16, got {M}")
    if not (R_max > 0):
        raise ParameterError(f"R_max must be positive, got {R_max}")
    if not (stretch >= 1.0):
        raise ParameterError(f"stretch must be >= 1, got {stretch}")

    n_cells = max(1, M // NODES_PER_CELL)
    counts = np.full(n_cells, M // n_cells)
    rem = M - int(counts.sum())
    if rem:
        counts[n_cells - rem :] += 1  # remainder nodes go to the outermost cells

    if stretch == 1.0:
        widths = np.full(n_cells, R_max / n_cells)
    else:
        w0 = R_max * (stretch - 1.0) / (stretch**n_cells - 1.0)
        widths = w0 * stretch ** np.arange(n_cells)
    edges = np.concatenate([[0.0], np.cumsum(widths)])
    edges[-1] = R_max

    nodes, weights, cell_idx = [], [], []
    for j in range(n_cells):
        q = int(counts[j])
        x, wq = np.polynomial.legendre.leggauss(q)
        a, b = edges[j], edges[j + 1]
        nodes.append(0.5 * (b - a) * x + 0.5 * (b + a))
        weights.append(0.5 * (b - a) * wq)
        cell_idx.append(np.full(q, j))
    r = np.concatenate(nodes)
    w1 = np.concatenate(weights)
    node_cell = np.concatenate(cell_idx)
    return RadialGrid(
        N=int(N), r=r, w1=w1, edges=edges, node_cell=node_cell,
        R_max=float(R_max), stretch=float(stretch),
    )


def _combine_tails(p1, c1, p2, c2, mode):
    """Tail model of a product or sum of two tailed functions."""
    if mode == "mul":
        if c1 == 0.0 or c2 == 0.0:
            return None, 0.0
        return p1 + p2, c1 * c2
    # sum: slower decay dominates
    if c1 == 0.0:
        return p2, c2
    if c2 == 0.0:
        return p1, c1
    if p1 == p2:
        return p1, c1 + c2
    return (p1, c1) if p1 < p2 else (p2, c2)


@dataclass(frozen=True, eq=False)
class RadialFn:
    """Nodal values of a radial function plus its power-law tail model."""

    grid: RadialGrid
    values: np.ndarray
    p_tail: float | None = None
    c_tail: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.r.shape:
            raise ParameterError("values shape does not match grid")
        if not np.all(np.isfinite(v)):
            raise ParameterError("values must be finite")
        object.__setattr__(self, "values", v)

    # -- evaluation ---------------------------------------------------------
    def _spline(self) -> CubicSpline:
        if "spline" not in self._cache:
            r = np.concatenate([[0.0], self.grid.r])
            # even extension: fit f(0) from a + b r^2 through the first nodes
            r2 = self.grid.r[:3] ** 2
            A = np.vstack([np.ones(3), r2]).T
            ab, *_ = np.linalg.lstsq(A, self.values[:3], rcond=None)
            v = np.concatenate([[ab[0]], self.values])
            if self.c_tail != 0.0 and self.p_tail is not None:
                right = (1, -self.p_tail * self.c_tail * self.grid.R_max ** (-self.p_tail - 1))
            else:
                right = (2, 0.0)
            self._cache["spline"] = CubicSpline(r, v, bc_type=((1, 0.0), right))
        return self._cache["spline"]

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        inside = r <= self.grid.R_max
        if inside.any():
            out[inside] = self._spline()(r[inside])
        if (~inside).any():
            if self.c_tail != 0.0 and self.p_tail is not None:
                out[~inside] = self.c_tail * r[~inside] ** (-self.p_tail)
            else:
                out[~inside] = 0.0
        return out if out.ndim else float(out)

    # -- algebra ------------------------------------------------------------
    def _binary(self, other, op, mode):
        if isinstance(other, RadialFn):
            if other.grid is not self.grid:
                raise ParameterError("operands live on different grids")
            p, c = _combine_tails(self.p_tail, self.c_tail, other.p_tail, other.c_tail, mode)
            return RadialFn(self.grid, op(self.values, other.values), p, c)
        return NotImplemented

    def __mul__(self, other):
        if np.isscalar(other):
            return RadialFn(self.grid, self.values * other, self.p_tail, self.c_tail * other)
        return self._binary(other, np.multiply, "mul")

    __rmul__ = __mul__

    def __add__(self, other):
        return self._binary(other, np.add, "sum")

    def __sub__(self, other):
        if isinstance(other, RadialFn):
            return self + (-other)
        return NotImplemented

    def __neg__(self):
        return RadialFn(self.grid, -self.values, self.p_tail, -self.c_tail)

    def power(self, k: float) -> "RadialFn":
        """|f|^k with the induced tail model (assumes c_tail >= 0)."""
        p = None if self.p_tail is None else self.p_tail * k
        c = abs(self.c_tail) ** k if self.c_tail != 0.0 else 0.0
        return RadialFn(self.grid, np.abs(self.values) ** k, p, c)

    def positive(self) -> "RadialFn":
        return RadialFn(self.grid, np.clip(self.values, 0.0, None),
                        self.p_tail, max(self.c_tail, 0.0))

    def squared(self) -> "RadialFn":
        p = None if self.p_tail is None else 2.0 * self.p_tail
        return RadialFn(self.grid, self.values**2, p, self.c_tail**2)

    def resample(self, grid: RadialGrid) -> "RadialFn":
        return RadialFn(grid, self(grid.r), self.p_tail, self.c_tail)


def from_callable(grid: RadialGrid, fn, p_tail=None, c_tail=0.0) -> RadialFn:
    return RadialFn(grid, np.asarray(fn(grid.r), dtype=float), p_tail, c_tail)


@dataclass(frozen=True, eq=False)
class OffsetFn:
    """A radial profile translated by distance rho along a fixed axis."""

    profile: RadialFn
    rho: float

    def __post_init__(self):
        if not (np.isfinite(self.rho) and self.rho >= 0):
            raise ParameterError(f"offset distance must be finite and >= 0, got {self.rho}")

    def __call__(self, dist):
        """Evaluate at points given by their distance to the translation center."""
        return self.profile(dist)


@dataclass(frozen=True, eq=False)
class Pair:
    """Two-component state (u, v) on a shared grid / shared offset."""

    u: RadialFn | OffsetFn
    v: RadialFn | OffsetFn

    def __post_init__(self):
        if isinstance(self.u, OffsetFn) != isinstance(self.v, OffsetFn):
            raise ParameterError("mixed radial/offset pairs are not supported")
        if isinstance(self.u, OffsetFn):
            if self.u.profile.grid is not self.v.profile.grid:
                raise ParameterError("pair components live on different grids")
            if self.u.rho != self.v.rho:
                raise ParameterError("pair components have different offsets")
        elif self.u.grid is not self.v.grid:
            raise ParameterError("pair components live on different grids")

    @property
    def offset(self) -> float:
        return self.u.rho if isinstance(self.u, OffsetFn) else 0.0

    @property
    def grid(self) -> RadialGrid:
        return self.u.profile.grid if isinstance(self.u, OffsetFn) else self.u.grid

    def components(self):
        if isinstance(self.u, OffsetFn):
            return self.u.profile, self.v.profile
        return self.u, self.v

    def scale(self, t: float) -> "Pair":
        if isinstance(self.u, OffsetFn):
            return Pair(OffsetFn(t * self.u.profile, self.u.rho),
                        OffsetFn(t * self.v.profile, self.v.rho))
        return Pair(t * self.u, t * self.v)


# ---------------------------------------------------------------------------
# quadrature operations
# ---------------------------------------------------------------------------

def _tail_integral(f: RadialFn, power: float = 1.0) -> float:
    """int_{R}^{inf} (c r^-p)^power * |S^{N-1}| r^{N-1} dr, with divergence check."""
    if f.c_tail == 0.0:
        return 0.0
    if f.p_tail is None:
        return 0.0
    N, R = f.grid.N, f.grid.R_max
    p_eff = f.p_tail * power
    if p_eff <= N:
        raise DivergenceError(
            f"tail exponent {f.p_tail} (power {power}) does not decay faster than r^-{N}"
        )
    c_eff = abs(f.c_tail) ** power if power != 1.0 else f.c_tail
    return f.grid.omega * c_eff * R ** (N - p_eff) / (p_eff - N)


def integrate(f: RadialFn) -> float:
    """int_{R^N} f(|x|) dx with analytic tail correction."""
    return float(f.grid.w @ f.values) + _tail_integral(f)


def lp_norm(f: RadialFn, p: float) -> float:
    """(int |f|^p)^(1/p) with tail handling as in integrate."""
    if p < 1:
        raise ParameterError(f"p must be >= 1, got {p}")
    core = float(f.grid.w @ np.abs(f.values) ** p)
    return (core + _tail_integral(f, power=p)) ** (1.0 / p)


def dirichlet_seminorm(f: RadialFn, check_resolution: bool = False) -> float:
    """int |grad f|^2 for radial f, via 4th-order nodal differentiation.

    With check_resolution=True an embedded half-resolution estimate is
    compared and an AccuracyWarning is emitted on > 0.1% disagreement.
    """
    g = f.grid
    df = g.deriv_matrix() @ f.values
    core = float(g.w @ df**2)
    tail = 0.0
    if f.c_tail != 0.0 and f.p_tail is not None:
        p = f.p_tail
        if 2 * p + 2 <= g.N:
            raise DivergenceError("gradient tail is not square integrable")
        tail = g.omega * (f.c_tail * p) ** 2 * g.R_max ** (g.N - 2 * p - 2) / (2 * p + 2 - g.N)
    if check_resolution:
        sub = slice(None, None, 2)
        r_c = g.r[sub]
        vals_c = f.values[sub]
        dfc = np.gradient(vals_c, r_c)
        wc = np.empty_like(r_c)
        mids = 0.5 * (r_c[1:] + r_c[:-1])
        edges_c = np.concatenate([[0.0], mids, [g.R_max]])
        wc = g.omega * r_c ** (g.N - 1) * np.diff(edges_c)
        coarse = float(wc @ dfc**2)
        if abs(coarse - core) > 1e-3 * max(abs(core), 1e-300):
            warnings.warn(
                "dirichlet_seminorm may be under-resolved on this grid",
                AccuracyWarning,
                stacklevel=2,
            )
    return core + tail


def _theta_rule(N: int, n_theta: int):
    """Angular rule: int_{S^{N-1}} F(w . e1) dw = sum a_k F(t_k)."""
    t, wt = roots_jacobi(n_theta, (N - 3) / 2.0, (N - 3) / 2.0)
    a = wt * sphere_area(N - 1)
    return t, a


def bicenter_integral(f: RadialFn, g: RadialFn, rho: float,
                      n_theta: int = DEFAULT_THETA_NODES) -> float:
    """int f(|x|) g(|x - y|) dx for |y| = rho.

    Symmetric in (f, g) by construction; rho = 0 falls back to the plain
    radial product quadrature.
    """
    if rho < 0:
        raise ParameterError("offset must be >= 0")
    if rho == 0.0:
        if g.grid is f.grid:
            return integrate(f * g)
        return 0.5 * (integrate(f.resample(g.grid) * g) + integrate(g.resample(f.grid) * f))
    return 0.5 * (_bicenter_one_way(f, g, rho, n_theta) + _bicenter_one_way(g, f, rho, n_theta))


def _bicenter_one_way(f: RadialFn, g: RadialFn, rho: float, n_theta: int) -> float:
    """Quadrature over g's grid (s = |x - y|), f evaluated at |x|."""
    grid = g.grid
    N = grid.N
    t, a = _theta_rule(N, n_theta)
    s = grid.r[:, None]
    dist = np.sqrt(rho**2 + s**2 + 2.0 * rho * s * t[None, :])
    fvals = f(dist)
    angular = fvals @ a
    core = float((grid.w1 * grid.r ** (N - 1) * g.values) @ angular)
    if g.c_tail != 0.0 and g.p_tail is not None:
        # s in (R, inf): map s = R / x with 32-node rule
        if f.p_tail is not None and f.c_tail != 0.0 and g.p_tail + f.p_tail <= N:
            raise DivergenceError("combined tails of the translated overlap do not decay")
        x, wx = np.polynomial.legendre.leggauss(32)
        x = 0.5 * (x + 1.0)
        wx = 0.5 * wx
        s_t = grid.R_max / x
        ds = grid.R_max / x**2
        dist_t = np.sqrt(rho**2 + s_t[:, None] ** 2 + 2.0 * rho * s_t[:, None] * t[None, :])
        ft = f(dist_t) @ a
        gt = g.c_tail * s_t ** (-g.p_tail)
        core += float(np.sum(wx * ds * s_t ** (N - 1) * gt * ft))
    return core


def axis_moment_integrals(h: OffsetFn, xi_guess: float,
                          n_theta: int = DEFAULT_THETA_NODES):
    """Weighted integrals of |h|^{2*} used by the barycenter maps.

    Returns (mass, axial_first_moment, spread):
      mass   = int |h|^{2*} dx
      axial  = int (x . yhat)/(1 + |x|) |h|^{2*} dx      (0 exactly when rho = 0)
      spread = int |x/(1+|x|) - xi_guess * yhat| |h|^{2*} dx
    """
    prof = h.profile
    grid = prof.grid
    N = grid.N
    two_star = 2.0 * N / (N - 2.0)
    dens = prof.power(two_star)
    rho = h.rho
    if dens.c_tail != 0.0 and dens.p_tail is not None and dens.p_tail <= N:
        raise DivergenceError("profile is not 2*-integrable under its tail model")

    if rho == 0.0:
        mass = integrate(dens)
        r = grid.r
        spread_w = np.sqrt((r / (1.0 + r)) ** 2 + xi_guess**2)
        spread = float(grid.w @ (dens.values * spread_w)) + _tail_integral(dens) * math.hypot(
            1.0, xi_guess
        )
        return mass, 0.0, spread

    t, a = _theta_rule(N, n_theta)
    s = grid.r[:, None]
    absx = np.sqrt(rho**2 + s**2 + 2.0 * rho * s * t[None, :])
    axial_comp = rho + s * t[None, :]
    radial_weight = grid.w1 * grid.r ** (N - 1) * dens.values

    mass = float(a.sum() * radial_weight.sum())
    axial = float(radial_weight @ ((axial_comp / (1.0 + absx)) @ a))
    spread_kernel = np.sqrt(
        (absx / (1.0 + absx)) ** 2
        - 2.0 * xi_guess * axial_comp / (1.0 + absx)
        + xi_guess**2
    )
    spread = float(radial_weight @ (spread_kernel @ a))
    if dens.c_tail != 0.0 and dens.p_tail is not None:
        tail_mass = _tail_integral(dens)
        mass += tail_mass
        # at |x| -> inf the axial weight averages to 0 and the spread weight to
        # the unit-vector distance ~ sqrt(1 + xi^2); first-order tail model
        spread += tail_mass * math.hypot(1.0, xi_guess)
    return mass, axial, spread
