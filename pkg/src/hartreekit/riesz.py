"""Nonlocal engine: angular-averaged Riesz kernels and the double energy.

For a radial density f the convolution (|x|^(-alpha) * f)(x) reduces to

    g(r) = int_0^inf K_alpha(r, s) s^(N-1) f(s) ds,
    K_alpha(r, s) = int_{S^{N-1}} |r e1 - s w|^(-alpha) dw.

In the critical case alpha = 4, N = 5 the angular integral is elementary:

    K_4(r, s) = pi^2 [ (r^2 + s^2) ln((r+s)/|r-s|) - 2 r s ] / (r^3 s^3),

which carries a logarithmic singularity on the diagonal (alpha = N - 1 is
exactly the borderline where the angular average stops being finite at
r = s).  The s-integral is still absolutely convergent; the quadrature
matrix therefore treats the cells nearest the diagonal with exact
log-weighted moments of the local polynomial interpolant instead of plain
nodal weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DivergenceError, NumericalError, ParameterError
from .grids import (
    RadialFn,
    RadialGrid,
    dirichlet_seminorm,
    from_callable,
    integrate,
    lp_norm,
    make_grid,
    sphere_area,
)

__all__ = [
    "hls_constant",
    "sobolev_constant",
    "angular_kernel",
    "AngularKernel",
    "kernel_for",
    "riesz_convolve",
    "double_energy",
    "double_energy_info",
    "ConstantsTable",
]

_NEAR_CELL_REACH = 1  # cells on each side of the diagonal handled by exact moments


def hls_constant(N: int, alpha: float) -> float:
    """Sharp constant of the diagonal Hardy-Littlewood-Sobolev inequality.

    C(N, alpha) = pi^(alpha/2) Gamma((N-alpha)/2) / Gamma((2N-alpha)/2)
                  * (Gamma(N/2) / Gamma(N))^(-(N-alpha)/N)
    """
    if not 0 < alpha < N:
        raise ParameterError(f"alpha must lie in (0, N), got alpha={alpha}, N={N}")
    log_c = (
        0.5 * alpha * math.log(math.pi)
        + math.lgamma((N - alpha) / 2.0)
        - math.lgamma((2.0 * N - alpha) / 2.0)
        - (-(N - alpha) / N) * (math.lgamma(N) - math.lgamma(N / 2.0))
    )
    return math.exp(log_c)


def sobolev_constant(N: int, grid: RadialGrid | None = None) -> float:
    """Best constant in the embedding D^{1,2} -> L^{2*}.

    Closed form  N(N-2) pi (Gamma(N/2)/Gamma(N))^{2/N},  cross-checked against
    the Rayleigh quotient of the discretized extremal profile
    (1 + r^2)^(-(N-2)/2); disagreement beyond 0.1% raises NumericalError.
    """
    if not (isinstance(N, (int, np.integer)) and N >= 3):
        raise ParameterError(f"N must be an integer >= 3, got {N}")
    closed = N * (N - 2) * math.pi * math.exp(
        (2.0 / N) * (math.lgamma(N / 2.0) - math.lgamma(N))
    )
    if grid is None:
        grid = make_grid(max(N, 5), 240, 40.0, 1.02) if N >= 5 else None
    if grid is not None:
        p = (N - 2) / 2.0
        prof = from_callable(grid, lambda r: (1.0 + r**2) ** (-p), p_tail=N - 2, c_tail=1.0)
        two_star = 2.0 * N / (N - 2.0)
        rayleigh = dirichlet_seminorm(prof) / lp_norm(prof, two_star) ** 2
        if abs(rayleigh - closed) > 1e-3 * closed:
            raise NumericalError(
                f"Sobolev constant cross-check failed: closed={closed}, rayleigh={rayleigh}"
            )
    return closed


# ---------------------------------------------------------------------------
# pointwise angular kernel
# ---------------------------------------------------------------------------

def _kernel_closed_n5a4(r, s):
    """Exact angular average for N = 5, alpha = 4 (vectorized; inf at r = s)."""
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        num = (r**2 + s**2) * np.log((r + s) / np.abs(r - s)) - 2.0 * r * s
        out = math.pi**2 * num / (r**3 * s**3)
    return out


def angular_kernel(alpha: float, r: float, s: float, N: int) -> float:
    """K_alpha(r, s) = int_{S^{N-1}} |r e1 - s w|^(-alpha) dw.

    Finite for r != s; on the diagonal finite only for alpha < N - 1
    (returns inf at the alpha = N - 1 borderline, where the singularity
    is logarithmic and only cell-integrated quantities are finite).
    """
    if r < 0 or s < 0 or (r == 0 and s == 0):
        raise ParameterError("radii must be nonnegative and not both zero")
    if alpha >= N:
        raise ParameterError(f"alpha must be < N for an integrable kernel, got {alpha}")
    if s == 0.0:
        return sphere_area(N) * r ** (-alpha)
    if r == 0.0:
        return sphere_area(N) * s ** (-alpha)
    if r == s and alpha >= N - 1:
        return math.inf
    if N == 5 and alpha == 4:
        return float(_kernel_closed_n5a4(r, s))
    # generic path: t = cos(theta), then t = 1 - u^2 to absorb the near-
    # diagonal singularity; weight (1 - t^2)^((N-3)/2)
    a, b = r * r + s * s, 2.0 * r * s
    pw = (N - 3) / 2.0
    area = sphere_area(N - 1)

    def integrand(u):
        t = 1.0 - u * u
        return 2.0 * u * (1.0 - t * t) ** pw * (a - b * t) ** (-alpha / 2.0)

    val, err = quad(integrand, 0.0, math.sqrt(2.0), limit=200)
    if not np.isfinite(val) or err > 1e-8 * max(abs(val), 1.0):
        raise NumericalError(f"angular kernel quadrature failed at (r={r}, s={s})")
    return area * val


# ---------------------------------------------------------------------------
# quadrature matrices
# ---------------------------------------------------------------------------

def _log_moments(k_max: int, lo: float, hi: float, c: float) -> np.ndarray:
    """I_k = int_lo^hi sigma^k ln|sigma - c| d(sigma), k = 0..k_max.

    Exact for |c| <= 2 via shifted monomial antiderivatives; series in 1/c
    otherwise (the integrand is then analytic on [lo, hi]).
    """
    ks = np.arange(k_max + 1)
    if abs(c) <= 3.0:
        def F(m, x):
            if x == 0.0:
                return 0.0
            return x ** (m + 1) * (math.log(abs(x)) - 1.0 / (m + 1)) / (m + 1)

        base = np.array([F(m, hi - c) - F(m, lo - c) for m in range(k_max + 1)])
        out = np.zeros(k_max + 1)
        for k in ks:
            acc = 0.0
            for m in range(k + 1):
                acc += math.comb(k, m) * c ** (k - m) * base[m]
            out[k] = acc
        return out
    # ln|sigma - c| = ln|c| + ln|1 - sigma/c|, |sigma/c| < 1 on [lo, hi]
    def mono(m):
        return (hi ** (m + 1) - lo ** (m + 1)) / (m + 1)

    out = np.array([math.log(abs(c)) * mono(k) for k in ks])
    for m in range(1, 121):
        coef = 1.0 / (m * c**m)
        for k in ks:
            out[k] -= coef * mono(k + m)
        if abs(coef) < 1e-18:
            break
    return out


def _plain_moments(k_max: int, lo: float, hi: float) -> np.ndarray:
    ks = np.arange(k_max + 1)
    return (hi ** (ks + 1) - lo ** (ks + 1)) / (ks + 1)


def _near_cell_weights(grid: RadialGrid, i: int, cell: int) -> np.ndarray:
    """Exact weights for int_cell K(r_i, s) s^{N-1} f(s) ds (N=5, alpha=4).

    f is replaced by its Lagrange interpolant on the cell's own nodes; the
    kernel factor splits into low-degree polynomials times ln(s + r_i),
    ln|s - r_i| and 1, all of whose moments are exact.
    """
    ri = grid.r[i]
    mask = grid.node_cell == cell
    s_nodes = grid.r[mask]
    q = len(s_nodes)
    lo_e, hi_e = grid.edges[cell], grid.edges[cell + 1]
    mid, h = 0.5 * (hi_e + lo_e), 0.5 * (hi_e - lo_e)
    sig = (s_nodes - mid) / h

    V = np.vander(sig, q, increasing=True)
    Linv = np.linalg.inv(V)  # column j = monomial coeffs of Lagrange basis j

    # P(r,s) s^4 = pi^2 (r^2 s + s^3) / r^3  and  Q(r,s) s^4 = -2 pi^2 s^2 / r^2
    # expanded in sigma with s = mid + h sigma
    def shift_poly(coeffs_s):
        deg = len(coeffs_s) - 1
        out = np.zeros(deg + 1)
        for n, cn in enumerate(coeffs_s):
            if cn == 0.0:
                continue
            for m in range(n + 1):
                out[m] += cn * math.comb(n, m) * mid ** (n - m) * h**m
        return out

    Ppoly = shift_poly(np.array([0.0, math.pi**2 * ri**2, 0.0, math.pi**2]) / ri**3)
    Qpoly = shift_poly(np.array([0.0, 0.0, -2.0 * math.pi**2]) / ri**2)

    k_max = (q - 1) + 3
    sigma_i = (ri - mid) / h
    sigma_plus = -(ri + mid) / h  # ln(s + r_i) = ln h + ln|sigma - sigma_plus|
    lo, hi = -1.0, 1.0
    mom_log_minus = _log_moments(k_max, lo, hi, sigma_i)
    mom_log_plus = _log_moments(k_max, lo, hi, sigma_plus)
    mom_plain = _plain_moments(k_max, lo, hi)

    weights = np.zeros(q)
    for j in range(q):
        lag = Linv[:, j]
        PL = np.polynomial.polynomial.polymul(Ppoly, lag)
        QL = np.polynomial.polynomial.polymul(Qpoly, lag)
        kP = len(PL)
        kQ = len(QL)
        # ln h terms cancel between ln(s + r_i) and ln|s - r_i|
        val = PL @ (mom_log_plus[:kP] - mom_log_minus[:kP]) + QL @ mom_plain[:kQ]
        weights[j] = h * val
    return weights


def _build_conv_matrix(grid: RadialGrid, alpha: float) -> np.ndarray:
    """Matrix C with (C f)_i ~ int K_alpha(r_i, s) s^{N-1} f(s) ds."""
    r = grid.r
    N = grid.N
    if N == 5 and alpha == 4.0:
        K = _kernel_closed_n5a4(r[:, None], r[None, :])
        np.fill_diagonal(K, 0.0)
        C = K * (grid.w1 * r ** (N - 1))[None, :]
        n_cells = len(grid.edges) - 1
        for i in range(grid.M):
            ci = int(grid.node_cell[i])
            for cell in range(max(0, ci - _NEAR_CELL_REACH),
                              min(n_cells, ci + _NEAR_CELL_REACH + 1)):
                cols = np.flatnonzero(grid.node_cell == cell)
                C[i, cols] = _near_cell_weights(grid, i, cell)
        return C
    if alpha >= N - 1:
        raise ParameterError(
            f"kernel tables require alpha < N - 1 away from the critical pair "
            f"(N=5, alpha=4); got N={N}, alpha={alpha}"
        )
    # regular diagonal: fixed high-order rule in the u = sqrt(1 - t) variable
    K = _kernel_table_generic(N, alpha, r, r)
    return K * (grid.w1 * r ** (N - 1))[None, :]


def _kernel_table_generic(N: int, alpha: float, r: np.ndarray, s: np.ndarray) -> np.ndarray:
    """K_alpha on an r x s product, for alpha < N - 1 (integrable diagonal).

    Accumulated node by node so peak memory stays at one (len(r), len(s))
    block.
    """
    u, wu = np.polynomial.legendre.leggauss(96)
    u = 0.5 * math.sqrt(2.0) * (u + 1.0)
    wu = 0.5 * math.sqrt(2.0) * wu
    t = 1.0 - u * u
    pw = (N - 3) / 2.0
    ang_w = 2.0 * u * (1.0 - t * t) ** pw * wu * sphere_area(N - 1)
    a = r[:, None] ** 2 + s[None, :] ** 2
    b = 2.0 * r[:, None] * s[None, :]
    K = np.zeros_like(a)
    for tk, wk in zip(t, ang_w):
        K += wk * (a - b * tk) ** (-alpha / 2.0)
    return K


@dataclass(frozen=True, eq=False)
class AngularKernel:
    """Cached angular-kernel quadrature for one grid and one exponent.

    C is the row-form convolution matrix (pointwise accurate everywhere);
    E = sym(W C) is the energy matrix used for double energies, symmetric by
    construction.  Dividing E back by the tiny volume weights near r = 0
    would amplify the symmetrization residue, hence the two matrices.
    """

    alpha: float
    N: int
    grid: RadialGrid
    K: np.ndarray        # raw kernel table (diagonal inf at alpha = N - 1)
    C: np.ndarray        # nodal convolution weights
    energy: np.ndarray   # symmetric matrix E with D_alpha(f, g) = f^T E g

    def convolve_values(self, values: np.ndarray) -> np.ndarray:
        return self.C @ values


def kernel_for(grid: RadialGrid, alpha: float = 4.0) -> AngularKernel:
    """Build (or fetch from cache) the kernel tables for a grid.

    Scaled grids reuse their parent's tables: K(cr, cs) = c^(-alpha) K(r, s),
    hence C scales by c^(N - alpha) and E by c^(2N - alpha).
    """
    key = ("kernel", alpha)
    if key in grid._cache:
        return grid._cache[key]
    if grid.parent is not None and key in grid.parent._cache:
        base: AngularKernel = grid.parent._cache[key]
        c = grid.scale_factor / base.grid.scale_factor
        kern = AngularKernel(
            alpha=alpha, N=grid.N, grid=grid,
            K=base.K * c ** (-alpha),
            C=base.C * c ** (grid.N - alpha),
            energy=base.energy * c ** (2 * grid.N - alpha),
        )
        grid._cache[key] = kern
        return kern
    C = _build_conv_matrix(grid, alpha)
    W = grid.w
    WC = W[:, None] * C
    E = 0.5 * (WC + WC.T)
    r = grid.r
    K = _kernel_closed_n5a4(r[:, None], r[None, :]) if (grid.N == 5 and alpha == 4.0) else (
        C / (grid.w1 * r ** (grid.N - 1))[None, :]
    )
    kern = AngularKernel(alpha=alpha, N=grid.N, grid=grid, K=K, C=C, energy=E)
    grid._cache[key] = kern
    if grid.parent is not None and key not in grid.parent._cache:
        # seed the parent so sibling scaled grids can reuse the build
        c = grid.scale_factor / grid.parent.scale_factor
        grid.parent._cache[key] = AngularKernel(
            alpha=alpha, N=grid.N, grid=grid.parent,
            K=kern.K * c**alpha,
            C=kern.C * c ** (alpha - grid.N),
            energy=kern.energy * c ** (alpha - 2 * grid.N),
        )
    return kern


def _tail_in_vector(grid: RadialGrid, alpha: float, p_tail: float, c_tail: float) -> np.ndarray:
    """Contribution of the source tail (s > R) to the convolution at the nodes."""
    N = grid.N
    if p_tail + alpha <= N:
        raise DivergenceError("source tail too slow for the Riesz convolution")
    x, wx = np.polynomial.legendre.leggauss(32)
    x = 0.5 * (x + 1.0)
    wx = 0.5 * wx
    s = grid.R_max / x
    ds = grid.R_max / x**2
    if N == 5 and alpha == 4.0:
        K = _kernel_closed_n5a4(grid.r[:, None], s[None, :])
    else:
        K = _kernel_table_generic(N, alpha, grid.r, s)
    dens = c_tail * s ** (-p_tail) * s ** (N - 1) * ds * wx
    return K @ dens


def riesz_convolve(f: RadialFn, alpha: float = 4.0) -> RadialFn:
    """g = |x|^(-alpha) * f as a RadialFn with far-field tail ||f||_L1 r^(-alpha)."""
    kern = kernel_for(f.grid, alpha)
    vals = kern.convolve_values(f.values)
    if f.c_tail != 0.0 and f.p_tail is not None:
        vals = vals + _tail_in_vector(f.grid, alpha, f.p_tail, f.c_tail)
    mass = integrate(f)
    return RadialFn(f.grid, vals, p_tail=alpha, c_tail=mass)


def _tail_cross(f: RadialFn, g: RadialFn, alpha: float) -> float:
    """Tail contributions to D_alpha(f, g) outside the core-core block."""
    grid = f.grid
    out = 0.0
    if g.c_tail != 0.0 and g.p_tail is not None:
        # core f against tail of g
        tv = _tail_in_vector(grid, alpha, g.p_tail, g.c_tail)
        out += float(grid.w @ (f.values * tv))
    if f.c_tail != 0.0 and f.p_tail is not None:
        # tail of f against the far-field model of conv(g)
        if f.p_tail + alpha <= grid.N:
            raise DivergenceError("tail of the first factor too slow for the double energy")
        mass_g = integrate(g)
        out += (
            grid.omega * f.c_tail * mass_g
            * grid.R_max ** (grid.N - f.p_tail - alpha) / (f.p_tail + alpha - grid.N)
        )
    return out


def double_energy_info(f: RadialFn, g: RadialFn, alpha: float = 4.0):
    """D_alpha(f, g) = int int f(x) g(y) |x-y|^(-alpha), plus tail fraction."""
    if f.grid is not g.grid:
        raise ParameterError("double_energy requires both densities on one grid")
    kern = kernel_for(f.grid, alpha)
    core = float(f.values @ (kern.energy @ g.values))
    tails = 0.5 * (_tail_cross(f, g, alpha) + _tail_cross(g, f, alpha))
    total = core + tails
    frac = abs(tails) / abs(total) if total != 0.0 else 0.0
    return total, frac


def double_energy(f: RadialFn, g: RadialFn, alpha: float = 4.0) -> float:
    return double_energy_info(f, g, alpha)[0]


# ---------------------------------------------------------------------------
# constants table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantsTable:
    """Grid-independent constants of the critical problem in dimension N."""

    N: int
    hls: float          # C(N, 4)
    sobolev: float      # best Sobolev constant S
    s_hl: float         # S_HL = C(N,4)^(-1/2) S
    bubble_norm: float  # amplitude making the standard profile solve the limit equation
    sphere: float       # |S^{N-1}|

    @property
    def s_hl_sq(self) -> float:
        return self.s_hl**2

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "hls_constant": self.hls,
            "sobolev_constant": self.sobolev,
            "s_hl": self.s_hl,
            "s_hl_squared": self.s_hl_sq,
            "bubble_normalization": self.bubble_norm,
            "sphere_area": self.sphere,
        }
