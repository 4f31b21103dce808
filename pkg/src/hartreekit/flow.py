"""Ground-state flows and sequence bookkeeping checks.

The limit system has no potentials; restricted to its Nehari set the
functional equals a quarter of the Dirichlet norm, so the coupled ground
state is the constrained minimizer and projected descent is the natural
solver.  Each step preconditions the gradient with the (pinned) stiffness
matrix, clamps negative values, rescales back onto the Nehari set, and
backtracks on the energy.  The dilation zero mode is re-gauged to unit
scale every few dozen iterations so the iterate cannot drift below grid
resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .bubbles import CouplingConstants, make_bubble
from .energy import Problem, weak_residual
from .errors import ParameterError
from .grids import (
    Pair,
    RadialFn,
    RadialGrid,
    dirichlet_seminorm,
    integrate,
    make_grid,
)
from .riesz import double_energy, kernel_for

__all__ = [
    "FlowConfig",
    "FlowDiagnostics",
    "solve_limit_ground_state",
    "solve_scalar_choquard",
    "vanishing_energy_limit",
    "brezis_lieb_check",
]


@dataclass(frozen=True)
class FlowConfig:
    step_size: float = 1.0
    max_iterations: int = 5000
    residual_tolerance: float = 1e-3
    project_every: int = 1
    recenter_every: int = 50
    check_every: int = 25
    start: str = "gaussian"   # gaussian | bubble
    start_widths: tuple = (1.0, 1.2)
    start_amplitudes: tuple = (1.0, 0.8)

    def __post_init__(self):
        if self.step_size <= 0:
            raise ParameterError("step size must be positive")
        if self.residual_tolerance <= 0:
            raise ParameterError("residual tolerance must be positive")


@dataclass
class FlowDiagnostics:
    trace: list = field(default_factory=list)   # (iteration, energy, defect, residual)
    final: Pair | None = None
    verdict: str = "budget exhausted"
    iterations: int = 0
    energy: float = math.nan
    residual: float = math.nan
    fitted_delta: float = math.nan
    amplitude_ratio: float = math.nan
    shape_error: float = math.nan
    clamped_mass: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.verdict == "converged"

    def trace_csv(self, path):
        from .reporting import Table

        t = Table("trace", ["iteration", "energy", "nehari_defect", "weak_residual"])
        for row in self.trace:
            t.add(iteration=row[0], energy=row[1], nehari_defect=row[2], weak_residual=row[3])
        t.to_csv(path)


def _pinned_solver(grid: RadialGrid):
    """Solve -Lap g = rhs with the outermost node pinned to zero.

    Uses the collocation Laplacian (direct second-derivative stencils), whose
    LU factorization is cached on the grid.  The fixed point of the Picard
    map then satisfies the same strong-form operator that the residual field
    is built from, so converged flows report near-machine residuals.
    """
    key = "laplacian_lu"
    if key not in grid._cache:
        L = -grid.laplacian_matrix().copy()
        L[-1, :] = 0.0
        L[-1, -1] = 1.0
        grid._cache[key] = lu_factor(L)
    fac = grid._cache[key]

    def solve(rhs):
        b = rhs.copy()
        b[-1] = 0.0
        return lu_solve(fac, b)

    return solve


def _half_height_scale(grid: RadialGrid, values: np.ndarray) -> float:
    """Dilation estimate: radius where the profile falls to 2^-((N-2)/2) of its peak."""
    peak = values.max()
    if peak <= 0:
        return math.nan
    level = peak * 2.0 ** (-(grid.N - 2) / 2.0)
    below = np.flatnonzero(values < level)
    if len(below) == 0 or below[0] == 0:
        return math.nan
    j = below[0]
    x0, x1 = grid.r[j - 1], grid.r[j]
    y0, y1 = values[j - 1], values[j]
    return float(x0 + (level - y0) * (x1 - x0) / (y1 - y0))


def _fit_bubble_dilation(grid: RadialGrid, values: np.ndarray, amplitude: float):
    """Best dilation matching `values` to amplitude * standard bubble shape.

    Golden-section on the weighted misfit around the half-height estimate;
    returns (delta_fit, bulk relative error).
    """
    d0 = _half_height_scale(grid, values)
    if not np.isfinite(d0):
        return math.nan, math.nan
    cn = make_bubble(1.0, 0.0, grid.N).c_N
    p = (grid.N - 2) / 2.0
    bulk = values > 0.01 * values.max()
    w = grid.w[bulk]

    def misfit(d):
        model = amplitude * cn * (d / (d**2 + grid.r[bulk] ** 2)) ** p
        return float(w @ (values[bulk] - model) ** 2)

    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = d0 / 1.5, d0 * 1.5
    c1, c2 = b - phi * (b - a), a + phi * (b - a)
    for _ in range(80):
        if misfit(c1) < misfit(c2):
            b, c2 = c2, c1
            c1 = b - phi * (b - a)
        else:
            a, c1 = c1, c2
            c2 = a + phi * (b - a)
    d_fit = 0.5 * (a + b)
    model = amplitude * cn * (d_fit / (d_fit**2 + grid.r[bulk] ** 2)) ** p
    err = float(np.max(np.abs(values[bulk] - model)) / values.max())
    return d_fit, err


def _rescale_profile(grid: RadialGrid, values: np.ndarray, scale: float) -> np.ndarray:
    """values(r) -> scale^((N-2)/2) values(scale r), power-law beyond the grid."""
    f = RadialFn(grid, values)
    r_out = grid.r * scale
    out = np.empty_like(values)
    inside = r_out <= grid.R_max
    out[inside] = f(r_out[inside])
    if (~inside).any():
        # fit the decay amplitude from the outermost decade
        sel = grid.r > 0.5 * grid.R_max
        c = float(np.mean(values[sel] * grid.r[sel] ** (grid.N - 2)))
        out[~inside] = c * r_out[~inside] ** (-(grid.N - 2))
    return out * scale ** ((grid.N - 2) / 2.0)


def _limit_problem(cc: CouplingConstants, N: int) -> Problem:
    return Problem(N=N, mu1=cc.mu1, mu2=cc.mu2, beta=cc.beta)


def solve_limit_ground_state(cc: CouplingConstants, cfg: FlowConfig,
                             grid: RadialGrid | None = None) -> FlowDiagnostics:
    """Projected descent for the coupled limit ground state."""
    if grid is None:
        from .bubbles import default_grid

        grid = default_grid(5)
    N = grid.N
    kern = kernel_for(grid, 4.0)
    A = grid.stiffness()
    W = grid.w
    solve = _pinned_solver(grid)
    prob = _limit_problem(cc, N)

    if cfg.start == "bubble":
        b = make_bubble(1.0, 0.0, N)
        u = math.sqrt(cc.k1) * b(grid.r)
        v = math.sqrt(cc.k2) * b(grid.r)
    else:
        w1, w2 = cfg.start_widths
        a1, a2 = cfg.start_amplitudes
        u = a1 * np.exp(-(grid.r / w1) ** 2)
        v = a2 * np.exp(-(grid.r / w2) ** 2)

    def nonlocal_sum(uu, vv):
        u2 = np.clip(uu, 0, None) ** 2
        v2 = np.clip(vv, 0, None) ** 2
        E = kern.energy
        return (cc.mu1 * (u2 @ (E @ u2)) + cc.mu2 * (v2 @ (E @ v2))
                + 2.0 * cc.beta * (u2 @ (E @ v2)))

    def ray_energy(uu, vv):
        """Value of the functional at the Nehari representative of the ray:
        1/4 K^2 / NL, invariant under positive rescaling of the pair."""
        K = float(uu @ (A @ uu) + vv @ (A @ vv))
        NL = nonlocal_sum(uu, vv)
        if NL <= 0:
            raise ParameterError("pair has vanishing positive parts")
        return 0.25 * K * K / NL

    def project(uu, vv):
        K = float(uu @ (A @ uu) + vv @ (A @ vv))
        NL = nonlocal_sum(uu, vv)
        if NL <= 0:
            raise ParameterError("pair has vanishing positive parts")
        t = math.sqrt(K / NL)
        return t * uu, t * vv, t**4 * 0.25 * NL  # on-manifold energy = K/4

    u, v, energy = project(u, v)
    diag = FlowDiagnostics()
    tau = cfg.step_size
    residual = math.inf
    it = 0

    for it in range(1, cfg.max_iterations + 1):
        up = np.clip(u, 0, None)
        vp = np.clip(v, 0, None)
        conv_u2 = kern.convolve_values(up**2)
        conv_v2 = kern.convolve_values(vp**2)
        rhs_u = (cc.mu1 * conv_u2 + cc.beta * conv_v2) * up
        rhs_v = (cc.mu2 * conv_v2 + cc.beta * conv_u2) * vp
        pic_u = solve(rhs_u)
        pic_v = solve(rhs_v)

        do_project = it % cfg.project_every == 0
        accepted = False
        for _ in range(40):
            cu = (1.0 - tau) * u + tau * pic_u
            cv = (1.0 - tau) * v + tau * pic_v
            clamped = float(W @ np.clip(cu, None, 0) ** 2 + W @ np.clip(cv, None, 0) ** 2)
            cu = np.clip(cu, 0, None)
            cv = np.clip(cv, 0, None)
            try:
                if do_project:
                    cu, cv, cand_energy = project(cu, cv)
                else:
                    cand_energy = ray_energy(cu, cv)
            except ParameterError:
                tau *= 0.5
                continue
            if cand_energy <= energy * (1.0 + 1e-12):
                accepted = True
                break
            tau *= 0.5
        if not accepted:
            diag.verdict = "stalled line search"
            break
        u, v, energy = cu, cv, cand_energy
        diag.clamped_mass.append(clamped)
        tau = min(cfg.step_size, tau * 1.3)

        if it % cfg.recenter_every == 0:
            d_hat = _half_height_scale(grid, u)
            if np.isfinite(d_hat) and abs(d_hat - 1.0) > 0.2:
                u = _rescale_profile(grid, u, d_hat)
                v = _rescale_profile(grid, v, d_hat)
                u, v, energy = project(u, v)

        if it % cfg.check_every == 0 or it == cfg.max_iterations:
            pair = Pair(RadialFn(grid, u), RadialFn(grid, v))
            residual = weak_residual(pair, prob)
            K = float(u @ (A @ u) + v @ (A @ v))
            defect = (K - nonlocal_sum(u, v)) / max(K, 1e-300)
            diag.trace.append((it, energy, defect, residual))
            ku = float(u @ (A @ u))
            kv = float(v @ (A @ v))
            if min(ku, kv) < 1e-12 * max(ku, kv):
                diag.verdict = "semi-trivial attractor"
                break
            if residual < cfg.residual_tolerance:
                diag.verdict = "converged"
                break

    diag.iterations = it
    diag.residual = residual
    c_fit = float(np.mean(u[grid.r > 0.5 * grid.R_max]
                          * grid.r[grid.r > 0.5 * grid.R_max] ** (N - 2)))
    fu = RadialFn(grid, u, p_tail=N - 2, c_tail=max(c_fit, 0.0))
    cv_fit = float(np.mean(v[grid.r > 0.5 * grid.R_max]
                           * grid.r[grid.r > 0.5 * grid.R_max] ** (N - 2)))
    fv = RadialFn(grid, v, p_tail=N - 2, c_tail=max(cv_fit, 0.0))
    diag.final = Pair(fu, fv)
    diag.energy = energy

    bulk = u > 0.01 * u.max()
    if bulk.any() and np.all(u[bulk] > 0):
        diag.amplitude_ratio = float(np.median(v[bulk] / u[bulk]))
    diag.fitted_delta, diag.shape_error = _fit_bubble_dilation(
        grid, u, math.sqrt(cc.k1)
    )
    return diag


def solve_scalar_choquard(mu: float, cfg: FlowConfig,
                          grid: RadialGrid | None = None) -> FlowDiagnostics:
    """Ground state of the scalar limit equation; the extremal is mu^(-1/2) times
    the standard bubble and the constrained level is S_HL^2 / (4 mu)."""
    if mu <= 0:
        raise ParameterError("mu must be positive")
    if grid is None:
        from .bubbles import default_grid

        grid = default_grid(5)
    N = grid.N
    kern = kernel_for(grid, 4.0)
    A = grid.stiffness()
    W = grid.w
    solve = _pinned_solver(grid)

    if cfg.start == "bubble":
        u = make_bubble(1.0, 0.0, N)(grid.r) / math.sqrt(mu)
    else:
        u = cfg.start_amplitudes[0] * np.exp(-(grid.r / cfg.start_widths[0]) ** 2)

    def project(uu):
        K = float(uu @ (A @ uu))
        NL = mu * float((np.clip(uu, 0, None) ** 2) @ (kern.energy @ np.clip(uu, 0, None) ** 2))
        if NL <= 0:
            raise ParameterError("start has vanishing positive part")
        t = math.sqrt(K / NL)
        return t * uu, 0.25 * t**2 * K

    u, energy = project(u)
    diag = FlowDiagnostics()
    tau = cfg.step_size
    residual = math.inf
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        up = np.clip(u, 0, None)
        rhs = mu * kern.convolve_values(up**2) * up
        pic = solve(rhs)
        accepted = False
        for _ in range(40):
            cu = np.clip((1.0 - tau) * u + tau * pic, 0, None)
            try:
                cu, cand = project(cu)
            except ParameterError:
                tau *= 0.5
                continue
            if cand <= energy * (1.0 + 1e-12):
                accepted = True
                break
            tau *= 0.5
        if not accepted:
            diag.verdict = "stalled line search"
            break
        u, energy = cu, cand
        tau = min(cfg.step_size, tau * 1.3)

        if it % cfg.recenter_every == 0:
            d_hat = _half_height_scale(grid, u)
            if np.isfinite(d_hat) and abs(d_hat - 1.0) > 0.2:
                u, energy = project(_rescale_profile(grid, u, d_hat))

        if it % cfg.check_every == 0 or it == cfg.max_iterations:
            pair = Pair(RadialFn(grid, u), RadialFn(grid, u))
            residual = _scalar_residual(grid, u, mu, kern)
            diag.trace.append((it, energy, 0.0, residual))
            if residual < cfg.residual_tolerance:
                diag.verdict = "converged"
                break

    diag.iterations = it
    diag.residual = residual
    c_fit = float(np.mean(u[grid.r > 0.5 * grid.R_max]
                          * grid.r[grid.r > 0.5 * grid.R_max] ** (N - 2)))
    diag.final = Pair(RadialFn(grid, u, p_tail=N - 2, c_tail=max(c_fit, 0.0)),
                      RadialFn(grid, np.zeros_like(u)))
    diag.energy = energy
    diag.fitted_delta, diag.shape_error = _fit_bubble_dilation(
        grid, u, 1.0 / math.sqrt(mu)
    )
    return diag


def _scalar_residual(grid, u, mu, kern) -> float:
    """Dual-norm residual of the scalar limit equation over the default bumps."""
    from .energy import default_test_set, _strong_laplacian
    from .grids import bicenter_integral

    up = np.clip(u, 0, None)
    rhs = mu * kern.convolve_values(up**2) * up
    res = RadialFn(grid, -_strong_laplacian(grid, u) - rhs)
    norm_u = math.sqrt(dirichlet_seminorm(RadialFn(grid, u)))
    worst = 0.0
    for phi in default_test_set(grid):
        val = bicenter_integral(res, phi.profile, phi.rho)
        nrm = math.sqrt(dirichlet_seminorm(phi.profile))
        if nrm > 0:
            worst = max(worst, abs(val) / (nrm * norm_u))
    return worst


# ---------------------------------------------------------------------------
# sequence bookkeeping
# ---------------------------------------------------------------------------

def vanishing_energy_limit(prob: Problem, mu_index: int, delta_seq,
                           grid: RadialGrid | None = None):
    """Scalar concentration family mu_j^(-1/2) U_delta: potential mass and
    constrained energy per dilation.

    Each row is computed on the delta-scaled copy of the base grid, so the
    dilation covariances (L^2 mass ~ delta^2, Dirichlet and double energies
    constant) hold to machine precision and only the potential term carries
    delta dependence.
    """
    from .reporting import Table

    if mu_index not in (1, 2):
        raise ParameterError("mu_index must be 1 or 2")
    if grid is None:
        from .bubbles import default_grid

        grid = default_grid(5)
    mu = prob.mu1 if mu_index == 1 else prob.mu2
    lam = prob.lam1 if mu_index == 1 else prob.lam2
    V = prob.potential(mu_index)
    N = grid.N
    b1 = make_bubble(1.0, 0.0, N)

    table = Table(
        "vanishing_limits",
        ["delta", "l2_mass", "lambda_mass", "potential_mass", "t_n", "energy"],
    )
    for d in delta_seq:
        gd = grid.scaled(float(d))
        prof = make_bubble(float(d), 0.0, N).profile_on(gd) * (1.0 / math.sqrt(mu))
        sq = prof.squared()
        l2 = integrate(sq)
        lam_mass = lam * l2
        pot = lam_mass
        if V is not None:
            pot += integrate(V.resample(gd) * sq)
        K = dirichlet_seminorm(prof)
        D = double_energy(sq, sq)
        t_sq = (K + pot) / (mu * D)
        energy = 0.25 * t_sq * (K + pot)
        table.add(delta=float(d), l2_mass=l2, lambda_mass=lam_mass,
                  potential_mass=pot, t_n=math.sqrt(t_sq), energy=energy)
    return table


def brezis_lieb_check(u0: RadialFn | None, bubble_profile: RadialFn,
                      sigma_seq, offset_seq, fine_grid: RadialGrid | None = None):
    """Splitting error of the nonlocal energy along a concentrating family.

    u_n = u0 + sigma_n^(-(N-2)/2) b(x / sigma_n); the self column reports
    | D(u_n^2, u_n^2) - D((u_n - u0)^2, (u_n - u0)^2) - D(u0^2, u0^2) |
    and the mixed column the analogous quantity for the pair
    (u_n, v_n = u0/2 + bubble).  All three double energies are evaluated
    independently on one fine grid resolving both scales.

    Only centered bubbles are supported: the discretization carries a single
    translation center, and a background plus an offset bubble would need
    two.
    """
    from .reporting import Table

    sigma_seq = list(sigma_seq)
    offset_seq = list(offset_seq)
    if len(sigma_seq) != len(offset_seq):
        raise ParameterError("sigma and offset sequences must have equal length")
    if any(o != 0.0 for o in offset_seq):
        raise ParameterError(
            "nonzero bubble offsets are not representable with a single translation center"
        )
    if fine_grid is None:
        R = bubble_profile.grid.R_max if u0 is None else u0.grid.R_max
        fine_grid = make_grid(bubble_profile.grid.N, 640, R, 1.025)
    g = fine_grid
    N = g.N

    if u0 is None:
        u0f = RadialFn(g, np.zeros(g.M))
    else:
        u0f = u0.resample(g).positive()
    v0f = 0.5 * u0f
    d_u0 = double_energy(u0f.squared(), u0f.squared())
    d_u0v0 = double_energy(u0f.squared(), v0f.squared())

    table = Table(
        "nonlocal_splitting",
        ["sigma", "offset", "self_error", "mixed_error", "d_full", "d_bubble", "d_background"],
    )
    p = (N - 2) / 2.0
    for sig, off in zip(sigma_seq, offset_seq):
        vals = bubble_profile(g.r / sig) * sig ** (-p)
        if bubble_profile.p_tail is not None and bubble_profile.c_tail != 0.0:
            ct = bubble_profile.c_tail * sig ** (bubble_profile.p_tail - p)
            bn = RadialFn(g, vals, p_tail=bubble_profile.p_tail, c_tail=ct)
        else:
            bn = RadialFn(g, vals)
        bn = bn.positive()
        un = (u0f + bn).positive()
        vn = (v0f + bn).positive()
        d_bn = double_energy(bn.squared(), bn.squared())
        d_un = double_energy(un.squared(), un.squared())
        d_mixed = double_energy(un.squared(), vn.squared())
        table.add(
            sigma=float(sig), offset=float(off),
            self_error=abs(d_un - d_bn - d_u0),
            mixed_error=abs(d_mixed - d_bn - d_u0v0),
            d_full=d_un, d_bubble=d_bn, d_background=d_u0,
        )
    return table
