"""Energy functionals, Nehari projections, barycenter maps, and residuals.

The functional of the coupled system on pairs (u, v) is

    I(u, v) = 1/2 int |grad u|^2 + |grad v|^2 + (V1 + lam1) u^2 + (V2 + lam2) v^2
            - 1/4 [ mu1 D(u+^2, u+^2) + 2 beta D(u+^2, v+^2) + mu2 D(v+^2, v+^2) ],

with D the Riesz double energy at exponent 4 and u+ the positive part.  On
the Nehari set (kinetic + potential = nonlocal sum) the value reduces to a
quarter of the quadratic part, which is what every level computation here
exploits.

Weak pairings are evaluated through the nodal residual field
R_u = (A u + W ((V1 + lam1) u - RHS_u)) / W, so that discrete critical
points have machine-zero residuals by construction and discretized
continuum solutions expose only their truncation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .bubbles import CouplingConstants, TrialProfile
from .errors import DivergenceError, ParameterError, ProjectionError
from .grids import (
    OffsetFn,
    Pair,
    RadialFn,
    RadialGrid,
    _tail_integral,
    axis_moment_integrals,
    bicenter_integral,
    dirichlet_seminorm,
    from_callable,
    integrate,
    lp_norm,
    make_grid,
)
from .riesz import double_energy, kernel_for

__all__ = [
    "Problem",
    "EnergyBreakdown",
    "energy_I",
    "energy_I_infty",
    "energy_I0",
    "nehari_project",
    "trial_projection_scalars",
    "barycenter",
    "barycenter_axis_sign",
    "pohozaev_residual",
    "weak_residual",
    "residual_fields",
    "default_test_set",
    "mollified_bump",
]


@dataclass(frozen=True)
class Problem:
    """Parameters of the coupled system: couplings, mass shifts, potentials."""

    N: int
    mu1: float
    mu2: float
    beta: float
    lam1: float = 0.0
    lam2: float = 0.0
    V1: RadialFn | None = None
    V2: RadialFn | None = None

    def __post_init__(self):
        if self.mu1 <= 0 or self.mu2 <= 0:
            raise ParameterError("mu1, mu2 must be positive")
        if self.lam1 < 0 or self.lam2 < 0:
            raise ParameterError("lam1, lam2 must be nonnegative")
        for tag, V in (("V1", self.V1), ("V2", self.V2)):
            if V is None:
                continue
            if np.any(V.values < 0) or V.c_tail < 0:
                raise ParameterError(f"{tag} must be nonnegative")
            lp_norm(V, self.N / 2.0)  # raises DivergenceError if not L^{N/2}

    @property
    def lam(self) -> float:
        return max(self.lam1, self.lam2)

    def with_lambda(self, lam1: float, lam2: float) -> "Problem":
        return replace(self, lam1=lam1, lam2=lam2)

    def potential(self, j: int) -> RadialFn | None:
        return self.V1 if j == 1 else self.V2

    def potential_norms(self) -> tuple[float, float]:
        n1 = lp_norm(self.V1, self.N / 2.0) if self.V1 is not None else 0.0
        n2 = lp_norm(self.V2, self.N / 2.0) if self.V2 is not None else 0.0
        return n1, n2


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float       # int |grad u|^2 + |grad v|^2
    potential: float     # int (V1 + lam1) u^2 + (V2 + lam2) v^2
    nonlocal_11: float   # mu1 D(u+^2, u+^2)
    nonlocal_22: float   # mu2 D(v+^2, v+^2)
    nonlocal_12: float   # 2 beta D(u+^2, v+^2)

    @property
    def nonlocal_sum(self) -> float:
        return self.nonlocal_11 + self.nonlocal_22 + self.nonlocal_12

    @property
    def total(self) -> float:
        return 0.5 * (self.kinetic + self.potential) - 0.25 * self.nonlocal_sum

    @property
    def defect(self) -> float:
        """Nehari defect <I'(u,v), (u,v)>."""
        return (self.kinetic + self.potential) - self.nonlocal_sum

    def to_dict(self) -> dict:
        return {
            "kinetic": self.kinetic,
            "potential": self.potential,
            "nonlocal_11": self.nonlocal_11,
            "nonlocal_22": self.nonlocal_22,
            "nonlocal_12": self.nonlocal_12,
            "total": self.total,
            "nehari_defect": self.defect,
        }


def _potential_term(V: RadialFn | None, lam: float, comp, rho: float) -> float:
    """int (V + lam) comp^2 for a radial or offset component."""
    out = 0.0
    sq = comp.squared()
    if lam > 0.0:
        if sq.c_tail != 0.0 and sq.p_tail is not None and sq.p_tail <= comp.grid.N:
            raise DivergenceError("component lacks the L^2 decay required when lam > 0")
        out += lam * integrate(sq)
    if V is not None:
        if rho == 0.0:
            if V.grid is comp.grid:
                out += integrate(V * sq)
            else:
                out += integrate(V.resample(comp.grid) * sq)
        else:
            out += bicenter_integral(V, sq, rho)
    return out


def energy_I(p: Pair, prob: Problem) -> EnergyBreakdown:
    """Full breakdown of the coupled functional at a pair."""
    u, v = p.components()
    rho = p.offset
    kinetic = dirichlet_seminorm(u) + dirichlet_seminorm(v)
    potential = _potential_term(prob.V1, prob.lam1, u, rho) + _potential_term(
        prob.V2, prob.lam2, v, rho
    )
    up2 = u.positive().squared()
    vp2 = v.positive().squared()
    return EnergyBreakdown(
        kinetic=kinetic,
        potential=potential,
        nonlocal_11=prob.mu1 * double_energy(up2, up2),
        nonlocal_22=prob.mu2 * double_energy(vp2, vp2),
        nonlocal_12=2.0 * prob.beta * double_energy(up2, vp2),
    )


def energy_I_infty(p: Pair, cc: CouplingConstants) -> EnergyBreakdown:
    """Limit functional: no potentials, no mass shifts."""
    prob = Problem(N=p.grid.N, mu1=cc.mu1, mu2=cc.mu2, beta=cc.beta)
    return energy_I(p, prob)


def energy_I0(p: Pair, prob: Problem) -> EnergyBreakdown:
    """Functional with potentials kept but both mass shifts set to zero."""
    return energy_I(p, prob.with_lambda(0.0, 0.0))


def nehari_project(p: Pair, prob: Problem):
    """Unique t > 0 with t * p on the Nehari set of `prob`.

    t^2 = (kinetic + potential) / (nonlocal sum); the projected pair has
    zero defect up to roundoff by construction.
    """
    br = energy_I(p, prob)
    if br.nonlocal_sum <= 0.0:
        raise ProjectionError("pair has vanishing positive part; projection undefined")
    t = math.sqrt((br.kinetic + br.potential) / br.nonlocal_sum)
    return t, p.scale(t)


def trial_projection_scalars(profile: TrialProfile, delta: float, rho: float,
                             prob: Problem, cc: CouplingConstants):
    """Ray scalings t0 (no mass shifts) and t_lam (with them) of a trial member.

    Both follow from the profile's certified energy equality and the exact
    dilation covariances: the Dirichlet and double energies of every member
    equal the profile's, and the L^2 mass scales as delta^2.
    """
    member = profile.member(delta, rho)
    E = profile.energy
    ksum = cc.k_sum
    sq = member.profile.squared()
    P = 0.0
    for k, V in ((cc.k1, prob.V1), (cc.k2, prob.V2)):
        if V is not None:
            P += k * bicenter_integral(V, sq, rho)
    lam_term = (cc.k1 * prob.lam1 + cc.k2 * prob.lam2) * delta**2 * profile.l2_mass
    t0 = math.sqrt(1.0 + P / (ksum * E))
    t_lam = math.sqrt(1.0 + (P + lam_term) / (ksum * E))
    return t0, t_lam


# ---------------------------------------------------------------------------
# barycenter and concentration maps
# ---------------------------------------------------------------------------

def _pair_density(p: Pair, mu1: float, mu2: float, beta: float) -> RadialFn:
    """Radial profile of mu1 (u+)^{2*} + 2 beta (u+ v+)^{2*/2} + mu2 (v+)^{2*}."""
    u, v = p.components()
    N = p.grid.N
    two_star = 2.0 * N / (N - 2.0)
    up = u.positive().power(two_star)
    vp = v.positive().power(two_star)
    cross = u.positive().power(two_star / 2.0) * v.positive().power(two_star / 2.0)
    return mu1 * up + 2.0 * beta * cross + mu2 * vp


def barycenter(p: Pair, mu1: float = 1.0, mu2: float = 1.0, beta: float = 1.0):
    """Barycenter axial component xi and concentration gamma of a pair.

    Both maps weigh the critical-density combination of the positive parts;
    they are invariant under positive scalar multiples of the pair.  For
    centered pairs xi = 0 exactly by symmetry.
    """
    dens = _pair_density(p, mu1, mu2, beta)
    rho = p.offset
    grid = dens.grid
    if np.all(dens.values == 0.0) and dens.c_tail == 0.0:
        raise ProjectionError("zero critical density; barycenter undefined")
    if rho == 0.0:
        mass = integrate(dens)
        weight = grid.r / (1.0 + grid.r)
        # tail weight ~ 1 at large radii
        spread = float(grid.w @ (dens.values * weight)) + _tail_integral(dens)
        return 0.0, spread / mass
    # axis_moment_integrals consumes a profile h and weighs |h|^{2*}; feed the
    # combined density through its 1/2* root (exact for the nonnegative density)
    carrier = OffsetFn(dens.power((grid.N - 2.0) / (2.0 * grid.N)), rho)
    mass, axial, _ = axis_moment_integrals(carrier, 0.0)
    xi = axial / mass
    _, _, spread = axis_moment_integrals(carrier, xi)
    return xi, spread / mass


def barycenter_axis_sign(profile: TrialProfile, delta: float, rho: float) -> float:
    """<xi | y> for the proportional trial pair at the member (delta, rho); must be > 0."""
    if rho <= 0:
        raise ParameterError("axis sign is defined only for rho > 0")
    member = profile.member(delta, rho)
    mass, axial, _ = axis_moment_integrals(member, 0.0)
    return (axial / mass) * rho


# ---------------------------------------------------------------------------
# identities and residuals
# ---------------------------------------------------------------------------

def pohozaev_residual(p: Pair, prob: Problem):
    """Dilation-identity residual for the V = 0 system.

    Returns (lambda_mass, identity_gap) with
      lambda_mass = int lam1 u^2 + lam2 v^2,
      identity_gap = |(N-2)/2 (K - NL) + N/2 lambda_mass| / scale.
    Solutions of the V = 0 system satisfy both the weak identity K + L = NL
    and the dilation identity, which forces lambda_mass = 0.
    """
    if prob.V1 is not None or prob.V2 is not None:
        raise ParameterError("dilation identity is implemented for V = 0 problems only")
    u, v = p.components()
    N = prob.N
    K = dirichlet_seminorm(u) + dirichlet_seminorm(v)
    if K == 0.0:
        return 0.0, 0.0
    lam_mass = 0.0
    if prob.lam1 > 0:
        lam_mass += prob.lam1 * integrate(u.squared())
    if prob.lam2 > 0:
        lam_mass += prob.lam2 * integrate(v.squared())
    u2 = u.positive().squared()
    v2 = v.positive().squared()
    NL = (
        prob.mu1 * double_energy(u2, u2)
        + prob.mu2 * double_energy(v2, v2)
        + 2.0 * prob.beta * double_energy(u2, v2)
    )
    gap = abs(0.5 * (N - 2) * (K - NL) + 0.5 * N * lam_mass)
    scale = 0.5 * (N - 2) * max(K, NL) + 0.5 * N * lam_mass
    return lam_mass, gap / scale


def _nodal_potential(V, grid):
    if V is None:
        return 0.0
    return V.values if V.grid is grid else V(grid.r)


def _strong_laplacian(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    """Pointwise radial Laplacian u'' + (N-1) u'/r via direct collocation stencils."""
    return grid.laplacian_matrix() @ values


def residual_fields(p: Pair, prob: Problem, strong: bool = False):
    """Nodal residuals (R_u, R_v) of the coupled system at a centered pair.

    Default uses the quadratic-form row (A u) / W, whose pairings against
    nodal test vectors vanish identically at discrete critical points; the
    entries are meaningful only under the volume weights.  strong=True swaps
    in the pointwise Laplacian, giving a field that can be interpolated and
    integrated against translated test functions.
    """
    if p.offset != 0.0:
        raise ParameterError("residual fields are defined for centered pairs")
    u, v = p.components()
    grid = u.grid
    W = grid.w
    kern = kernel_for(grid, 4.0)
    up = u.positive()
    vp = v.positive()
    conv_u2 = kern.convolve_values(up.squared().values)
    conv_v2 = kern.convolve_values(vp.squared().values)
    rhs_u = prob.mu1 * conv_u2 * up.values + prob.beta * conv_v2 * up.values
    rhs_v = prob.mu2 * conv_v2 * vp.values + prob.beta * conv_u2 * vp.values
    if strong:
        lap_u = -_strong_laplacian(grid, u.values)
        lap_v = -_strong_laplacian(grid, v.values)
    else:
        A = grid.stiffness()
        lap_u = (A @ u.values) / W
        lap_v = (A @ v.values) / W
    res_u = lap_u + (_nodal_potential(prob.V1, grid) + prob.lam1) * u.values - rhs_u
    res_v = lap_v + (_nodal_potential(prob.V2, grid) + prob.lam2) * v.values - rhs_v
    return RadialFn(grid, res_u), RadialFn(grid, res_v)


def mollified_bump(grid: RadialGrid, scale: float) -> RadialFn:
    """Smooth compactly supported bump of unit height and the given support radius."""
    def f(r):
        x = np.asarray(r, float) / scale
        out = np.zeros_like(x)
        inside = x < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
        return out
    return from_callable(grid, f)


def default_test_set(grid: RadialGrid, n_scales: int = 7) -> list:
    """Mollified bumps at log-spaced scales and offsets 0, 1, 5 (20 functions)."""
    scales = np.geomspace(0.05, 20.0, n_scales)
    out = []
    for s in scales:
        own = make_grid(grid.N, 80, float(s), 1.0)
        prof = mollified_bump(own, float(s))
        for rho in (0.0, 1.0, 5.0):
            if len(out) >= 20:
                break
            out.append(OffsetFn(prof, rho))
    return out[:20]


def weak_residual(p: Pair, prob: Problem, test_set: list | None = None) -> float:
    """Relative dual-norm estimate of I'(p) over a mollified-bump test set.

    Each test bump phi enters as (phi, 0) and (0, phi).  Pairings integrate
    the pointwise residual field against phi on the bump's own grid (through
    the translated-overlap quadrature when the bump is offset) and are
    normalized by ||phi|| ||p|| in the lam-weighted norm.
    """
    if test_set is None:
        test_set = default_test_set(p.grid)
    res_u_s, res_v_s = residual_fields(p, prob, strong=True)
    u, v = p.components()

    norm_p_sq = dirichlet_seminorm(u) + dirichlet_seminorm(v)
    if prob.lam1 > 0:
        norm_p_sq += prob.lam1 * integrate(u.squared())
    if prob.lam2 > 0:
        norm_p_sq += prob.lam2 * integrate(v.squared())
    if norm_p_sq == 0.0:
        return 0.0
    norm_p = math.sqrt(norm_p_sq)

    worst = 0.0
    for phi in test_set:
        pair_u = bicenter_integral(res_u_s, phi.profile, phi.rho)
        pair_v = bicenter_integral(res_v_s, phi.profile, phi.rho)
        base = dirichlet_seminorm(phi.profile)
        mass = integrate(phi.profile.squared())
        nrm1 = math.sqrt(base + prob.lam1 * mass)
        nrm2 = math.sqrt(base + prob.lam2 * mass)
        for val, nrm in ((pair_u, nrm1), (pair_v, nrm2)):
            if nrm > 0:
                worst = max(worst, abs(val) / (nrm * norm_p))
    return worst
