"""Closed-form extremals and trial families.

The limit equation  -Lap u = (|x|^-4 * u^2) u  on R^N is solved by the
one-parameter family

    U_delta(x - z) = C_N (delta / (delta^2 + |x - z|^2))^((N-2)/2),

whose Dirichlet energy and self double-energy both equal S_HL^2.  The
amplitude C_N is pinned numerically through the homogeneity of the equation
(the left side is linear in the amplitude, the right side cubic) and then
certified by a weak-form residual over a mollified-bump test set.

The coupled ground pair is (sqrt(k1) U, sqrt(k2) U) with

    k1 = (beta - mu2) / (beta^2 - mu1 mu2),
    k2 = (beta - mu1) / (beta^2 - mu1 mu2),      beta > max(mu1, mu2).

The trial profile is a boundary-mollified truncation of a concentrated
bubble to the unit ball, rescaled so its Dirichlet energy equals its self
double-energy exactly, then certified to sit in a prescribed energy window
just above the coupled ground level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConstructionError,
    DomainError,
    NumericalError,
    ParameterError,
)
from .grids import (
    OffsetFn,
    Pair,
    RadialFn,
    RadialGrid,
    dirichlet_seminorm,
    from_callable,
    integrate,
    lp_norm,
    make_grid,
)
from .riesz import ConstantsTable, double_energy, hls_constant, sobolev_constant

__all__ = [
    "Bubble",
    "CouplingConstants",
    "TrialProfile",
    "bubble_constant",
    "make_bubble",
    "make_constants_table",
    "coupling_constants",
    "quotient_infimum",
    "ground_pair",
    "make_trial_profile",
    "trial_member",
    "trial_pair",
    "default_grid",
]

_CONSTANT_CACHE: dict = {}
_DEFAULT_GRIDS: dict = {}


def default_grid(N: int = 5, M: int = 400, R_max: float = 40.0,
                 stretch: float = 1.02) -> RadialGrid:
    """The reference computational grid used by the verification harness."""
    key = (N, M, R_max, stretch)
    if key not in _DEFAULT_GRIDS:
        _DEFAULT_GRIDS[key] = make_grid(N, M, R_max, stretch)
    return _DEFAULT_GRIDS[key]


def _unit_profile(grid: RadialGrid) -> RadialFn:
    p = (grid.N - 2) / 2.0
    return from_callable(grid, lambda r: (1.0 + r**2) ** (-p),
                         p_tail=grid.N - 2, c_tail=1.0)


def bubble_constant(N: int, grid: RadialGrid | None = None) -> float:
    """Amplitude C_N of the standard bubble, from the homogeneity relation.

    With u1 the unit-amplitude profile, C_N^2 = ||grad u1||^2 / D_4(u1^2, u1^2);
    any solution with this profile shape must satisfy the ray-stationarity
    identity, and residual certification (see verify module) confirms the
    shape.
    """
    if not (isinstance(N, (int, np.integer)) and N >= 5):
        raise ParameterError(f"N must be an integer >= 5, got {N}")
    if grid is None:
        grid = default_grid(N)
    key = (N, id(grid))
    if key in _CONSTANT_CACHE:
        return _CONSTANT_CACHE[key]
    u1 = _unit_profile(grid)
    num = dirichlet_seminorm(u1)
    den = double_energy(u1.squared(), u1.squared())
    if not (num > 0 and den > 0):
        raise NumericalError("homogeneity relation failed to bracket a positive amplitude")
    c = math.sqrt(num / den)
    _CONSTANT_CACHE[key] = c
    return c


@dataclass(frozen=True)
class Bubble:
    """Extremal U_{delta}(x - z) with |z| = rho, in closed form."""

    delta: float
    rho: float
    N: int
    c_N: float

    def __post_init__(self):
        if self.delta <= 0:
            raise ParameterError(f"dilation must be positive, got {self.delta}")
        if self.rho < 0:
            raise ParameterError(f"offset must be >= 0, got {self.rho}")

    def __call__(self, dist):
        """Evaluate at distance `dist` from the center."""
        d = self.delta
        return self.c_N * (d / (d**2 + np.asarray(dist, float) ** 2)) ** ((self.N - 2) / 2.0)

    def profile_on(self, grid: RadialGrid) -> RadialFn:
        p = (self.N - 2) / 2.0
        return RadialFn(grid, self(grid.r), p_tail=self.N - 2,
                        c_tail=self.c_N * self.delta**p)

    def as_offset(self, grid: RadialGrid) -> OffsetFn:
        return OffsetFn(self.profile_on(grid), self.rho)


def make_bubble(delta: float, rho: float, N: int,
                grid: RadialGrid | None = None) -> Bubble:
    return Bubble(delta=float(delta), rho=float(rho), N=int(N),
                  c_N=bubble_constant(N, grid))


def make_constants_table(N: int = 5, grid: RadialGrid | None = None) -> ConstantsTable:
    S = sobolev_constant(N, grid)
    C = hls_constant(N, 4.0)
    return ConstantsTable(
        N=N,
        hls=C,
        sobolev=S,
        s_hl=S / math.sqrt(C),
        bubble_norm=bubble_constant(N, grid),
        sphere=2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0),
    )


@dataclass(frozen=True)
class CouplingConstants:
    """Amplitudes and energy levels of the coupled limit system."""

    mu1: float
    mu2: float
    beta: float
    k1: float
    k2: float
    c_inf: float       # ground level of the coupled limit system
    m1_inf: float      # scalar limit levels S_HL^2 / (4 mu_j)
    m2_inf: float
    s_hl_sq: float

    @property
    def k_sum(self) -> float:
        return self.k1 + self.k2

    def identity_defect(self) -> float:
        """mu1 k1^2 + mu2 k2^2 + 2 beta k1 k2 - (k1 + k2); zero analytically."""
        return (self.mu1 * self.k1**2 + self.mu2 * self.k2**2
                + 2.0 * self.beta * self.k1 * self.k2) - self.k_sum

    def to_dict(self) -> dict:
        return {
            "mu1": self.mu1, "mu2": self.mu2, "beta": self.beta,
            "k1": self.k1, "k2": self.k2,
            "c_inf": self.c_inf, "m1_inf": self.m1_inf, "m2_inf": self.m2_inf,
        }


def _default_s_hl_sq(N: int = 5) -> float:
    key = ("s_hl_sq", N)
    if key not in _CONSTANT_CACHE:
        _CONSTANT_CACHE[key] = sobolev_constant(N) ** 2 / hls_constant(N, 4.0)
    return _CONSTANT_CACHE[key]


def coupling_constants(mu1: float, mu2: float, beta: float,
                       s_hl_sq: float | None = None) -> CouplingConstants:
    """k1, k2 and the associated energy levels; requires beta > max(mu1, mu2)."""
    if mu1 <= 0 or mu2 <= 0:
        raise ParameterError(f"mu1, mu2 must be positive, got {mu1}, {mu2}")
    if beta <= max(mu1, mu2):
        raise DomainError(
            f"beta must exceed max(mu1, mu2): beta={beta}, max={max(mu1, mu2)}"
        )
    if s_hl_sq is None:
        s_hl_sq = _default_s_hl_sq(5)
    den = beta**2 - mu1 * mu2
    k1 = (beta - mu2) / den
    k2 = (beta - mu1) / den
    return CouplingConstants(
        mu1=mu1, mu2=mu2, beta=beta, k1=k1, k2=k2,
        c_inf=0.25 * (k1 + k2) * s_hl_sq,
        m1_inf=s_hl_sq / (4.0 * mu1),
        m2_inf=s_hl_sq / (4.0 * mu2),
        s_hl_sq=s_hl_sq,
    )


def quotient_infimum(mu1: float, mu2: float, beta: float):
    """inf over t >= 0 of (1 + t)^2 / (mu1 t^2 + 2 beta t + mu2).

    Returns (t_star, value).  Closed-form stationarity gives
    t_star = (beta - mu2)/(beta - mu1); a golden-section refinement over a
    wide bracket confirms the closed form to 1e-10.
    """
    if mu1 <= 0 or mu2 <= 0 or beta <= max(mu1, mu2):
        raise DomainError("requires mu1, mu2 > 0 and beta > max(mu1, mu2)")

    def q(t):
        return (1.0 + t) ** 2 / (mu1 * t**2 + 2.0 * beta * t + mu2)

    t_star = (beta - mu2) / (beta - mu1)
    value = q(t_star)

    ts = np.linspace(0.0, 1000.0, 4001)
    i = int(np.argmin(q(ts)))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)]
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c1, c2 = b - phi * (b - a), a + phi * (b - a)
    for _ in range(200):
        if q(c1) < q(c2):
            b, c2 = c2, c1
            c1 = b - phi * (b - a)
        else:
            a, c1 = c1, c2
            c2 = a + phi * (b - a)
        if b - a < 1e-13 * max(1.0, b):
            break
    t_bf = 0.5 * (a + b)
    if abs(q(t_bf) - value) > 1e-10 * value:
        raise NumericalError(
            f"quotient infimum cross-check failed: closed={value}, brute={q(t_bf)}"
        )
    return t_star, value


def ground_pair(delta: float, rho: float, cc: CouplingConstants,
                grid: RadialGrid) -> Pair:
    """The coupled ground state (sqrt(k1) U_delta, sqrt(k2) U_delta)."""
    b = make_bubble(delta, rho, grid.N)
    prof = b.profile_on(grid)
    if rho == 0.0:
        return Pair(math.sqrt(cc.k1) * prof, math.sqrt(cc.k2) * prof)
    return Pair(
        OffsetFn(math.sqrt(cc.k1) * prof, rho),
        OffsetFn(math.sqrt(cc.k2) * prof, rho),
    )


# ---------------------------------------------------------------------------
# trial profile
# ---------------------------------------------------------------------------

def _smoothstep(x):
    """C^inf step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(x, 0.0, 1.0)
    def f(t):
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = np.exp(-1.0 / t[pos])
        return out
    a = f(x)
    b = f(1.0 - x)
    return a / (a + b)


@dataclass(frozen=True, eq=False)
class TrialProfile:
    """Compactly supported trial profile on the unit ball plus its certificates."""

    profile: RadialFn          # supported in [0, 1], radially nonincreasing
    energy: float              # ||grad||^2 = D_4(profile^2, profile^2), > S_HL^2
    sigma: float               # coupled limit energy of (sqrt(k1), sqrt(k2)) * profile
    l2_mass: float             # int profile^2
    lp_crit: float             # L^{2*} norm
    cc: CouplingConstants
    cbar: float
    inner_scale: float         # dilation of the truncated bubble core
    moll_width: float

    @property
    def grid(self) -> RadialGrid:
        return self.profile.grid

    def member(self, delta: float, rho: float) -> OffsetFn:
        return trial_member(self, delta, rho)

    def to_csv(self, path):
        arr = np.column_stack([self.grid.r, self.profile.values])
        np.savetxt(path, arr, delimiter=",", header="r,value", comments="")


def make_trial_profile(support_fraction: float, cc: CouplingConstants, cbar: float,
                       grid: RadialGrid | None = None, moll_cells: int = 5,
                       max_iter: int = 60) -> TrialProfile:
    """Build the certified trial profile.

    A bubble with inner dilation delta0 is cut off smoothly inside the unit
    ball and rescaled by the unique t > 0 with
    t^2 ||grad||^2 = t^4 D_4, enforcing the energy equality exactly.  delta0
    starts at the value keeping `support_fraction` of the bubble's Dirichlet
    mass inside the ball and shrinks geometrically until the certified
    coupled energy lands inside (c_inf, cbar); the target is the window
    midpoint.
    """
    if not 0.0 < support_fraction < 1.0:
        raise ParameterError("support_fraction must lie in (0, 1)")
    if not cbar > cc.c_inf:
        raise ParameterError(f"cbar={cbar} must exceed c_inf={cc.c_inf}")
    if grid is None:
        grid = make_grid(5, 320, 1.0, 1.0)
    N = grid.N
    w_moll = float(grid.edges[-1] - grid.edges[max(0, len(grid.edges) - 1 - moll_cells)])
    cn = bubble_constant(N)

    # delta0 with the requested Dirichlet fraction inside the unit ball
    def inside_fraction(d0):
        p = (N - 2) / 2.0
        rr = np.linspace(1e-6, 1.0, 2001)
        du = cn * p * (d0**p) * (-2.0 * rr) / (d0**2 + rr**2) ** (p + 1)
        integ = np.trapezoid(du**2 * rr ** (N - 1), rr) * grid.omega
        s_hl_sq = cc.s_hl_sq
        return integ / s_hl_sq

    lo, hi = 1e-4, 1.0
    for _ in range(80):
        mid = math.sqrt(lo * hi)
        if inside_fraction(mid) > support_fraction:
            lo = mid
        else:
            hi = mid
    delta0 = lo

    window = cbar - cc.c_inf
    prefer_hi = cc.c_inf + 0.45 * window   # leaves over half the window as boundary slack
    accept_hi = cc.c_inf + 0.70 * window   # floor values up to here are still usable
    best = None
    prev_sigma = math.inf
    for _ in range(max_iter):
        prof, E, sigma = _build_and_certify(grid, cn, delta0, w_moll, cc)
        if cc.c_inf < sigma < cbar and (best is None or sigma < best[2]):
            best = (prof, E, sigma, delta0)
        if cc.c_inf < sigma <= prefer_hi:
            break
        if sigma >= prev_sigma:  # resolution floor reached, shrinking no longer helps
            break
        prev_sigma = sigma
        delta0 *= 0.9
    if best is None or best[2] > accept_hi:
        achieved = best[2] if best is not None else prev_sigma
        raise ConstructionError(
            f"energy window (c_inf={cc.c_inf:.6f}, cbar={cbar:.6f}) not reached; "
            f"achieved sigma={achieved:.6f} (window too tight for this grid)"
        )
    prof, E, sigma, delta0 = best
    return TrialProfile(
        profile=prof,
        energy=E,
        sigma=sigma,
        l2_mass=integrate(prof.squared()),
        lp_crit=lp_norm(prof, 2.0 * N / (N - 2.0)),
        cc=cc,
        cbar=cbar,
        inner_scale=delta0,
        moll_width=w_moll,
    )


def _build_and_certify(grid, cn, delta0, w_moll, cc):
    N = grid.N
    p = (N - 2) / 2.0
    r = grid.r
    cutoff = _smoothstep((1.0 - r) / w_moll)
    raw = cn * (delta0 / (delta0**2 + r**2)) ** p * cutoff
    base = RadialFn(grid, raw)  # compact support: no tail
    grad_sq = dirichlet_seminorm(base)
    d4 = double_energy(base.squared(), base.squared())
    t = math.sqrt(grad_sq / d4)
    prof = t * base
    E = t**2 * grad_sq  # equals t^4 d4 by construction
    sigma = 0.25 * cc.k_sum * E
    return prof, E, sigma


def trial_pair(profile: TrialProfile, delta: float, rho: float) -> Pair:
    """Proportional pair (sqrt(k1), sqrt(k2)) x member, sharing one member grid."""
    m = trial_member(profile, delta, rho)
    cc = profile.cc
    return Pair(
        OffsetFn(math.sqrt(cc.k1) * m.profile, m.rho),
        OffsetFn(math.sqrt(cc.k2) * m.profile, m.rho),
    )


def trial_member(profile: TrialProfile, delta: float, rho: float) -> OffsetFn:
    """Dilated and translated family member, supported in the delta-ball at the offset.

    The critical-norm is preserved exactly: values scale by delta^(-(N-2)/2)
    on the delta-scaled copy of the profile grid.
    """
    if delta <= 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    if rho < 0:
        raise ParameterError(f"offset must be >= 0, got {rho}")
    g = profile.grid.scaled(delta)
    N = g.N
    vals = profile.profile.values * delta ** (-(N - 2) / 2.0)
    return OffsetFn(RadialFn(g, vals), float(rho))
