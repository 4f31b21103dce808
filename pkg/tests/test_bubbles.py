import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hartreekit import (
    ConstructionError,
    DomainError,
    Pair,
    ParameterError,
    Problem,
    RadialFn,
    bubble_constant,
    coupling_constants,
    dirichlet_seminorm,
    double_energy,
    ground_pair,
    lp_norm,
    make_bubble,
    make_trial_profile,
    quotient_infimum,
    trial_member,
    trial_pair,
    weak_residual,
)

C5 = 0.9836391782538883  # sqrt(30 / pi^3), independent closed-form evaluation
S_HL_SQ = 225.0 / 16.0
C_INF_123 = 675.0 / 448.0


def test_bubble_constant_matches_closed_form(grid):
    assert abs(bubble_constant(5, grid) - C5) <= 2e-5 * C5


def test_bubble_constant_rejects_low_dimension():
    with pytest.raises(ParameterError):
        bubble_constant(4)


def test_bubble_closed_form_values(grid):
    b = make_bubble(1.0, 0.0, 5, grid)
    assert abs(b(0.0) - b.c_N) == 0.0
    assert b.c_N == bubble_constant(5, grid)
    with pytest.raises(ParameterError):
        make_bubble(-1.0, 0.0, 5)


def test_bubble_dirichlet_scale_invariance(grid):
    vals = [dirichlet_seminorm(make_bubble(d, 0.0, 5).profile_on(grid))
            for d in (0.5, 1.0, 2.0)]
    assert (max(vals) - min(vals)) / min(vals) <= 1e-4


def test_bubble_double_energy_level(grid):
    U = make_bubble(1.0, 0.0, 5).profile_on(grid)
    d4 = double_energy(U.squared(), U.squared())
    assert abs(d4 - S_HL_SQ) <= 1e-3 * S_HL_SQ


def test_bubble_residual_certification(grid):
    # a (U, 0) pair under unit self-coupling reduces to the scalar limit
    # equation, so this is a direct certification of the amplitude
    prob = Problem(N=5, mu1=1.0, mu2=1.0, beta=2.0)
    zero = RadialFn(grid, np.zeros(grid.M))
    U1 = make_bubble(1.0, 0.0, 5).profile_on(grid)
    U2 = make_bubble(2.0, 0.0, 5).profile_on(grid)
    assert weak_residual(Pair(U1, zero), prob) < 1e-3
    assert weak_residual(Pair(U2, zero), prob) < 1e-3


def test_wrong_amplitude_rejected(grid):
    prob = Problem(N=5, mu1=1.0, mu2=1.0, beta=2.0)
    zero = RadialFn(grid, np.zeros(grid.M))
    U1 = make_bubble(1.0, 0.0, 5).profile_on(grid)
    assert weak_residual(Pair(2.0 * U1, zero), prob) > 0.1


def test_bubble_critical_norm_oracle(grid):
    # per unit amplitude the critical norm is (pi^3/32)^(3/10); dividing out
    # the numerically pinned amplitude isolates the quadrature accuracy
    b = make_bubble(1.0, 0.0, 5)
    U = b.profile_on(grid)
    oracle = 0.96894614625936938 ** 0.3
    assert abs(lp_norm(U, 10.0 / 3.0) / b.c_N - oracle) <= 1e-8 * oracle


def test_coupling_constants_exact_fractions():
    cc = coupling_constants(1.0, 2.0, 3.0, S_HL_SQ)
    assert abs(cc.k1 - 1.0 / 7.0) <= 1e-15
    assert abs(cc.k2 - 2.0 / 7.0) <= 1e-15
    assert abs(cc.identity_defect()) <= 1e-12
    assert abs(cc.c_inf - C_INF_123) <= 1e-12 * C_INF_123


def test_coupling_constants_symmetric_case():
    cc = coupling_constants(1.0, 1.0, 2.0, S_HL_SQ)
    assert abs(cc.k1 - 1.0 / 3.0) <= 1e-15
    assert abs(cc.k2 - 1.0 / 3.0) <= 1e-15


def test_coupling_constants_domain_error():
    with pytest.raises(DomainError):
        coupling_constants(1.0, 2.0, 1.5, S_HL_SQ)


@given(
    mu1=st.floats(0.1, 5.0),
    mu2=st.floats(0.1, 5.0),
    boost=st.floats(1.001, 5.0),
)
@settings(max_examples=100, deadline=None)
def test_coupling_identity_random(mu1, mu2, boost):
    beta = max(mu1, mu2) * boost
    cc = coupling_constants(mu1, mu2, beta, S_HL_SQ)
    assert abs(cc.identity_defect()) <= 1e-12 * cc.k_sum
    # the level-separation mechanism: k_sum strictly below both 1/mu
    assert cc.k_sum < min(1.0 / mu1, 1.0 / mu2)


def test_quotient_infimum_brute_force():
    t_star, val = quotient_infimum(1.0, 2.0, 3.0)
    assert abs(val - 3.0 / 7.0) <= 1e-10
    assert abs(t_star - 0.5) <= 1e-12
    ts = np.linspace(0, 1000, 2_000_001)
    brute = np.min((1 + ts) ** 2 / (ts**2 + 6 * ts + 2))
    assert abs(val - brute) <= 1e-10


def test_quotient_infimum_symmetric():
    t_star, val = quotient_infimum(1.0, 1.0, 2.0)
    assert abs(val - 2.0 / 3.0) <= 1e-12
    assert abs(t_star - 1.0) <= 1e-12


@given(
    mu1=st.floats(0.1, 5.0),
    mu2=st.floats(0.1, 5.0),
    boost=st.floats(1.01, 5.0),
)
@settings(max_examples=50, deadline=None)
def test_quotient_matches_coupling_sum(mu1, mu2, boost):
    beta = max(mu1, mu2) * boost
    _, val = quotient_infimum(mu1, mu2, beta)
    cc = coupling_constants(mu1, mu2, beta, S_HL_SQ)
    assert abs(val - cc.k_sum) <= 1e-12 * cc.k_sum


def test_ground_pair_ratio_and_level(grid, cc):
    gp = ground_pair(1.0, 0.0, cc, grid)
    ratio = gp.v.values / gp.u.values
    assert np.max(np.abs(ratio - math.sqrt(2.0))) <= 1e-12
    K = dirichlet_seminorm(gp.u) + dirichlet_seminorm(gp.v)
    u2, v2 = gp.u.squared(), gp.v.squared()
    NL = (cc.mu1 * double_energy(u2, u2) + cc.mu2 * double_energy(v2, v2)
          + 2 * cc.beta * double_energy(u2, v2))
    total = 0.5 * K - 0.25 * NL
    assert abs(total - C_INF_123) <= 1e-3 * C_INF_123
    # Nehari residual scaled by the pair norm
    assert abs(K - NL) / K <= 1e-3


def test_trial_profile_certificates(trial_profile, cc):
    p = trial_profile
    d4 = double_energy(p.profile.squared(), p.profile.squared())
    grad = dirichlet_seminorm(p.profile)
    assert abs(grad - d4) <= 1e-10 * d4
    assert p.energy > S_HL_SQ
    assert cc.c_inf < p.sigma < p.cbar
    vals = p.profile.values
    assert np.all(np.diff(vals) <= 1e-12 * vals.max())
    assert p.profile(1.5) == 0.0
    assert p.profile(1.2) == 0.0


def test_trial_profile_unattainable_window(cc):
    with pytest.raises(ConstructionError):
        make_trial_profile(0.995, cc, cc.c_inf * (1.0 + 1e-9))


def test_trial_member_identity(trial_profile):
    m = trial_member(trial_profile, 1.0, 0.0)
    assert np.array_equal(m.profile.values, trial_profile.profile.values)
    assert m.rho == 0.0


def test_trial_member_norm_preservation(trial_profile):
    rng = np.random.default_rng(3)
    base = trial_profile.lp_crit
    for _ in range(10):
        d = float(rng.uniform(0.05, 50.0))
        rho = float(rng.uniform(0.0, 10.0))
        m = trial_member(trial_profile, d, rho)
        assert abs(lp_norm(m.profile, 10.0 / 3.0) - base) <= 1e-8 * base


def test_trial_member_support(trial_profile):
    m = trial_member(trial_profile, 2.0, 1.0)
    assert m.profile(2.5) == 0.0
    assert m.profile.grid.R_max == pytest.approx(2.0)


def test_trial_pair_shares_grid(trial_profile):
    pair = trial_pair(trial_profile, 2.0, 1.0)
    assert pair.u.profile.grid is pair.v.profile.grid
    assert pair.offset == 1.0
