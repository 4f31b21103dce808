import numpy as np
import pytest

from hartreekit import (
    DivergenceError,
    OffsetFn,
    Pair,
    ParameterError,
    Problem,
    ProjectionError,
    RadialFn,
    barycenter,
    barycenter_axis_sign,
    energy_I,
    energy_I0,
    energy_I_infty,
    from_callable,
    ground_pair,
    nehari_project,
    pohozaev_residual,
    trial_pair,
    trial_projection_scalars,
    weak_residual,
)

C_INF_123 = 675.0 / 448.0


def test_energy_zero_state(grid, free_problem):
    z = Pair(RadialFn(grid, np.zeros(grid.M)), RadialFn(grid, np.zeros(grid.M)))
    br = energy_I(z, free_problem)
    assert br.kinetic == br.potential == br.total == br.defect == 0.0


def test_energy_ground_pair_level(grid, cc, free_problem):
    gp = ground_pair(1.0, 0.0, cc, grid)
    br = energy_I(gp, free_problem)
    assert abs(br.total - C_INF_123) <= 1e-3 * C_INF_123
    assert abs(br.defect) / br.kinetic <= 1e-3
    br2 = energy_I_infty(gp, cc)
    assert br2.total == br.total


def test_energy_negative_pair_has_no_nonlocal_part(grid, cc, free_problem):
    gp = ground_pair(1.0, 0.0, cc, grid)
    neg = gp.scale(-1.0)
    br = energy_I(neg, free_problem)
    assert br.nonlocal_11 == br.nonlocal_22 == br.nonlocal_12 == 0.0
    assert br.total == 0.5 * (br.kinetic + br.potential)


def test_energy_homogeneity(grid, cc):
    gp = ground_pair(1.0, 0.0, cc, grid)
    base = energy_I_infty(gp, cc)
    for t in (0.5, 1.0, 2.0):
        br = energy_I_infty(gp.scale(t), cc)
        pred = 0.5 * t**2 * base.kinetic - 0.25 * t**4 * base.nonlocal_sum
        assert abs(br.total - pred) <= 1e-12 * max(abs(pred), 1.0)


def test_energy_trial_pair_in_window(trial_profile, cc):
    pair = trial_pair(trial_profile, 1.0, 0.0)
    br = energy_I_infty(pair, cc)
    assert cc.c_inf < br.total < trial_profile.cbar
    assert abs(br.total - trial_profile.sigma) <= 1e-6 * trial_profile.sigma


def test_energy_divergence_for_slow_tail(grid):
    prob = Problem(N=5, mu1=1.0, mu2=1.0, beta=2.0, lam1=0.5, lam2=0.0)
    slow = from_callable(grid, lambda r: (1.0 + r**2) ** -1.0, p_tail=2.0, c_tail=1.0)
    pair = Pair(slow, slow)
    with pytest.raises(DivergenceError):
        energy_I(pair, prob)


def test_nehari_idempotence(grid, cc, problem):
    gp = ground_pair(1.0, 0.0, cc, grid)
    t1, proj = nehari_project(gp, problem)
    t2, _ = nehari_project(proj, problem)
    assert abs(t2 - 1.0) <= 1e-12


def test_nehari_homogeneity(grid, cc, free_problem):
    gp = ground_pair(1.0, 0.0, cc, grid)
    t0, proj = nehari_project(gp, free_problem)
    t3, _ = nehari_project(proj.scale(3.0), free_problem)
    assert abs(t3 - 1.0 / 3.0) <= 1e-12


def test_nehari_ordering(grid, cc, problem, free_problem):
    gp = ground_pair(1.0, 0.0, cc, grid)
    tau, _ = nehari_project(gp, free_problem)
    t, _ = nehari_project(gp, problem)
    assert tau <= t
    assert t > tau  # potentials strictly positive on this pair


def test_nehari_rejects_vanishing_positive_part(grid, free_problem):
    neg = Pair(RadialFn(grid, -np.exp(-grid.r**2)), RadialFn(grid, -np.exp(-grid.r**2)))
    with pytest.raises(ProjectionError):
        nehari_project(neg, free_problem)


def test_projected_defect_vanishes(grid, cc, problem):
    rng = np.random.default_rng(5)
    for _ in range(5):
        u = RadialFn(grid, rng.uniform(0.5, 1.5) * np.exp(-(grid.r / rng.uniform(0.5, 2)) ** 2))
        v = RadialFn(grid, rng.uniform(0.5, 1.5) * np.exp(-(grid.r / rng.uniform(0.5, 2)) ** 2))
        t, proj = nehari_project(Pair(u, v), problem)
        br = energy_I(proj, problem)
        assert abs(br.defect) <= 1e-10 * (br.kinetic + br.potential)


def test_on_nehari_energy_formula(grid, cc, problem):
    rng = np.random.default_rng(6)
    u = RadialFn(grid, np.exp(-grid.r**2))
    v = RadialFn(grid, 0.7 * np.exp(-(grid.r / 1.3) ** 2))
    _, proj = nehari_project(Pair(u, v), problem)
    br = energy_I(proj, problem)
    assert abs(br.total - 0.25 * (br.kinetic + br.potential)) \
        <= 1e-12 * (br.kinetic + br.potential)


def test_trial_projection_scalars_free_case(trial_profile, cc, grid):
    free = Problem(N=5, mu1=cc.mu1, mu2=cc.mu2, beta=cc.beta)
    t0, t_lam = trial_projection_scalars(trial_profile, 1.0, 0.0, free, cc)
    assert t0 == 1.0 and t_lam == 1.0


def test_trial_projection_scalars_concentration_trend(trial_profile, cc, problem):
    sups = []
    for d in (1.0, 0.3, 0.1, 0.03):
        devs = [abs(trial_projection_scalars(trial_profile, d, rho, problem, cc)[0] - 1.0)
                for rho in (0.0, 1.0, 3.0)]
        sups.append(max(devs))
    assert all(a > b for a, b in zip(sups[:-1], sups[1:]))
    assert sups[-1] < 0.1 * sups[0]


def test_trial_projection_lambda_term_matches_quadrature(trial_profile, cc, grid, potential):
    from hartreekit import integrate

    prob = Problem(N=5, mu1=1.0, mu2=2.0, beta=3.0, lam1=0.1, lam2=0.1,
                   V1=potential, V2=potential)
    t0, t_lam = trial_projection_scalars(trial_profile, 1.0, 0.0, prob, cc)
    # direct quadrature of the shift term on the member grid
    m = trial_profile.member(1.0, 0.0)
    lam_term = (cc.k1 * 0.1 + cc.k2 * 0.1) * integrate(m.profile.squared())
    pred = (t_lam**2 - t0**2) * cc.k_sum * trial_profile.energy
    assert abs(pred - lam_term) <= 1e-10 * lam_term
    assert t_lam > t0


def test_barycenter_centered_exact_zero(grid, cc):
    gp = ground_pair(1.0, 0.0, cc, grid)
    xi, gamma = barycenter(gp, cc.mu1, cc.mu2, cc.beta)
    assert xi == 0.0
    assert 0 < gamma < 1


def test_barycenter_scale_invariance(trial_profile, cc):
    pair = trial_pair(trial_profile, 0.5, 2.0)
    xi, gamma = barycenter(pair, cc.mu1, cc.mu2, cc.beta)
    for t in (0.5, 2.0):
        xi_t, gamma_t = barycenter(pair.scale(t), cc.mu1, cc.mu2, cc.beta)
        assert abs(xi_t - xi) <= 1e-12 * max(abs(xi), 1.0)
        assert abs(gamma_t - gamma) <= 1e-12 * max(gamma, 1.0)


def test_barycenter_small_dilation_bound(trial_profile, cc):
    for rho in (0.0, 1.0, 3.0):
        pair = trial_pair(trial_profile, 0.01, rho)
        _, gamma = barycenter(pair, cc.mu1, cc.mu2, cc.beta)
        assert gamma < 4 * 0.01


def test_barycenter_zero_density_rejected(grid, cc):
    z = Pair(RadialFn(grid, np.zeros(grid.M)), RadialFn(grid, np.zeros(grid.M)))
    with pytest.raises(ProjectionError):
        barycenter(z, cc.mu1, cc.mu2, cc.beta)


def test_axis_sign_positive(trial_profile):
    assert barycenter_axis_sign(trial_profile, 1.0, 1.0) > 0
    for d in (0.1, 1.0, 10.0):
        assert barycenter_axis_sign(trial_profile, d, 2.0) > 0


def test_axis_sign_rejects_centered(trial_profile):
    with pytest.raises(ParameterError):
        barycenter_axis_sign(trial_profile, 1.0, 0.0)


def test_pohozaev_ground_pair(grid, cc, free_problem):
    gp = ground_pair(1.0, 0.0, cc, grid)
    lam_mass, gap = pohozaev_residual(gp, free_problem)
    assert lam_mass == 0.0
    assert gap < 1e-3


def test_pohozaev_flags_shifted_nonsolution(grid, cc, free_problem):
    gp = ground_pair(1.0, 0.0, cc, grid)
    shifted = free_problem.with_lambda(0.5, 0.5)
    lam_mass, gap = pohozaev_residual(gp, shifted)
    assert lam_mass > 0.1
    assert weak_residual(gp, shifted) > 1e-3


def test_pohozaev_zero_state(grid, free_problem):
    z = Pair(RadialFn(grid, np.zeros(grid.M)), RadialFn(grid, np.zeros(grid.M)))
    assert pohozaev_residual(z, free_problem) == (0.0, 0.0)


def test_pohozaev_requires_zero_potential(grid, cc, problem):
    gp = ground_pair(1.0, 0.0, cc, grid)
    with pytest.raises(ParameterError):
        pohozaev_residual(gp, problem)


def test_weak_residual_ground_pair(grid, cc, free_problem):
    gp = ground_pair(1.0, 0.0, cc, grid)
    assert weak_residual(gp, free_problem) < 1e-3


def test_weak_residual_negative_control(grid, cc, free_problem):
    gp = ground_pair(1.0, 0.0, cc, grid)
    assert weak_residual(gp.scale(1.2), free_problem) > 1e-2


def test_weak_residual_zero_state(grid, free_problem):
    z = Pair(RadialFn(grid, np.zeros(grid.M)), RadialFn(grid, np.zeros(grid.M)))
    assert weak_residual(z, free_problem) == 0.0


def test_projection_ordering_fifty_random_pairs(grid, problem, free_problem):
    rng = np.random.default_rng(1234)
    violations = 0
    for _ in range(50):
        a1, a2 = rng.uniform(0.3, 2.0, 2)
        w1, w2 = rng.uniform(0.5, 3.0, 2)
        u = RadialFn(grid, a1 * np.exp(-((grid.r / w1) ** 2)))
        v = RadialFn(grid, a2 * np.exp(-((grid.r / w2) ** 2)))
        pair = Pair(u, v)
        tau, _ = nehari_project(pair, free_problem)
        t, _ = nehari_project(pair, problem)
        if tau > t:
            violations += 1
    assert violations == 0


def test_mixed_pair_representation_rejected(grid, trial_profile):
    u = RadialFn(grid, np.exp(-grid.r**2))
    m = trial_profile.member(1.0, 1.0)
    with pytest.raises(ParameterError):
        Pair(u, m)


def test_offset_pair_energy_consistent_with_scalar_path(trial_profile, cc, problem):
    # projecting the translated trial pair through the full energy machinery
    # must reproduce the certified scalar quotients
    delta, rho = 2.0, 1.5
    pair = trial_pair(trial_profile, delta, rho)
    t0_scalar, _ = trial_projection_scalars(trial_profile, delta, rho,
                                            problem.with_lambda(0.0, 0.0), cc)
    t_full, proj = nehari_project(pair, problem.with_lambda(0.0, 0.0))
    assert abs(t_full - t0_scalar) <= 1e-6 * t0_scalar
    br = energy_I0(proj, problem)
    assert abs(br.total - t0_scalar**4 * trial_profile.sigma) \
        <= 1e-6 * trial_profile.sigma


def test_axis_moments_divergent_profile_rejected(grid):
    from hartreekit import DivergenceError, axis_moment_integrals

    slow = from_callable(grid, lambda r: (1.0 + r) ** -1.2, p_tail=1.2, c_tail=1.0)
    with pytest.raises(DivergenceError):
        axis_moment_integrals(OffsetFn(slow, 1.0), 0.0)
