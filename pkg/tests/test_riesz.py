import math

import numpy as np
import pytest

from hartreekit import (
    ParameterError,
    RadialFn,
    angular_kernel,
    dirichlet_seminorm,
    double_energy,
    from_callable,
    hls_constant,
    integrate,
    kernel_for,
    lp_norm,
    make_grid,
    riesz_convolve,
    sobolev_constant,
    sphere_area,
)
from hartreekit.riesz import double_energy_info

# frozen oracles (30-digit evaluation of the Gamma-function formulas)
HLS_5_4 = 15.601260714755495     # pi^(12/5)
HLS_6_4 = 6.4396991501604215
SOBOLEV_5 = 14.811911720005934
S_HL_SQ = 225.0 / 16.0
CONV_COEFF = 15.503138340149910  # pi^3 / 2: |x|^-4 * (1+|y|^2)^-3 = coeff (1+|x|^2)^-2
D4_UNIT_PROFILE = math.pi**6 / 64


def test_hls_constant_against_gamma_oracle():
    assert abs(hls_constant(5, 4.0) - HLS_5_4) <= 1e-12 * HLS_5_4
    assert abs(hls_constant(6, 4.0) - HLS_6_4) <= 1e-12 * HLS_6_4


def test_hls_constant_rejects_bad_exponent():
    with pytest.raises(ParameterError):
        hls_constant(5, 5.0)
    with pytest.raises(ParameterError):
        hls_constant(5, 0.0)


def test_sobolev_constant_closed_vs_rayleigh(grid):
    val = sobolev_constant(5, grid)  # raises NumericalError if the quotient disagrees
    assert abs(val - SOBOLEV_5) <= 1e-12 * SOBOLEV_5


def test_sobolev_rayleigh_scale_invariance(grid):
    # rescaled extremal profile gives the same quotient
    for d in (1.0, 3.0):
        prof = from_callable(grid, lambda r, d=d: (d / (d**2 + r**2)) ** 1.5,
                             p_tail=3.0, c_tail=d**1.5)
        q = dirichlet_seminorm(prof) / lp_norm(prof, 10.0 / 3.0) ** 2
        assert abs(q - SOBOLEV_5) <= 1e-3 * SOBOLEV_5


def test_sobolev_constant_rejects_low_dimension():
    with pytest.raises(ParameterError):
        sobolev_constant(2)


def test_angular_kernel_zero_radius_and_symmetry():
    val = angular_kernel(4.0, 1.0, 0.0, 5)
    assert abs(val - sphere_area(5)) <= 1e-12 * sphere_area(5)
    a = angular_kernel(4.0, 2.0, 1.0, 5)
    b = angular_kernel(4.0, 1.0, 2.0, 5)
    assert abs(a - b) <= 1e-12 * a
    with pytest.raises(ParameterError):
        angular_kernel(4.0, 0.0, 0.0, 5)


def test_angular_kernel_critical_diagonal_diverges():
    # at the critical pair the angular average is logarithmically divergent
    # on the diagonal; only cell-integrated quantities are finite
    assert angular_kernel(4.0, 1.0, 1.0, 5) == math.inf


def test_angular_kernel_monte_carlo_oracle():
    rng = np.random.default_rng(42)
    n = 400_000
    x = rng.normal(size=(n, 5))
    w = x / np.linalg.norm(x, axis=1, keepdims=True)
    e1 = np.zeros(5)
    e1[0] = 1.0

    # off-diagonal at the critical exponent
    d = np.linalg.norm(2.0 * e1 - 1.0 * w, axis=1)
    mc = sphere_area(5) * np.mean(d**-4.0)
    err = sphere_area(5) * np.std(d**-4.0) / math.sqrt(n)
    val = angular_kernel(4.0, 2.0, 1.0, 5)
    assert abs(val - mc) <= max(4 * err, 1e-3 * val)

    # diagonal below the critical exponent (integrable singularity)
    d2 = np.linalg.norm(e1 - w, axis=1)
    mc2 = sphere_area(5) * np.mean(d2**-3.0)
    err2 = sphere_area(5) * np.std(d2**-3.0) / math.sqrt(n)
    val2 = angular_kernel(3.0, 1.0, 1.0, 5)
    assert abs(val2 - mc2) <= max(4 * err2, 1e-3 * val2)


def test_kernel_table_symmetry_and_positivity(grid):
    kern = kernel_for(grid, 4.0)
    off = ~np.eye(grid.M, dtype=bool)
    assert np.all(kern.K[off] > 0)
    assert np.allclose(kern.K, kern.K.T, rtol=0, atol=0)
    assert np.array_equal(kern.energy, kern.energy.T)


def test_convolution_far_field(grid):
    gf = make_grid(5, 120, 1.0, 1.0)
    bump = from_callable(gf, lambda r: np.exp(1 - 1 / np.clip(1 - r**2, 1e-12, None)) * (r < 1))
    bump_on_main = RadialFn(grid, bump(grid.r))
    conv = riesz_convolve(bump_on_main, 4.0)
    mass = integrate(bump_on_main)
    i = int(np.argmin(abs(grid.r - 30.0)))
    assert abs(conv.values[i] * grid.r[i] ** 4 / mass - 1.0) <= 1e-3


def test_convolution_of_bubble_density_is_proportional(grid):
    prof = from_callable(grid, lambda r: (1.0 + r**2) ** -3.0, p_tail=6.0, c_tail=1.0)
    conv = riesz_convolve(prof, 4.0)
    sel = grid.r < 10.0
    ratio = conv.values[sel] / ((1.0 + grid.r[sel] ** 2) ** -2.0)
    assert np.max(np.abs(ratio / CONV_COEFF - 1.0)) <= 1e-3
    assert abs(conv.c_tail - integrate(prof)) == 0.0


def test_convolution_linearity(grid):
    f = from_callable(grid, lambda r: (1.0 + r**2) ** -3.0, p_tail=6.0, c_tail=1.0)
    g = from_callable(grid, lambda r: np.exp(-(r**2)))
    lhs = riesz_convolve(2.0 * f + 3.0 * g, 4.0).values
    rhs = 2.0 * riesz_convolve(f, 4.0).values + 3.0 * riesz_convolve(g, 4.0).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))


def test_convolution_of_zero(grid):
    z = RadialFn(grid, np.zeros(grid.M))
    assert np.all(riesz_convolve(z, 4.0).values == 0.0)


def test_double_energy_of_unit_profile(grid):
    sq = from_callable(grid, lambda r: (1.0 + r**2) ** -3.0, p_tail=6.0, c_tail=1.0)
    val, tail_frac = double_energy_info(sq, sq)
    assert abs(val - D4_UNIT_PROFILE) <= 1e-8 * D4_UNIT_PROFILE
    assert 0 <= tail_frac < 1e-4


def test_double_energy_symmetry(grid):
    f = from_callable(grid, lambda r: (1.0 + r**2) ** -3.0, p_tail=6.0, c_tail=1.0)
    g = from_callable(grid, lambda r: np.exp(-(r**2)))
    a, b = double_energy(f, g), double_energy(g, f)
    assert abs(a - b) <= 1e-12 * abs(a)


def test_double_energy_hls_inequality(grid):
    rng = np.random.default_rng(7)
    C = hls_constant(5, 4.0)
    for _ in range(20):
        a1, a2 = rng.uniform(0.2, 2.0, 2)
        w1, w2 = rng.uniform(0.3, 4.0, 2)
        f = from_callable(grid, lambda r: a1 * np.exp(-((r / w1) ** 2)))
        g = from_callable(grid, lambda r: a2 * np.exp(-((r / w2) ** 2)))
        lhs = double_energy(f, g)
        rhs = C * lp_norm(f, 5.0 / 3.0) * lp_norm(g, 5.0 / 3.0)
        assert lhs <= rhs * (1.0 + 1e-10)


def test_double_energy_positive_definite_on_nonnegative(grid):
    rng = np.random.default_rng(11)
    for _ in range(10):
        vals = rng.uniform(0.0, 1.0, grid.M) * np.exp(-grid.r)
        f = RadialFn(grid, vals)
        assert double_energy(f, f) > 0
    z = RadialFn(grid, np.zeros(grid.M))
    assert double_energy(z, z) == 0.0


def test_constants_table_identity(constants):
    assert abs(constants.s_hl_sq * constants.hls - constants.sobolev**2) \
        <= 1e-12 * constants.sobolev**2
    assert abs(constants.s_hl_sq - S_HL_SQ) <= 1e-12 * S_HL_SQ


def test_bubble_double_energy_vs_dirichlet(grid, constants):
    cn = constants.bubble_norm
    U = from_callable(grid, lambda r: cn * (1.0 / (1.0 + r**2)) ** 1.5,
                      p_tail=3.0, c_tail=cn)
    d4 = double_energy(U.squared(), U.squared())
    grad = dirichlet_seminorm(U)
    assert abs(d4 - grad) <= 1e-4 * grad
    assert abs(d4 - S_HL_SQ) <= 1e-3 * S_HL_SQ
    assert abs(grad - S_HL_SQ) <= 1e-3 * S_HL_SQ


def test_constants_table_serializes(constants):
    import json

    d = constants.to_dict()
    blob = json.dumps(d, sort_keys=True)
    back = json.loads(blob)
    assert back["N"] == 5
    assert abs(back["s_hl_squared"] - S_HL_SQ) <= 1e-12 * S_HL_SQ


def test_generic_dimension_kernel_path():
    # N = 6 exercises the Jacobi-weight quadrature tables (no closed form,
    # no near-diagonal correction, hence the looser tolerance); the bubble
    # amplitude there is sqrt(N (N-2) * Gamma(N-2) / (pi^(N/2) Gamma((N-4)/2)))
    from hartreekit import bubble_constant, dirichlet_seminorm, make_constants_table

    exact_c6 = math.sqrt(24.0 * 6.0 / math.pi**3)
    g6 = make_grid(6, 300, 40.0, 1.02)
    c6 = bubble_constant(6, g6)
    assert abs(c6 - exact_c6) <= 1e-2 * exact_c6
    t6 = make_constants_table(6, g6)
    U6 = from_callable(g6, lambda r: c6 * (1.0 / (1.0 + r**2)) ** 2.0,
                       p_tail=4.0, c_tail=c6)
    assert abs(dirichlet_seminorm(U6) - t6.s_hl_sq) <= 1e-2 * t6.s_hl_sq
    assert abs(double_energy(U6.squared(), U6.squared()) - t6.s_hl_sq) \
        <= 1e-2 * t6.s_hl_sq
