import numpy as np
import pytest

import fdrelax as fx
from fdrelax.errors import ConfigurationError, NewtonError

LAW = fx.PowerLaw(2.5)

# Energy of the normalized positive solution of -z'' = c z^(3/2) on (0,1),
# computed to 30+ digits from the first-integral reduction: with
# I0 = int_0^1 (1-s^2.5)^(-1/2) ds and I1 = int_0^1 s^2.5 (1-s^2.5)^(-1/2) ds,
# the peak is M = (sqrt(5) I0)^4, ||w||_{2.5}^{2.5} = sqrt(5) M^{9/4} I1, and
# c = ||w||_{2.5}^{1/2}.  Discrete energies converge to this at rate h^2.
C_EXACT_1D = 9.207362605687367
ZMAX_EXACT_1D = 1.3831618672225916


@pytest.fixture(scope="module")
def profile_1d():
    return fx.solve_lane_emden_detailed(fx.Grid(1, 1.0, 1.0 / 500.0), LAW)


@pytest.fixture(scope="module")
def profile_2d():
    return fx.solve_lane_emden_detailed(fx.Grid(2, 1.0, 1.0 / 40.0), LAW)


def test_energy_against_continuum_quadrature_oracle(profile_1d):
    profile, _ = profile_1d
    assert profile.c == pytest.approx(C_EXACT_1D, abs=1e-3)
    assert profile.z0.max() == pytest.approx(ZMAX_EXACT_1D, abs=1e-3)


def test_profile_invariants(profile_1d):
    profile, stats = profile_1d
    g = profile.grid
    assert np.all(profile.z0 > 0.0)
    assert fx.lq_norm(profile.z0, g, LAW.q) == pytest.approx(1.0, abs=1e-9)
    assert fx.h1_seminorm_sq(profile.z0, g) == pytest.approx(profile.c, rel=1e-9)
    # residual check independent of the increment criterion
    res = -fx.apply_laplacian(profile.z0, g) - profile.c * fx.alpha(profile.z0, LAW)
    scale = profile.c * np.max(np.abs(fx.alpha(profile.z0, LAW)))
    assert np.max(np.abs(res)) <= 1e-8 * scale
    assert stats.iterations <= 20


def test_profile_symmetry(profile_1d, profile_2d):
    z1, _ = profile_1d
    assert np.max(np.abs(z1.z0 - z1.z0[::-1])) <= 1e-8
    z2, _ = profile_2d
    a = z2.z0.reshape(z2.grid.shape)
    for reflected in (a[::-1, :], a[:, ::-1], a.T):
        assert np.max(np.abs(a - reflected)) <= 1e-8


def test_scaling_consistency(profile_1d):
    profile, _ = profile_1d
    g = profile.grid
    base = -fx.apply_laplacian(profile.z0, g) - profile.c * fx.alpha(profile.z0, LAW)
    q = LAW.q
    for lam in (0.5, 2.0):
        scaled = (-fx.apply_laplacian(lam * profile.z0, g)
                  - lam ** (2.0 - q) * profile.c * fx.alpha(lam * profile.z0, LAW))
        assert np.max(np.abs(scaled - lam * base)) <= 1e-12 * profile.c


def test_2d_energy_sanity(profile_2d):
    profile, _ = profile_2d
    # discrete energies at h = 1/40 sit within O(h^2) of the converged 17.1196
    assert profile.c == pytest.approx(17.1196, abs=0.1)
    assert fx.extinction_time(profile.c, LAW) == pytest.approx(0.1752, abs=0.002)


def test_extinction_time_reference_values():
    assert fx.extinction_time(3.0, LAW) == pytest.approx(1.0, rel=1e-14)
    assert fx.extinction_time(2.0, fx.PowerLaw(3.0)) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(ConfigurationError):
        fx.extinction_time(0.0, LAW)
    with pytest.raises(ConfigurationError):
        fx.extinction_time(-1.0, LAW)


def test_exact_solution_evaluation(profile_1d):
    profile, _ = profile_1d
    run_grid = fx.Grid(1, 1.0, 0.01)
    sol = fx.exact_solution(profile, run_grid)
    assert sol.t_star == pytest.approx((LAW.q - 1) / ((LAW.q - 2) * profile.c),
                                       rel=1e-15)
    z0r = sol.profile.z0
    assert np.array_equal(fx.exact_solution_at(sol, 0.0), z0r)
    assert np.all(fx.exact_solution_at(sol, sol.t_star) == 0.0)
    assert np.all(fx.exact_solution_at(sol, 2.0 * sol.t_star) == 0.0)
    # exponent 1/(q-2) = 2 at q = 2.5, so half time gives a quarter amplitude
    half = fx.exact_solution_at(sol, sol.t_star / 2.0)
    assert np.allclose(half, 0.25 * z0r, rtol=1e-14)
    with pytest.raises(ConfigurationError):
        fx.exact_solution_at(sol, -0.1)


def test_exact_solution_norm_decay(profile_1d):
    profile, _ = profile_1d
    run_grid = fx.Grid(1, 1.0, 0.01)
    sol = fx.exact_solution(profile, run_grid)
    base = fx.lq_norm(sol.profile.z0, run_grid, LAW.q)
    for t in (0.0, 0.1, 0.2, 0.3):
        factor = max(0.0, 1.0 - t / sol.t_star) ** 2
        got = fx.lq_norm(fx.exact_solution_at(sol, t), run_grid, LAW.q)
        assert got == pytest.approx(factor * base, rel=1e-9, abs=1e-300)


def test_initial_uv_reference_values():
    u0, v0 = fx.initial_uv(np.zeros(5), 0.5, LAW)
    assert np.all(u0 == 0.0) and np.all(v0 == 0.0)
    u0, v0 = fx.initial_uv(np.array([1.0]), 0.5, LAW)
    assert u0[0] == pytest.approx(1.0, rel=1e-15)
    assert v0[0] == pytest.approx(0.5, rel=1e-15)


def test_initial_uv_reconstruction(profile_1d):
    profile, _ = profile_1d
    u0, v0 = fx.initial_uv(profile.z0, 0.5, LAW)
    err = np.max(np.abs(0.5 * u0 + v0 - profile.z0))
    assert err <= 4.0 * np.finfo(float).eps * np.max(profile.z0)


def test_initial_uv_mu_constraint_names_bound(profile_1d):
    profile, _ = profile_1d
    lip = fx.lipschitz_on(float(np.max(profile.z0)), LAW)
    with pytest.raises(ConfigurationError) as exc_info:
        fx.initial_uv(profile.z0, 1.0 / lip + 1e-6, LAW)
    assert f"{1.0 / lip:.6g}" in str(exc_info.value)


def test_newton_failure_carries_trace():
    with pytest.raises(NewtonError) as exc_info:
        fx.solve_lane_emden(fx.Grid(1, 1.0, 0.05), LAW, max_iter=1)
    assert len(exc_info.value.increments) >= 1
