"""Shared fixtures and the acceptance-criteria reporter.

The heavyweight computations (fine-grid stationary solves, the relaxation
sweeps) are session-scoped so the acceptance tests share one run of each.
Acceptance tests register one PASS/FAIL line per criterion; the lines are
printed in the terminal summary.
"""

import numpy as np
import pytest

import fdrelax as fx
from fdrelax.experiments import SweepConfig, case_1d, case_2d

# 2-D acceptance ladder: the five-point thinning keeps every point inside
# the slope-fit window
EPS_LADDER_2D = (2e-2, 1e-2, 5e-3, 2e-3, 1e-3)

_CRITERIA_LINES = {}


@pytest.fixture(scope="session")
def criteria_recorder():
    def record(number: int, passed: bool, detail: str):
        _CRITERIA_LINES[number] = (passed, detail)
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA_LINES):
        passed, detail = _CRITERIA_LINES[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number} {status}  {detail}")


def pytest_collection_modifyitems(config, items):
    # run the expensive acceptance module after the unit tests
    items.sort(key=lambda it: it.module.__name__ == "test_acceptance")


@pytest.fixture(scope="session")
def law():
    return fx.PowerLaw(2.5)


@pytest.fixture(scope="session")
def profile_1d_fine(law):
    return fx.solve_lane_emden(fx.Grid(1, 1.0, 1e-3), law)


@pytest.fixture(scope="session")
def profile_2d_fine(law):
    return fx.solve_lane_emden(fx.Grid(2, 1.0, 1e-3), law)


@pytest.fixture(scope="session")
def sweep_1d_xi0(profile_1d_fine):
    cfg = SweepConfig(base=case_1d(), xi_mode="zero")
    return cfg, fx.convergence_sweep(cfg, profile=profile_1d_fine)


@pytest.fixture(scope="session")
def sweep_1d_xieps(profile_1d_fine):
    cfg = SweepConfig(base=case_1d(), xi_mode="equal-eps")
    return cfg, fx.convergence_sweep(cfg, profile=profile_1d_fine)


@pytest.fixture(scope="session")
def sweep_2d(profile_2d_fine):
    cfg = SweepConfig(base=case_2d(), eps_values=EPS_LADDER_2D, xi_mode="zero")
    return cfg, fx.convergence_sweep(cfg, profile=profile_2d_fine)


@pytest.fixture(scope="session")
def extinction_samples(profile_1d_fine):
    case = case_1d(eps=1e-4, xi=1e-4)
    return case, fx.extinction_study(case, profile=profile_1d_fine)


@pytest.fixture(scope="session")
def initial_data_1d(profile_1d_fine):
    case = case_1d()
    sol = fx.exact_solution(profile_1d_fine, case.run_grid())
    u0, v0 = fx.initial_uv(sol.profile.z0, case.mu, case.law)
    return sol, u0, v0


@pytest.fixture(scope="session")
def initial_data_2d(profile_2d_fine):
    case = case_2d()
    sol = fx.exact_solution(profile_2d_fine, case.run_grid())
    u0, v0 = fx.initial_uv(sol.profile.z0, case.mu, case.law)
    return sol, u0, v0


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
