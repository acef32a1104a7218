import numpy as np
import pytest

import fdrelax as fx
from fdrelax.errors import ConfigurationError
from fdrelax.experiments import (CaseConfig, ErrorRecord, SweepConfig,
                                 case_1d, read_error_csv, sweep_csv_name,
                                 write_error_csv)

LAW = fx.PowerLaw(2.5)


def tiny_case(**overrides):
    base = dict(dim=1, mu=0.5, law=LAW, dt=0.01, h=0.1, t_final=0.05)
    base.update(overrides)
    return CaseConfig(**base)


@pytest.fixture(scope="module")
def tiny_profile():
    return fx.solve_lane_emden(tiny_case().fine_grid(), LAW)


def test_fit_order_reference_lines():
    eps = (1e-1, 1e-2, 1e-3)
    on_line = [ErrorRecord(e, 0.0, e) for e in eps]
    assert fx.fit_order(on_line) == pytest.approx(1.0, abs=1e-12)
    ten_x = [ErrorRecord(e, 0.0, 10.0 * e) for e in eps]
    assert fx.fit_order(ten_x) == pytest.approx(1.0, abs=1e-12)
    sqrt_line = [ErrorRecord(e, 0.0, np.sqrt(e)) for e in eps]
    assert fx.fit_order(sqrt_line) == pytest.approx(0.5, abs=1e-12)


def test_fit_order_needs_three_points():
    with pytest.raises(ConfigurationError):
        fx.fit_order([ErrorRecord(1e-1, 0.0, 1e-1), ErrorRecord(1e-2, 0.0, 1e-2)])


def test_sweep_config_validation():
    with pytest.raises(ConfigurationError):
        SweepConfig(base=tiny_case(), eps_values=(1e-2, 1e-1))  # ascending
    with pytest.raises(ConfigurationError):
        SweepConfig(base=tiny_case(), eps_values=(1e-1, -1e-2))
    with pytest.raises(ConfigurationError):
        SweepConfig(base=tiny_case(), xi_mode="bogus")
    cfg = SweepConfig(base=tiny_case(), eps_values=(1e-1, 1e-2), xi_mode="equal-eps")
    assert cfg.xi_for(1e-2) == 1e-2
    assert SweepConfig(base=tiny_case()).xi_for(1e-2) == 0.0


def test_single_entry_sweep_matches_direct_run(tiny_profile):
    # the streamed error must equal an independent trajectory-based norm
    case = tiny_case()
    cfg = SweepConfig(base=case, eps_values=(1e-2,), xi_mode="zero")
    (entry,) = fx.convergence_sweep(cfg, profile=tiny_profile)

    g = case.run_grid()
    sol = fx.exact_solution(tiny_profile, g)
    u0, v0 = fx.initial_uv(sol.profile.z0, case.mu, case.law)
    diffs = []
    fx.run(case.parameters(eps=1e-2, xi=0.0), u0, v0, observers=(
        lambda n, t, s: diffs.append(case.mu * s.u + s.v
                                     - fx.exact_solution_at(sol, t)),))
    want = fx.l2_spacetime_norm(diffs, g, case.time_grid())
    assert entry.l2_error == pytest.approx(want, rel=1e-12)
    assert entry.xi == 0.0


def test_sweep_csv_round_trip_and_determinism(tmp_path, tiny_profile):
    case = tiny_case()
    cfg = SweepConfig(base=case, eps_values=(2e-2, 1e-2), xi_mode="zero")
    cases = fx.convergence_sweep(cfg, outdir=tmp_path, profile=tiny_profile)
    path = tmp_path / sweep_csv_name(cfg)
    assert path.exists()
    parsed = read_error_csv(path)
    assert [p[0] for p in parsed] == [c.eps for c in cases]
    assert [p[1] for p in parsed] == [c.l2_error for c in cases]
    first_bytes = path.read_bytes()
    fx.convergence_sweep(cfg, outdir=tmp_path, profile=tiny_profile)
    assert path.read_bytes() == first_bytes


def test_error_csv_writer_is_exact(tmp_path):
    cases = [ErrorRecord(0.1, 0.0, 1.0 / 3.0), ErrorRecord(0.01, 0.0, 2.0 / 7.0)]
    path = tmp_path / "errors.csv"
    write_error_csv(cases, path)
    parsed = read_error_csv(path)
    for (eps, err), rec in zip(parsed, cases):
        assert eps == rec.eps
        assert err == rec.l2_error


def test_csv_names():
    assert sweep_csv_name(SweepConfig(base=tiny_case())) == "L2_error_xi_0.csv"
    assert sweep_csv_name(SweepConfig(base=tiny_case(), xi_mode="equal-eps")) \
        == "L2_error_xi_eps.csv"
    case2 = CaseConfig(dim=2, mu=0.4, law=LAW, dt=0.01, h=0.25, t_final=0.02)
    assert sweep_csv_name(SweepConfig(base=case2, xi_mode="equal-eps")) \
        == "L2_error_xi_eps_2d.csv"


def test_extinction_study_tiny(tmp_path, tiny_profile):
    # horizon past the extinction time of the exact solution
    case = tiny_case(eps=1e-3, xi=1e-3, t_final=0.4)
    samples = fx.extinction_study(case, outdir=tmp_path, profile=tiny_profile)
    assert len(samples) == case.time_grid().n_steps + 1

    t_star = fx.extinction_time(tiny_profile.c, LAW)
    for s in samples:
        if s.t >= t_star:
            assert s.lq_norm_exact == 0.0
        else:
            assert s.lq_norm_exact > 0.0
        assert s.lq_norm_discrete > 0.0

    g = case.run_grid()
    z0r = fx.restrict(tiny_profile.z0, tiny_profile.grid, g)
    want0 = fx.lq_norm(z0r, g, LAW.q)
    assert samples[0].lq_norm_discrete == pytest.approx(want0, rel=1e-12)
    assert samples[0].lq_norm_exact == pytest.approx(want0, rel=1e-12)

    for name in ("Lq_norm.csv", "Lq_norm_true.csv"):
        lines = (tmp_path / name).read_text().splitlines()
        assert lines[0] == "t,Lq_norm"
        assert len(lines) == len(samples) + 1


def test_residual_study_scaling_and_saturation(tiny_profile):
    # residual decreases with eps and is O(1) when the reaction is off
    cfg = SweepConfig(base=tiny_case(), eps_values=(1e6, 1e-1, 1e-3),
                      xi_mode="zero")
    records = fx.residual_study(cfg, profile=tiny_profile)
    assert records[0].residual_sq > records[1].residual_sq > records[2].residual_sq
    assert records[0].residual_sq > 1e-3          # reaction off: not small
    assert records[2].residual_sq < 1e-4
    # the xi = 0 ceiling is the closed-form primitive of the inverse law
    g = tiny_case().run_grid()
    sol = fx.exact_solution(tiny_profile, g)
    u0, _ = fx.initial_uv(sol.profile.z0, 0.5, LAW)
    want = float(np.sum(fx.phi_alpha_inverse(u0, LAW)) * g.h)
    assert records[0].bound_constant == pytest.approx(want, rel=1e-12)
    assert records[0].ratio == pytest.approx(records[0].residual_sq / 1e6,
                                             rel=1e-15)


def test_residual_study_includes_eta_term_for_positive_xi(tiny_profile):
    cfg = SweepConfig(base=tiny_case(), eps_values=(1e-1, 1e-2),
                      xi_mode="equal-eps")
    records = fx.residual_study(cfg, profile=tiny_profile)
    g = tiny_case().run_grid()
    sol = fx.exact_solution(tiny_profile, g)
    u0, v0 = fx.initial_uv(sol.profile.z0, 0.5, LAW)
    cu = float(np.sum(fx.phi_alpha_inverse(u0, LAW)) * g.h)
    cv = float(sum(fx.phi_eta_inverse(float(w), 0.5, LAW) for w in v0) * g.h)
    for rec in records:
        assert rec.bound_constant == pytest.approx(cu + rec.xi * cv, rel=1e-10)
    assert records[0].bound_constant > records[1].bound_constant > cu


def test_ap_check_small_configurations(tiny_profile):
    tight = tiny_case(eps=1e-8, xi=1e-8)
    loose = tiny_case(eps=1e-2, xi=1e-2)
    gap_tight = fx.ap_check(tight, profile=tiny_profile)
    gap_loose = fx.ap_check(loose, profile=tiny_profile)
    assert gap_tight <= 1e-6
    assert gap_loose >= 10.0 * gap_tight
    zero_gap = fx.ap_check(tiny_case(eps=1e-8, xi=1e-8, t_final=0.02),
                           profile=tiny_profile)
    assert zero_gap <= 1e-6


def test_log_linear_fit_recovers_exponential():
    t = np.linspace(0.0, 1.0, 101)
    samples = [fx.NormSample(ti, float(np.exp(-3.0 * ti) * 2.0), 0.0) for ti in t]
    slope, r2 = fx.log_linear_fit(samples, 0.2, 0.8)
    assert slope == pytest.approx(-3.0, rel=1e-10)
    assert r2 == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ConfigurationError):
        fx.log_linear_fit(samples[:2], 0.0, 1.0)
    zero_tail = samples[:-1] + [fx.NormSample(1.0, 0.0, 0.0)]
    with pytest.raises(ConfigurationError):
        fx.log_linear_fit(zero_tail, 0.2, 1.0)


def test_error_monotone_in_eps_tiny(tiny_profile):
    cfg = SweepConfig(base=tiny_case(), eps_values=(1e-1, 1e-2, 1e-3),
                      xi_mode="zero")
    cases = fx.convergence_sweep(cfg, profile=tiny_profile)
    errs = [c.l2_error for c in cases]
    assert errs[0] > errs[1] > errs[2] > 0.0
