"""Experiment drivers: relaxation-convergence sweep, extinction decay,
reaction-residual scaling, and the asymptotic-preserving check.

Each driver builds its initial data from the stationary profile solved on a
grid ``fine_factor`` times finer than the run grid, restricted to the run
nodes, and measures against the separable exact solution carrying the
fine-grid energy.  All CSV output uses 17 significant digits so values
round-trip bit-exactly.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .constitutive import PowerLaw, phi_alpha_inverse, phi_eta_inverse
from .errors import ConfigurationError
from .grid import Grid, TimeGrid, lq_norm
from .stationary import (ExactSolution, StationaryProfile, exact_solution,
                         exact_solution_at, initial_uv, solve_lane_emden)
from .stepper import NewtonSettings, RunParameters, run

__all__ = [
    "CaseConfig",
    "SweepConfig",
    "ErrorRecord",
    "SweepCase",
    "NormSample",
    "ResidualRecord",
    "DEFAULT_EPS_LADDER",
    "SLOPE_FIT_WINDOW",
    "EXTINCTION_FIT_WINDOW",
    "case_1d",
    "case_2d",
    "convergence_sweep",
    "error_records",
    "fit_order",
    "extinction_study",
    "residual_study",
    "ap_check",
    "log_linear_fit",
    "write_error_csv",
    "read_error_csv",
    "write_norm_csvs",
    "sweep_csv_name",
]

DEFAULT_EPS_LADDER = (1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3, 5e-4)
SLOPE_FIT_WINDOW = (1e-3, 1e-1)
EXTINCTION_FIT_WINDOW = (0.4, 0.6)


@dataclass(frozen=True)
class CaseConfig:
    """Scalars describing a single run (grid, horizon, physics, solver)."""

    dim: int
    mu: float
    law: PowerLaw
    dt: float
    h: float
    t_final: float
    length: float = 1.0
    eps: float = 1e-4
    xi: float = 1e-4
    fine_factor: int = 10
    newton: NewtonSettings = NewtonSettings()

    def run_grid(self) -> Grid:
        return Grid(self.dim, self.length, self.h)

    def fine_grid(self) -> Grid:
        if self.fine_factor < 1:
            raise ConfigurationError("fine_factor must be a positive integer")
        return Grid(self.dim, self.length, self.h / self.fine_factor)

    def time_grid(self) -> TimeGrid:
        return TimeGrid(self.dt, self.t_final)

    def parameters(self, eps=None, xi=None) -> RunParameters:
        return RunParameters(
            law=self.law,
            mu=self.mu,
            eps=self.eps if eps is None else eps,
            xi=self.xi if xi is None else xi,
            time=self.time_grid(),
            grid=self.run_grid(),
        )


def case_1d(**overrides) -> CaseConfig:
    """1-D reference configuration: mu=0.5, q=2.5, dt=1e-4, h=1e-2, T=0.6."""
    base = dict(dim=1, mu=0.5, law=PowerLaw(2.5), dt=1e-4, h=1e-2, t_final=0.6)
    base.update(overrides)
    return CaseConfig(**base)


def case_2d(**overrides) -> CaseConfig:
    """2-D reference configuration: mu=0.4, q=2.5, dt=1e-4, h=1e-2, T=0.18."""
    base = dict(dim=2, mu=0.4, law=PowerLaw(2.5), dt=1e-4, h=1e-2, t_final=0.18)
    base.update(overrides)
    return CaseConfig(**base)


@dataclass(frozen=True)
class SweepConfig:
    """Relaxation ladder over a base case; eps strictly positive, descending."""

    base: CaseConfig
    eps_values: tuple = DEFAULT_EPS_LADDER
    xi_mode: str = "zero"  # or "equal-eps"

    def __post_init__(self):
        if self.xi_mode not in ("zero", "equal-eps"):
            raise ConfigurationError(f"unknown xi_mode {self.xi_mode!r}")
        eps = tuple(float(e) for e in self.eps_values)
        if len(eps) == 0 or any(e <= 0 for e in eps):
            raise ConfigurationError("eps_values must be positive")
        if any(a <= b for a, b in zip(eps, eps[1:])):
            raise ConfigurationError("eps_values must be strictly descending")
        object.__setattr__(self, "eps_values", eps)

    def xi_for(self, eps: float) -> float:
        return 0.0 if self.xi_mode == "zero" else eps


@dataclass(frozen=True)
class ErrorRecord:
    eps: float
    xi: float
    l2_error: float


@dataclass(frozen=True)
class SweepCase:
    """One sweep entry: the error record plus run diagnostics."""

    eps: float
    xi: float
    l2_error: float
    residual_sq: float       # squared space-time norm of u - alpha(z)
    max_abs_u: float
    max_abs_v: float


@dataclass(frozen=True)
class NormSample:
    t: float
    lq_norm_discrete: float
    lq_norm_exact: float


@dataclass(frozen=True)
class ResidualRecord:
    eps: float
    xi: float
    residual_sq: float
    ratio: float              # residual_sq / eps
    bound_constant: float     # sum phi_{alpha^-1}(u0) h^d + xi sum phi_{eta^-1}(v0) h^d


def _prepare(case: CaseConfig, profile: StationaryProfile | None):
    if profile is None:
        profile = solve_lane_emden(case.fine_grid(), case.law)
    sol = exact_solution(profile, case.run_grid())
    u0, v0 = initial_uv(sol.profile.z0, case.mu, case.law)
    return profile, sol, u0, v0


class _CaseAccumulator:
    """Streams one run: space-time error, reaction residual, sup norms."""

    def __init__(self, case: CaseConfig, sol: ExactSolution):
        self.case = case
        self.sol = sol
        self.z0 = sol.profile.z0
        self.err_sq = 0.0
        self.res_sq = 0.0
        self.max_u = 0.0
        self.max_v = 0.0

    def __call__(self, n, t, state):
        mu, law = self.case.mu, self.case.law
        z = mu * state.u + state.v
        e = z - exact_solution_at(self.sol, t)
        self.err_sq += float(np.dot(e, e))
        r = state.u - np.abs(z) ** (law.q - 2.0) * z
        self.res_sq += float(np.dot(r, r))
        self.max_u = max(self.max_u, float(np.max(np.abs(state.u))))
        self.max_v = max(self.max_v, float(np.max(np.abs(state.v))))

    def finish(self, eps, xi) -> SweepCase:
        g = self.case.run_grid()
        w = g.h ** g.dim * self.case.dt
        return SweepCase(
            eps=eps,
            xi=xi,
            l2_error=float(np.sqrt(self.err_sq * w)),
            residual_sq=self.res_sq * w,
            max_abs_u=self.max_u,
            max_abs_v=self.max_v,
        )


def _run_case(case: CaseConfig, eps, xi, sol, u0, v0) -> SweepCase:
    acc = _CaseAccumulator(case, sol)
    run(case.parameters(eps=eps, xi=xi), u0, v0, observers=(acc,),
        settings=case.newton)
    return acc.finish(eps, xi)


def sweep_csv_name(cfg: SweepConfig) -> str:
    tag = "0" if cfg.xi_mode == "zero" else "eps"
    dim_tag = "_2d" if cfg.base.dim == 2 else ""
    return f"L2_error_xi_{tag}{dim_tag}.csv"


def convergence_sweep(cfg: SweepConfig, outdir=None,
                      profile: StationaryProfile | None = None):
    """Run the ladder, largest eps first; optionally write the error CSV."""
    _, sol, u0, v0 = _prepare(cfg.base, profile)
    cases = [
        _run_case(cfg.base, eps, cfg.xi_for(eps), sol, u0, v0)
        for eps in cfg.eps_values
    ]
    if outdir is not None:
        write_error_csv(cases, os.path.join(outdir, sweep_csv_name(cfg)))
    return cases


def error_records(cases) -> list:
    return [ErrorRecord(c.eps, c.xi, c.l2_error) for c in cases]


def fit_order(records) -> float:
    """Least-squares slope of log(l2_error) against log(eps)."""
    eps = np.array([r.eps for r in records], dtype=float)
    err = np.array([r.l2_error for r in records], dtype=float)
    if len(np.unique(eps)) < 3:
        raise ConfigurationError("order fit needs at least 3 distinct eps values")
    if np.any(err <= 0):
        raise ConfigurationError("order fit needs positive errors")
    slope, _ = np.polyfit(np.log(eps), np.log(err), 1)
    return float(slope)


def residual_study(cfg: SweepConfig,
                   profile: StationaryProfile | None = None):
    """Reaction-residual scaling across the ladder.

    Reports, per eps, the squared space-time residual norm, its ratio to
    eps, and the data-dependent ceiling
    ``sum phi_{alpha^-1}(u0) h^d + xi * sum phi_{eta^-1}(v0) h^d``.
    """
    case = cfg.base
    _, sol, u0, v0 = _prepare(case, profile)
    g = case.run_grid()
    hd = g.h ** g.dim
    const_u = float(np.sum(phi_alpha_inverse(u0, case.law)) * hd)
    const_v = None
    records = []
    for eps in cfg.eps_values:
        xi = cfg.xi_for(eps)
        sc = _run_case(case, eps, xi, sol, u0, v0)
        if xi != 0.0 and const_v is None:
            const_v = float(
                sum(phi_eta_inverse(float(w), case.mu, case.law) for w in v0) * hd
            )
        bound = const_u + (xi * const_v if xi != 0.0 else 0.0)
        records.append(ResidualRecord(eps=eps, xi=xi, residual_sq=sc.residual_sq,
                                      ratio=sc.residual_sq / eps,
                                      bound_constant=bound))
    return records


def extinction_study(case: CaseConfig, outdir=None,
                     profile: StationaryProfile | None = None):
    """Norm decay of the discrete and exact solutions at every step."""
    _, sol, u0, v0 = _prepare(case, profile)
    g = case.run_grid()
    q = case.law.q
    samples = []

    def observer(n, t, state):
        z = case.mu * state.u + state.v
        samples.append(NormSample(
            t=t,
            lq_norm_discrete=lq_norm(z, g, q),
            lq_norm_exact=lq_norm(exact_solution_at(sol, t), g, q),
        ))

    run(case.parameters(), u0, v0, observers=(observer,), settings=case.newton)
    if outdir is not None:
        write_norm_csvs(samples, outdir)
    return samples


def ap_check(case: CaseConfig | None = None,
             profile: StationaryProfile | None = None) -> float:
    """Max sup-norm gap between the coupled scheme and the direct scheme.

    Both are started from the same restricted profile; the coupled run uses
    compatible (u0, v0).  Default case: eps = xi = 1e-8 on a coarse 1-D
    grid, where the relaxation gap is far below the schemes' tolerances.
    """
    from .stepper import CoupledStepper, step_fde
    from .constitutive import alpha

    if case is None:
        case = case_1d(eps=1e-8, xi=1e-8, h=0.05, dt=1e-3, t_final=0.1)
    _, sol, u0, v0 = _prepare(case, profile)
    p = case.parameters()
    stepper = CoupledStepper(p, case.newton)
    u, v = u0.copy(), v0.copy()
    z_fde = sol.profile.z0.copy()
    a_prev = np.asarray(alpha(z_fde, case.law))
    gap = 0.0
    for _ in range(p.time.n_steps):
        u, v = stepper.step(u, v)
        z_fde = step_fde(z_fde, a_prev, p, case.newton)
        a_prev = np.asarray(alpha(z_fde, case.law))
        gap = max(gap, float(np.max(np.abs(case.mu * u + v - z_fde))))
    return gap


def log_linear_fit(samples, t_min: float, t_max: float):
    """Slope and R^2 of a linear fit to log(norm) on [t_min, t_max].

    Returns (slope, r_squared); raises if any norm in the window is zero,
    since the decay rate is undefined there.
    """
    t = np.array([s.t for s in samples])
    y = np.array([s.lq_norm_discrete for s in samples])
    mask = (t >= t_min) & (t <= t_max)
    if mask.sum() < 3:
        raise ConfigurationError("fit window contains fewer than 3 samples")
    if np.any(y[mask] <= 0.0):
        raise ConfigurationError("fit window contains nonpositive norms")
    ly = np.log(y[mask])
    slope, intercept = np.polyfit(t[mask], ly, 1)
    fitted = slope * t[mask] + intercept
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


# -- CSV serialization --------------------------------------------------------

def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_error_csv(cases, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("eps,L2_error\n")
        for c in cases:
            fh.write(f"{_fmt(c.eps)},{_fmt(c.l2_error)}\n")


def read_error_csv(path):
    out = []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != "eps,L2_error":
            raise ConfigurationError(f"unexpected header {header!r} in {path}")
        for line in fh:
            se, sv = line.strip().split(",")
            out.append((float(se), float(sv)))
    return out


def write_norm_csvs(samples, outdir) -> None:
    with open(os.path.join(outdir, "Lq_norm.csv"), "w", encoding="ascii",
              newline="\n") as fh:
        fh.write("t,Lq_norm\n")
        for s in samples:
            fh.write(f"{_fmt(s.t)},{_fmt(s.lq_norm_discrete)}\n")
    with open(os.path.join(outdir, "Lq_norm_true.csv"), "w", encoding="ascii",
              newline="\n") as fh:
        fh.write("t,Lq_norm\n")
        for s in samples:
            fh.write(f"{_fmt(s.t)},{_fmt(s.lq_norm_exact)}\n")
