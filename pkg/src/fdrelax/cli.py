"""Command-line front end.

Subcommands: ``stationary``, ``run``, ``sweep``, ``extinction``, ``apcheck``.
Configuration is a flat ``key = value`` text file (``--config``) with
per-key overrides (``--set key=value``, flag wins).  Every invocation
writes its artifacts plus a canonical config echo into ``<outdir>/<command>/``,
so reruns with the same configuration are byte-identical.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .constitutive import PowerLaw
from .errors import ConfigurationError, FdrelaxError
from .experiments import (DEFAULT_EPS_LADDER, SLOPE_FIT_WINDOW, CaseConfig,
                          SweepConfig, ap_check, convergence_sweep,
                          extinction_study, fit_order, sweep_csv_name)
from .grid import Grid, TimeGrid, dump_field_csv, lq_norm
from .stationary import (exact_solution, extinction_time, initial_uv,
                         solve_lane_emden_detailed)
from .stepper import NewtonSettings, run

__all__ = ["main"]


def _parse_floats(s: str):
    return tuple(float(tok) for tok in s.split(",") if tok.strip())


_SCHEMA = {
    # key: (parser, default or None when dim-dependent)
    "dim": (int, 1),
    "q": (float, 2.5),
    "mu": (float, None),          # 0.5 in 1-D, 0.4 in 2-D
    "eps": (float, 1e-4),
    "xi": (float, 1e-4),
    "length": (float, 1.0),
    "h": (float, 1e-2),
    "dt": (float, 1e-4),
    "t_final": (float, None),     # 0.6 in 1-D, 0.18 in 2-D
    "fine_factor": (int, 10),
    "eps_values": (_parse_floats, DEFAULT_EPS_LADDER),
    "xi_mode": (str, "zero"),
    "newton_tol": (float, 1e-10),
    "newton_max_iter": (int, 50),
    "linear_tol": (float, 1e-12),
    "outdir": (str, "out"),
    "initial_data": (str, "stationary"),
    "snapshot_times": (_parse_floats, ()),
}

_DIM_DEFAULTS = {1: {"mu": 0.5, "t_final": 0.6}, 2: {"mu": 0.4, "t_final": 0.18}}

# used when the corresponding key was not set explicitly
_APCHECK_DEFAULTS = {"eps": 1e-8, "xi": 1e-8, "h": 0.05, "dt": 1e-3,
                     "t_final": 0.1}


def _parse_config_text(text: str, source: str) -> dict:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigurationError(
                f"{source}:{lineno}: expected 'key = value', got {line!r}"
            )
        key, value = (part.strip() for part in body.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigurationError(f"{source}:{lineno}: unknown config key {key!r}")
        raw[key] = value
    return raw


def load_config(path: str | None, overrides) -> dict:
    """Merge file and --set overrides into a typed config dict.

    The returned dict carries every key; ``_explicit`` records which keys
    the user actually set.
    """
    raw = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            raw.update(_parse_config_text(fh.read(), path))
    for item in overrides or ():
        if "=" not in item:
            raise ConfigurationError(f"--set expects key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigurationError(f"unknown config key {key!r}")
        raw[key] = value

    cfg = {}
    for key, (parse, default) in _SCHEMA.items():
        if key in raw:
            try:
                cfg[key] = parse(raw[key])
            except ConfigurationError:
                raise
            except ValueError as exc:
                raise ConfigurationError(f"bad value for {key!r}: {exc}") from exc
        else:
            cfg[key] = default
    for key, value in _DIM_DEFAULTS.get(cfg["dim"], {}).items():
        if cfg[key] is None:
            cfg[key] = value
    cfg["_explicit"] = frozenset(raw)
    _validate(cfg)
    return cfg


def _validate(cfg: dict):
    if cfg["dim"] not in (1, 2):
        raise ConfigurationError(f"dim must be 1 or 2, got {cfg['dim']}")
    if cfg["initial_data"] not in ("stationary", "zero"):
        raise ConfigurationError(
            f"initial_data must be 'stationary' or 'zero', got {cfg['initial_data']!r}"
        )
    PowerLaw(cfg["q"])                      # q > 2
    if not cfg["mu"] > 0:
        raise ConfigurationError(f"mu must be positive, got {cfg['mu']}")
    if not cfg["eps"] > 0:
        raise ConfigurationError(f"eps must be positive, got {cfg['eps']}")
    if cfg["xi"] < 0:
        raise ConfigurationError(f"xi must be nonnegative, got {cfg['xi']}")
    Grid(cfg["dim"], cfg["length"], cfg["h"])        # L/h integral
    TimeGrid(cfg["dt"], cfg["t_final"])              # T/dt integral


def _case_from(cfg: dict) -> CaseConfig:
    return CaseConfig(
        dim=cfg["dim"],
        mu=cfg["mu"],
        law=PowerLaw(cfg["q"]),
        dt=cfg["dt"],
        h=cfg["h"],
        t_final=cfg["t_final"],
        length=cfg["length"],
        eps=cfg["eps"],
        xi=cfg["xi"],
        fine_factor=cfg["fine_factor"],
        newton=NewtonSettings(tol_increment=cfg["newton_tol"],
                              max_iter=cfg["newton_max_iter"],
                              linear_tol=cfg["linear_tol"]),
    )


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, tuple):
        return ",".join(format(float(v), ".17g") for v in value)
    return str(value)


def _command_dir(cfg: dict, command: str) -> str:
    path = os.path.join(cfg["outdir"], command)
    os.makedirs(path, exist_ok=True)
    with open(os.path.join(path, "config.txt"), "w", encoding="ascii",
              newline="\n") as fh:
        for key in sorted(k for k in cfg if not k.startswith("_")):
            fh.write(f"{key} = {_fmt(cfg[key])}\n")
    return path


def cmd_stationary(cfg: dict) -> int:
    case = _case_from(cfg)
    outdir = _command_dir(cfg, "stationary")
    profile, stats = solve_lane_emden_detailed(case.fine_grid(), case.law,
                                               tol=cfg["newton_tol"])
    t_star = extinction_time(profile.c, case.law)
    dump_field_csv(profile.z0, profile.grid,
                   os.path.join(outdir, "profile.csv"), value_name="z0")
    with open(os.path.join(outdir, "metadata.txt"), "w", encoding="ascii",
              newline="\n") as fh:
        fh.write(f"q = {_fmt(case.law.q)}\n")
        fh.write(f"c = {_fmt(profile.c)}\n")
        fh.write(f"t_star = {_fmt(t_star)}\n")
        fh.write(f"residual_inf = {_fmt(stats.residual_inf)}\n")
        fh.write(f"iterations = {stats.iterations}\n")
    print(f"t_star = {t_star:.6g}")
    print(f"c = {profile.c:.10g}")
    print(f"residual_inf = {stats.residual_inf:.3e}")
    print(f"iterations = {stats.iterations}")
    return 0


def cmd_run(cfg: dict) -> int:
    case = _case_from(cfg)
    outdir = _command_dir(cfg, "run")
    g = case.run_grid()
    if cfg["initial_data"] == "zero":
        u0 = np.zeros(g.size)
        v0 = np.zeros(g.size)
    else:
        profile = _solve_profile(case)
        sol = exact_solution(profile, g)
        u0, v0 = initial_uv(sol.profile.z0, case.mu, case.law)

    pending = sorted(set(cfg["snapshot_times"]))
    norms = []

    def observer(n, t, state):
        z = case.mu * state.u + state.v
        norms.append((t, lq_norm(z, g, case.law.q)))
        while pending and t >= pending[0] - 1e-12:
            pending.pop(0)
            dump_field_csv(z, g, os.path.join(outdir, f"snapshot_n{n:06d}.csv"),
                           value_name="z")

    run(case.parameters(), u0, v0, observers=(observer,), settings=case.newton)
    with open(os.path.join(outdir, "norms.csv"), "w", encoding="ascii",
              newline="\n") as fh:
        fh.write("t,Lq_norm\n")
        for t, v in norms:
            fh.write(f"{format(t, '.17g')},{format(v, '.17g')}\n")
    print(f"steps = {case.time_grid().n_steps}")
    print(f"final_Lq_norm = {norms[-1][1]:.6e}")
    return 0


def _solve_profile(case: CaseConfig):
    from .stationary import solve_lane_emden
    return solve_lane_emden(case.fine_grid(), case.law,
                            tol=case.newton.tol_increment)


def cmd_sweep(cfg: dict) -> int:
    case = _case_from(cfg)
    outdir = _command_dir(cfg, "sweep")
    sweep = SweepConfig(base=case, eps_values=cfg["eps_values"],
                        xi_mode=cfg["xi_mode"])
    cases = convergence_sweep(sweep, outdir=outdir)
    lo, hi = SLOPE_FIT_WINDOW
    window = [c for c in cases if lo <= c.eps <= hi]
    for c in cases:
        print(f"eps = {c.eps:.6g}  L2_error = {c.l2_error:.6e}")
    if len({c.eps for c in window}) >= 3:
        print(f"slope = {fit_order(window):.4f}")
    else:
        print("slope = n/a (fewer than 3 ladder points in the fit window)")
    print(f"csv = {os.path.join(outdir, sweep_csv_name(sweep))}")
    return 0


def cmd_extinction(cfg: dict) -> int:
    case = _case_from(cfg)
    outdir = _command_dir(cfg, "extinction")
    samples = extinction_study(case, outdir=outdir)
    print(f"samples = {len(samples)}")
    print(f"final_discrete_norm = {samples[-1].lq_norm_discrete:.6e}")
    print(f"final_exact_norm = {samples[-1].lq_norm_exact:.6e}")
    return 0


def cmd_apcheck(cfg: dict) -> int:
    for key, value in _APCHECK_DEFAULTS.items():
        if key not in cfg["_explicit"]:
            cfg = {**cfg, key: value}
    _validate(cfg)
    case = _case_from(cfg)
    _command_dir(cfg, "apcheck")
    gap = ap_check(case)
    print(f"discrepancy = {gap:.6e}")
    return 0


_COMMANDS = {
    "stationary": cmd_stationary,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "extinction": cmd_extinction,
    "apcheck": cmd_apcheck,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fdrelax",
        description="Relaxation approximation of the fast diffusion equation",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="flat key=value config file")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config key")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
        return _COMMANDS[args.command](cfg)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except FdrelaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
