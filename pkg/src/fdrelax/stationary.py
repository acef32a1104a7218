"""Stationary profile, compatible initial data, and the exact solution.

The normalized positive solution z0 of the nonlinear eigenvalue problem

    -lap z = c * alpha(z),   z = 0 on the boundary,   lq_norm(z) = 1

seeds a separable exact solution of the singular diffusion problem that
vanishes identically after a finite extinction time

    t_star = (q - 1) / ((q - 2) * c),      c = h1_seminorm_sq(z0).

The solve uses Newton on the augmented unknowns (z, c): the normalization
is a hard constraint row, the linear algebra is a bordered elimination on
the symmetric indefinite block, and coarse-to-fine mesh continuation keeps
the fine-grid iteration count small.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import RegularGridInterpolator

from .constitutive import PowerLaw, alpha, alpha_prime, lipschitz_on
from .errors import ConfigurationError, NewtonError
from .grid import Grid, assemble_laplacian, h1_seminorm_sq, lq_norm, restrict
from .linsolve import LaggedLU

__all__ = [
    "StationaryProfile",
    "ExactSolution",
    "LaneEmdenStats",
    "solve_lane_emden",
    "solve_lane_emden_detailed",
    "extinction_time",
    "exact_solution",
    "exact_solution_at",
    "initial_uv",
]

_MAX_HALVINGS = 30
_CONTINUATION_THRESHOLD = 160  # cells per axis above which 2-D solves warm-start


@dataclass(frozen=True)
class StationaryProfile:
    """Normalized positive profile z0 with its energy c on a given grid."""

    z0: np.ndarray
    c: float
    law: PowerLaw
    grid: Grid

    @property
    def q(self) -> float:
        return self.law.q


@dataclass(frozen=True)
class ExactSolution:
    """Separable solution data: profile on the evaluation grid, extinction time."""

    profile: StationaryProfile
    t_star: float


@dataclass(frozen=True)
class LaneEmdenStats:
    iterations: int
    residual_inf: float
    increments: tuple


def extinction_time(c: float, law: PowerLaw) -> float:
    """t_star = (q-1)/((q-2) c) for energy c > 0."""
    if not c > 0:
        raise ConfigurationError(f"energy must be positive, got c={c}")
    return (law.q - 1.0) / ((law.q - 2.0) * c)


def _sine_seed(g: Grid, law: PowerLaw):
    """Normalized product of sines with its Rayleigh-quotient energy."""
    x = g.axis_coords()
    s = np.sin(np.pi * x / g.length)
    z = s if g.dim == 1 else np.outer(s, s).ravel()
    z = z / lq_norm(z, g, law.q)
    return z, h1_seminorm_sq(z, g)


def _residual(z, c, neg_lap, g, law, hd):
    f = neg_lap @ z - c * alpha(z, law)
    gcon = float(np.sum(np.abs(z) ** law.q) * hd - 1.0)
    return f, gcon


def _newton_on_grid(z, c, g: Grid, law: PowerLaw, tol: float, max_iter: int):
    """Damped augmented Newton for (z, c); returns stats of the level."""
    neg_lap = -assemble_laplacian(g)
    hd = g.h ** g.dim
    q = law.q
    solver = LaggedLU(rtol=1e-12)
    increments = []
    f, gcon = _residual(z, c, neg_lap, g, law, hd)
    for it in range(1, max_iter + 1):
        res0 = max(float(np.max(np.abs(f))), abs(gcon))
        az = alpha(z, law)
        stiff = neg_lap - sp.diags(c * alpha_prime(z, law))
        # bordered elimination: two solves with the symmetric block, then
        # the scalar Schur complement for the energy increment
        a_vec = solver.solve(stiff, -f)
        b_vec = solver.solve(stiff, az)
        grad = q * hd * az
        denom = float(grad @ b_vec)
        if denom == 0.0 or not np.isfinite(denom):
            raise NewtonError("singular bordered system in stationary solve",
                              increments=increments)
        dc = (-gcon - float(grad @ a_vec)) / denom
        dz = a_vec + dc * b_vec

        step = 1.0
        for _ in range(_MAX_HALVINGS):
            z_new = z + step * dz
            c_new = c + step * dc
            f_new, g_new = _residual(z_new, c_new, neg_lap, g, law, hd)
            res_new = max(float(np.max(np.abs(f_new))), abs(g_new))
            if np.all(z_new > 0.0) and res_new <= res0:
                break
            step *= 0.5
        z, c, f, gcon = z_new, c_new, f_new, g_new
        inc = step * max(float(np.max(np.abs(dz))), abs(dc))
        increments.append(inc)
        if not np.isfinite(inc):
            raise NewtonError("non-finite Newton increment in stationary solve",
                              increments=increments)
        if inc <= tol:
            res_inf = max(float(np.max(np.abs(f))), abs(gcon))
            return z, c, LaneEmdenStats(it, res_inf, tuple(increments))
    raise NewtonError(
        f"stationary Newton did not converge in {max_iter} iterations",
        increments=increments,
    )


def _prolong(z, g_from: Grid, g_to: Grid) -> np.ndarray:
    """Linear interpolation between grids, zero boundary ring included."""
    n = g_from.n_per_axis
    pts_from = np.concatenate(([0.0], g_from.axis_coords(), [g_from.length]))
    if g_from.dim == 1:
        full = np.zeros(n + 2)
        full[1:-1] = z
        interp = RegularGridInterpolator((pts_from,), full, method="linear")
        return interp(g_to.axis_coords()[:, None])
    full = np.zeros((n + 2, n + 2))
    full[1:-1, 1:-1] = z.reshape(g_from.shape)
    interp = RegularGridInterpolator((pts_from, pts_from), full, method="linear")
    xt = g_to.axis_coords()
    X, Y = np.meshgrid(xt, xt, indexing="ij")
    return interp(np.column_stack([X.ravel(), Y.ravel()]))


def _continuation_levels(g: Grid):
    sizes = [g.n_cells]
    while g.dim == 2 and sizes[-1] > _CONTINUATION_THRESHOLD:
        sizes.append((sizes[-1] + 1) // 2)
    return [Grid(g.dim, g.length, g.length / s) for s in reversed(sizes)]


def solve_lane_emden_detailed(g_fine: Grid, law: PowerLaw, tol: float = 1e-10,
                              max_iter: int = 50):
    """Solve the constrained eigenvalue problem; also return solve statistics.

    Newton terminates when the sup-norm of the accepted increment (z and c
    jointly) drops to ``tol``.  Steps are halved while they would lose
    positivity or increase the residual.
    """
    levels = _continuation_levels(g_fine)
    z, c = _sine_seed(levels[0], law)
    stats = None
    for i, g in enumerate(levels):
        if i > 0:
            z = _prolong(z, levels[i - 1], g)
            z = np.maximum(z, 0.0)
            nrm = lq_norm(z, g, law.q)
            if nrm == 0.0:
                raise NewtonError("prolonged iterate vanished")
            z = z / nrm
            c = h1_seminorm_sq(z, g)
        z, c, stats = _newton_on_grid(z, c, g, law, tol, max_iter)
    if not np.all(z > 0.0):
        raise NewtonError("converged stationary iterate is not positive",
                          increments=stats.increments)
    return StationaryProfile(z0=z, c=float(c), law=law, grid=g_fine), stats


def solve_lane_emden(g_fine: Grid, law: PowerLaw, tol: float = 1e-10,
                     max_iter: int = 50) -> StationaryProfile:
    profile, _ = solve_lane_emden_detailed(g_fine, law, tol, max_iter)
    return profile


def exact_solution(profile: StationaryProfile, run_grid: Grid) -> ExactSolution:
    """Restrict a solved profile to the run grid, keeping the fine-grid energy."""
    z0r = restrict(profile.z0, profile.grid, run_grid)
    restricted = StationaryProfile(z0=z0r, c=profile.c, law=profile.law,
                                   grid=run_grid)
    return ExactSolution(profile=restricted, t_star=extinction_time(profile.c,
                                                                    profile.law))


def exact_solution_at(sol: ExactSolution, t: float) -> np.ndarray:
    """(1 - t/t_star)_+^(1/(q-2)) * z0, sampled nodewise; zero for t >= t_star."""
    if t < 0:
        raise ConfigurationError(f"time must be nonnegative, got {t}")
    rem = 1.0 - t / sol.t_star
    if rem <= 0.0:
        return np.zeros_like(sol.profile.z0)
    factor = rem ** (1.0 / (sol.profile.law.q - 2.0))
    return factor * sol.profile.z0


def initial_uv(z0_coarse: np.ndarray, mu: float, law: PowerLaw):
    """Compatible pair u0 = alpha(z0), v0 = z0 - mu*alpha(z0).

    Requires mu below the reciprocal Lipschitz constant of alpha on the
    range of z0; the error message names the largest admissible mu.
    """
    if not mu > 0:
        raise ConfigurationError(f"mu must be positive, got {mu}")
    z0_coarse = np.asarray(z0_coarse, dtype=float)
    bound = float(np.max(np.abs(z0_coarse)))
    lip = lipschitz_on(bound, law)
    if lip > 0 and mu >= 1.0 / lip:
        raise ConfigurationError(
            f"mu={mu} is inadmissible for data with max |z0| = {bound:.6g}; "
            f"require mu < {1.0 / lip:.6g}"
        )
    u0 = alpha(z0_coarse, law)
    v0 = z0_coarse - mu * u0
    return u0, v0
