"""Fully implicit coupled scheme and the limiting fast-diffusion scheme.

One step advances (u, v) through the nonlinear system

    (u+ - u) / (mu dt) = lap_h u+ - (1/eps) (u+ - alpha(mu u+ + v+))
    xi (v+ - v) / dt   = lap_h v+ + (mu/eps) (u+ - alpha(mu u+ + v+))

solved by Newton iteration with the exact block Jacobian

    [ I/(mu dt) - lap_h + (1/eps)(I - mu D)    -(1/eps) D                  ]
    [ -(mu/eps)(I - mu D)                      (xi/dt) I - lap_h + (mu/eps) D ]

where D = diag(alpha'(mu u+ + v+)).  The initial guess is the previous
step; convergence is declared when the increment sup-norm falls below the
tolerance.  In 1-D the linearized system is pentadiagonal and solved
directly by a backend kernel; in 2-D it is solved sparse-direct with a
lagged LU reused across steps (see ``fdrelax.linsolve``).

Relaxing eps and xi to zero at fixed dt, h turns the scheme into the direct
implicit discretization of the fast diffusion equation implemented by
``step_fde``; the two are compared by the asymptotic-preserving check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import backend
from .constitutive import (PowerLaw, alpha, alpha_inverse, alpha_prime,
                           lipschitz_on, zeta_inverse)
from .errors import (ConfigurationError, DivergenceError, H3AdvisoryWarning,
                     LinearSolveError, RootFindError, StepFailureError)
from .grid import Grid, TimeGrid, assemble_laplacian
from .linsolve import LaggedLU

__all__ = [
    "NewtonSettings",
    "RunParameters",
    "State",
    "RunResult",
    "CoupledStepper",
    "step",
    "run",
    "step_fde",
    "reaction_residual",
    "linf_ceiling",
]


@dataclass(frozen=True)
class NewtonSettings:
    """Termination controls for the per-step Newton iteration."""

    tol_increment: float = 1e-10   # sup-norm of the Newton increment
    max_iter: int = 50
    linear_tol: float = 1e-12      # relative residual of inner linear solves

    def __post_init__(self):
        if not self.tol_increment > 0:
            raise ConfigurationError("tol_increment must be positive")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be at least 1")


@dataclass(frozen=True)
class RunParameters:
    """All scalars governing a run of the coupled scheme."""

    law: PowerLaw
    mu: float
    eps: float
    xi: float
    time: TimeGrid
    grid: Grid

    def __post_init__(self):
        if not self.mu > 0:
            raise ConfigurationError(f"mu must be positive, got {self.mu}")
        if not self.eps > 0:
            raise ConfigurationError(f"eps must be positive, got {self.eps}")
        if self.xi < 0:
            raise ConfigurationError(f"xi must be nonnegative, got {self.xi}")


@dataclass
class State:
    """Two-field state at step n.  Arrays are owned by the caller."""

    u: np.ndarray
    v: np.ndarray
    n: int = 0

    def z(self, mu: float) -> np.ndarray:
        return mu * self.u + self.v


@dataclass
class RunResult:
    state: State
    newton_iterations: list = field(default_factory=list)


class CoupledStepper:
    """Advances the coupled scheme; holds per-run linear-solver workspace.

    Instances are not shareable across concurrent runs; create one per run.
    """

    def __init__(self, p: RunParameters, settings: NewtonSettings | None = None):
        self.p = p
        self.settings = settings or NewtonSettings()
        self.last_increments: list = []
        if p.grid.dim == 2:
            self._init_2d()

    # -- 2-D sparse machinery ------------------------------------------------

    def _init_2d(self):
        p = self.p
        n = p.grid.size
        lap = assemble_laplacian(p.grid)
        eye = sp.identity(n, format="csr")
        ku = (eye / (p.mu * p.time.dt) - lap).tocsr()
        kv = ((p.xi / p.time.dt) * eye - lap).tocsr()
        template = sp.bmat(
            [[ku + eye, eye], [eye, kv + eye]], format="csr"
        )
        template.sort_indices()
        self._jac = template
        self._lap = lap
        self._base_a = ku.diagonal()
        self._base_e = kv.diagonal()
        rows = np.arange(n)
        self._pos_a = self._positions(template, rows, rows)
        self._pos_b = self._positions(template, rows, rows + n)
        self._pos_c = self._positions(template, rows + n, rows)
        self._pos_e = self._positions(template, rows + n, rows + n)
        self._solver = LaggedLU(rtol=self.settings.linear_tol)

    @staticmethod
    def _positions(m, rows, cols):
        pos = np.empty(rows.shape[0], dtype=np.int64)
        for k in range(rows.shape[0]):
            r = rows[k]
            lo, hi = m.indptr[r], m.indptr[r + 1]
            pos[k] = lo + np.searchsorted(m.indices[lo:hi], cols[k])
        return pos

    def _update_2d(self, u_prev, v_prev, u, v):
        p = self.p
        dt = p.time.dt
        z = p.mu * u + v
        apow = np.abs(z) ** (p.law.q - 2.0)
        a = apow * z
        d = (p.law.q - 1.0) * apow

        f1 = (u - u_prev) / (p.mu * dt) - self._lap @ u + (u - a) / p.eps
        f2 = p.xi * (v - v_prev) / dt - self._lap @ v - p.mu * (u - a) / p.eps

        data = self._jac.data
        data[self._pos_a] = self._base_a + (1.0 - p.mu * d) / p.eps
        data[self._pos_b] = -d / p.eps
        data[self._pos_c] = -p.mu * (1.0 - p.mu * d) / p.eps
        data[self._pos_e] = self._base_e + p.mu * d / p.eps

        rhs = np.concatenate([-f1, -f2])
        dx = self._solver.solve(self._jac, rhs)
        n = u.shape[0]
        return (u + dx[:n], v + dx[n:], float(np.max(np.abs(dx))),
                float(np.max(np.abs(rhs))))

    # -- Newton loop ----------------------------------------------------------

    def step(self, u: np.ndarray, v: np.ndarray):
        """One implicit step from (u, v); returns the new pair of arrays."""
        p = self.p
        ns = self.settings
        if p.grid.dim == 1:
            kern = backend.kernels().coupled_newton_update_1d
            def update(ui, vi):
                return kern(u, v, ui, vi, p.time.dt, p.grid.h, p.mu,
                            p.eps, p.xi, p.law.q)
        else:
            def update(ui, vi):
                return self._update_2d(u, v, ui, vi)

        u_it, v_it = u, v
        increments = []
        for _ in range(ns.max_iter):
            try:
                u_it, v_it, inc = update(u_it, v_it)
            except LinearSolveError as exc:
                raise StepFailureError(
                    f"inner linear solve failed: {exc}", increments=increments
                ) from exc
            increments.append(inc)
            if not np.isfinite(inc):
                self.last_increments = increments
                raise DivergenceError(
                    "non-finite values in Newton update", increments=increments
                )
            if inc <= ns.tol_increment:
                self.last_increments = increments
                return u_it, v_it
        self.last_increments = increments
        raise StepFailureError(
            f"Newton did not reach increment tolerance {ns.tol_increment:g} "
            f"in {ns.max_iter} iterations",
            increments=increments,
        )


def step(s: State, p: RunParameters, settings: NewtonSettings | None = None) -> State:
    """Single implicit step of the coupled scheme (fresh workspace)."""
    p.grid.check_field(s.u)
    p.grid.check_field(s.v)
    u, v = CoupledStepper(p, settings).step(
        np.asarray(s.u, dtype=float), np.asarray(s.v, dtype=float)
    )
    return State(u=u, v=v, n=s.n + 1)


def linf_ceiling(u0, v0, p: RunParameters):
    """Sup-norm ceilings for (u, v) implied by the initial data.

    For xi > 0 both fields are bounded through the monotone-branch inverse
    of zeta; for xi = 0 the u ceiling is the initial sup-norm alone and the
    v ceiling follows from the inverse constitutive law.
    """
    law, mu = p.law, p.mu
    umax = float(np.max(np.abs(u0)))
    vmax = float(np.max(np.abs(v0)))
    if p.xi > 0:
        u_bound = umax + abs(zeta_inverse(vmax, mu, law))
        zeta0 = alpha_inverse(u0, law) - mu * np.asarray(u0, dtype=float)
        v_bound = float(np.max(np.abs(zeta0))) + vmax
    else:
        u_bound = umax
        v_bound = float(np.max(np.abs(alpha_inverse(u0, law)))) + mu * umax
    return u_bound, v_bound


def _h3_advisory(u0, v0, p: RunParameters):
    try:
        u_bound, v_bound = linf_ceiling(u0, v0, p)
    except RootFindError:
        # v0 outside the monotone branch of zeta: no finite range bound is
        # implied, so the contraction hypothesis cannot be certified at all
        warnings.warn(
            "initial data admit no finite solution-range bound (v0 lies "
            "outside the monotone branch); the splitting contraction "
            "hypothesis cannot be certified for this run",
            H3AdvisoryWarning,
            stacklevel=3,
        )
        return
    zrange = p.mu * u_bound + v_bound
    lip = lipschitz_on(zrange, p.law)
    if p.mu * lip >= 1.0:
        warnings.warn(
            f"mu*L_alpha = {p.mu * lip:.3g} >= 1 on the solution range "
            f"|z| <= {zrange:.3g} implied by the initial data; the run "
            "proceeds, but the contraction hypothesis behind the splitting "
            "does not hold on that whole range",
            H3AdvisoryWarning,
            stacklevel=3,
        )


def run(p: RunParameters, u0, v0, observers=(), settings=None) -> RunResult:
    """Drive the coupled scheme over the whole time grid.

    Observers are called as ``observer(n, t, state)`` for n = 0..n_steps,
    with the state at time t = n*dt; treat the arrays as read-only
    snapshots.  Step failures are re-raised with the failing step index.
    """
    u = np.array(p.grid.check_field(u0), dtype=float)
    v = np.array(p.grid.check_field(v0), dtype=float)
    _h3_advisory(u, v, p)
    stepper = CoupledStepper(p, settings)
    result = RunResult(state=State(u=u, v=v, n=0))
    dt = p.time.dt
    for obs in observers:
        obs(0, 0.0, result.state)
    for n in range(1, p.time.n_steps + 1):
        try:
            u, v = stepper.step(u, v)
        except StepFailureError as exc:
            exc.step_index = n
            raise
        result.state = State(u=u, v=v, n=n)
        result.newton_iterations.append(len(stepper.last_increments))
        for obs in observers:
            obs(n, n * dt, result.state)
    return result


def step_fde(z, alpha_z_prev, p: RunParameters,
             settings: NewtonSettings | None = None) -> np.ndarray:
    """One step of the direct implicit fast-diffusion scheme.

    Solves (alpha(z+) - alpha_z_prev)/dt = lap_h z+ by Newton with the
    Jacobian diag(alpha'(z+))/dt - lap_h, starting from z.
    """
    ns = settings or NewtonSettings()
    z_it = np.array(p.grid.check_field(z), dtype=float)
    aprev = np.array(p.grid.check_field(alpha_z_prev), dtype=float)
    dt = p.time.dt
    if p.grid.dim == 1:
        kern = backend.kernels().fde_newton_update_1d
        def update(zi):
            return kern(aprev, zi, dt, p.grid.h, p.law.q)
    else:
        lap = assemble_laplacian(p.grid)
        def update(zi):
            a = alpha(zi, p.law)
            f = (a - aprev) / dt - lap @ zi
            jac = (sp.diags(alpha_prime(zi, p.law) / dt) - lap).tocsc()
            dz = spla.splu(jac).solve(-f)
            return zi + dz, float(np.max(np.abs(dz)))

    increments = []
    for _ in range(ns.max_iter):
        z_it, inc = update(z_it)
        increments.append(inc)
        if not np.isfinite(inc):
            raise DivergenceError("non-finite values in fast-diffusion update",
                                  increments=increments)
        if inc <= ns.tol_increment:
            return z_it
    raise StepFailureError(
        f"fast-diffusion Newton did not converge in {ns.max_iter} iterations",
        increments=increments,
    )


def reaction_residual(s: State, p: RunParameters) -> np.ndarray:
    """u - alpha(mu u + v), the quantity driven to zero as eps -> 0."""
    return s.u - alpha(p.mu * s.u + s.v, p.law)
