"""Uniform tensor grids, the Dirichlet-zero discrete Laplacian, and norms.

Fields are plain 1-D ``numpy`` arrays holding the interior nodal values in
row-major order (axis 0 slowest); boundary values are identically zero and
never stored.  Grids and time grids are immutable value objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, ShapeError

__all__ = [
    "Grid",
    "TimeGrid",
    "apply_laplacian",
    "assemble_laplacian",
    "l2_spacetime_norm",
    "lq_norm",
    "h1_seminorm_sq",
    "restrict",
    "dump_field_csv",
]

_INT_RATIO_RTOL = 1e-9


def _as_int_ratio(value: float, what: str) -> int:
    n = round(value)
    if n < 1 or abs(value - n) > _INT_RATIO_RTOL * max(1.0, abs(value)):
        raise ConfigurationError(f"{what} must be a positive integer, got {value}")
    return int(n)


@dataclass(frozen=True)
class Grid:
    """Uniform grid on (0, L)^dim with interior nodes at multiples of h.

    L/h must be an integer N >= 2; each axis carries N - 1 interior nodes
    at x = h, 2h, ..., L - h.  Zero Dirichlet data on the boundary.
    """

    dim: int
    length: float
    h: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigurationError(f"dim must be 1 or 2, got {self.dim}")
        if not (self.length > 0 and self.h > 0):
            raise ConfigurationError("grid length and mesh size must be positive")
        n = _as_int_ratio(self.length / self.h, "L/h")
        if n < 2:
            raise ConfigurationError(f"L/h must be at least 2, got {n}")

    @property
    def n_cells(self) -> int:
        return round(self.length / self.h)

    @property
    def n_per_axis(self) -> int:
        return self.n_cells - 1

    @property
    def size(self) -> int:
        return self.n_per_axis ** self.dim

    @property
    def shape(self) -> tuple:
        return (self.n_per_axis,) * self.dim

    def axis_coords(self) -> np.ndarray:
        return np.arange(1, self.n_cells) * self.h

    def coords(self) -> tuple:
        """Per-axis coordinates of every node, flattened in storage order."""
        x = self.axis_coords()
        if self.dim == 1:
            return (x,)
        X, Y = np.meshgrid(x, x, indexing="ij")
        return (X.ravel(), Y.ravel())

    def check_field(self, f) -> np.ndarray:
        f = np.asarray(f)
        if f.shape != (self.size,):
            raise ShapeError(
                f"field of shape {f.shape} does not conform to grid with "
                f"{self.size} interior nodes"
            )
        return f


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid t^n = n*dt, n = 0..n_steps, with T = n_steps*dt."""

    dt: float
    t_final: float

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if self.t_final < 0:
            raise ConfigurationError("final time must be nonnegative")
        if self.t_final > 0:
            _as_int_ratio(self.t_final / self.dt, "T/dt")

    @property
    def n_steps(self) -> int:
        return round(self.t_final / self.dt)

    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt


def apply_laplacian(f, g: Grid) -> np.ndarray:
    """Discrete Laplacian with zero Dirichlet boundary.

    3-point stencil in 1D, 5-point in 2D, with 1/h^2 weights; out-of-range
    neighbors count as zero.
    """
    a = g.check_field(f).astype(float, copy=False).reshape(g.shape)
    out = (-2.0 * g.dim) * a
    if g.dim == 1:
        out[:-1] += a[1:]
        out[1:] += a[:-1]
    else:
        out[:-1, :] += a[1:, :]
        out[1:, :] += a[:-1, :]
        out[:, :-1] += a[:, 1:]
        out[:, 1:] += a[:, :-1]
    out /= g.h ** 2
    return out.ravel()


@lru_cache(maxsize=16)
def _laplacian_csr(dim: int, n: int, h: float):
    e = np.ones(n)
    t = sp.diags([e[:-1], -2.0 * e, e[:-1]], [-1, 0, 1])
    if dim == 1:
        lap = t
    else:
        eye = sp.identity(n)
        lap = sp.kron(t, eye) + sp.kron(eye, t)
    return (lap / h ** 2).tocsr()


def assemble_laplacian(g: Grid):
    """Sparse symmetric negative-definite matrix applying the stencil.

    Cached per grid signature; treat the returned matrix as read-only.
    """
    return _laplacian_csr(g.dim, g.n_per_axis, g.h)


def lq_norm(f, g: Grid, q: float) -> float:
    """(sum_i |f_i|^q h^dim)^(1/q).

    Scaled by max|f| internally so that extreme magnitudes neither overflow
    nor underflow in the q-th power.
    """
    if q < 1:
        raise ConfigurationError(f"norm exponent must satisfy q >= 1, got {q}")
    f = g.check_field(f)
    m = float(np.max(np.abs(f)))
    if m == 0.0:
        return 0.0
    scaled = np.abs(f) / m
    return m * float(np.sum(scaled ** q) * g.h ** g.dim) ** (1.0 / q)


def l2_spacetime_norm(traj, g: Grid, tg: TimeGrid) -> float:
    """sqrt(sum_{n,i} |z_i^n|^2 h^dim dt) over a trajectory of n_steps+1 fields."""
    total = 0.0
    count = 0
    for f in traj:
        f = g.check_field(f).astype(float, copy=False)
        total += float(np.dot(f, f))
        count += 1
    if count != tg.n_steps + 1:
        raise ConfigurationError(
            f"trajectory has {count} fields, expected n_steps+1 = {tg.n_steps + 1}"
        )
    return float(np.sqrt(total * g.h ** g.dim * tg.dt))


def h1_seminorm_sq(f, g: Grid) -> float:
    """Squared discrete gradient norm by forward differences.

    Sums ((f_b - f_a)/h)^2 h^dim over all axis-aligned edges, including the
    boundary edges whose missing endpoint is zero.  Satisfies the
    summation-by-parts identity with the discrete Laplacian exactly.
    """
    a = g.check_field(f).astype(float, copy=False).reshape(g.shape)
    total = 0.0
    if g.dim == 1:
        total += float(np.sum(np.diff(a) ** 2))
        total += float(a[0] ** 2 + a[-1] ** 2)
    else:
        total += float(np.sum(np.diff(a, axis=0) ** 2))
        total += float(np.sum(a[0, :] ** 2) + np.sum(a[-1, :] ** 2))
        total += float(np.sum(np.diff(a, axis=1) ** 2))
        total += float(np.sum(a[:, 0] ** 2) + np.sum(a[:, -1] ** 2))
    return total * g.h ** (g.dim - 2)


def restrict(fine, fine_grid: Grid, coarse_grid: Grid) -> np.ndarray:
    """Sample a fine-grid field at the nodes of a coarser, nested grid."""
    if fine_grid.dim != coarse_grid.dim:
        raise ConfigurationError("grids have different dimensions")
    if abs(fine_grid.length - coarse_grid.length) > _INT_RATIO_RTOL * fine_grid.length:
        raise ConfigurationError("grids cover different domains")
    k = _as_int_ratio(coarse_grid.h / fine_grid.h, "mesh ratio h_coarse/h_fine")
    fine = fine_grid.check_field(fine)
    idx = np.arange(1, coarse_grid.n_cells) * k - 1
    if fine_grid.dim == 1:
        return fine[idx].copy()
    a = fine.reshape(fine_grid.shape)
    return a[np.ix_(idx, idx)].ravel().copy()


def dump_field_csv(f, g: Grid, path, value_name: str = "value") -> None:
    """Write one row per node: x[,y],value with 17 significant digits."""
    f = g.check_field(f)
    coords = g.coords()
    header = ("x," if g.dim == 1 else "x,y,") + value_name
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(header + "\n")
        for i in range(g.size):
            cols = [format(float(c[i]), ".17g") for c in coords]
            cols.append(format(float(f[i]), ".17g"))
            fh.write(",".join(cols) + "\n")
