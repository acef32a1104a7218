"""Pure-numpy fallback kernels for the 1-D per-step Newton updates.

Each function performs exactly one Newton update of the corresponding
implicit system: assemble the residual and Jacobian at the current iterate,
solve the banded linear system, and return the new iterate together with
the sup-norms of the increment and of the residual.  The compiled module
``fdrelax._kernels`` implements the same contracts; ``fdrelax.backend``
picks one at import.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

BACKEND_NAME = "python"


def coupled_newton_update_1d(u_prev, v_prev, u, v, dt, h, mu, eps, xi, q):
    """One Newton update for the coupled implicit step on a 1-D grid.

    Unknowns are interleaved per node as (u_i, v_i), giving a pentadiagonal
    system solved by LAPACK's banded factorization.
    """
    n = u.shape[0]
    g = 1.0 / (h * h)
    z = mu * u + v
    apow = np.abs(z) ** (q - 2.0)
    a = apow * z
    d = (q - 1.0) * apow

    lap_u = -2.0 * u
    lap_u[:-1] += u[1:]
    lap_u[1:] += u[:-1]
    lap_u *= g
    lap_v = -2.0 * v
    lap_v[:-1] += v[1:]
    lap_v[1:] += v[:-1]
    lap_v *= g

    f1 = (u - u_prev) / (mu * dt) - lap_u + (u - a) / eps
    f2 = xi * (v - v_prev) / dt - lap_v - mu * (u - a) / eps

    ab = np.zeros((5, 2 * n))
    ab[0, 2:] = -g
    ab[1, 1::2] = -d / eps
    ab[2, 0::2] = 1.0 / (mu * dt) + 2.0 * g + (1.0 - mu * d) / eps
    ab[2, 1::2] = xi / dt + 2.0 * g + mu * d / eps
    ab[3, 0:-1:2] = -mu * (1.0 - mu * d) / eps
    ab[4, :-2] = -g

    rhs = np.empty(2 * n)
    rhs[0::2] = -f1
    rhs[1::2] = -f2
    dx = solve_banded((2, 2), ab, rhs)
    u_new = u + dx[0::2]
    v_new = v + dx[1::2]
    return (u_new, v_new, float(np.max(np.abs(dx))),
            float(np.max(np.abs(rhs))))


def fde_newton_update_1d(alpha_prev, z, dt, h, q):
    """One Newton update for the direct implicit fast-diffusion step (1-D)."""
    n = z.shape[0]
    g = 1.0 / (h * h)
    apow = np.abs(z) ** (q - 2.0)
    a = apow * z
    d = (q - 1.0) * apow

    lap = -2.0 * z
    lap[:-1] += z[1:]
    lap[1:] += z[:-1]
    lap *= g

    f = (a - alpha_prev) / dt - lap
    ab = np.zeros((3, n))
    ab[0, 1:] = -g
    ab[1, :] = d / dt + 2.0 * g
    ab[2, :-1] = -g
    dz = solve_banded((1, 1), ab, -f)
    return z + dz, float(np.max(np.abs(dz))), float(np.max(np.abs(f)))
