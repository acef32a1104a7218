"""Scalar constitutive functions of the power-law fast diffusion model.

The model is built around the odd, strictly increasing power law
``alpha(s) = |s|^(q-2) * s`` with exponent q > 2, together with the
auxiliary functions derived from it for a splitting parameter mu > 0:

* ``eta(s)  = s - mu * alpha(s)``
* ``zeta(s) = alpha_inverse(s) - mu * s``

``eta`` and ``zeta`` are increasing near the origin; their inverses are
evaluated on that branch by safeguarded root finding.  All functions are
stateless and safe to call concurrently.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import ConfigurationError, QuadratureError, RootFindError

__all__ = [
    "PowerLaw",
    "alpha",
    "alpha_prime",
    "alpha_inverse",
    "eta",
    "eta_inverse",
    "zeta_inverse",
    "phi_alpha_inverse",
    "phi_eta_inverse",
    "lipschitz_on",
]


@dataclass(frozen=True)
class PowerLaw:
    """Constitutive power law |s|^(q-2) s; q > 2 is the singular regime."""

    q: float

    def __post_init__(self):
        if not self.q > 2.0:
            raise ConfigurationError(
                f"power-law exponent must satisfy q > 2, got q={self.q}"
            )


def alpha(s, law: PowerLaw):
    """alpha(s) = |s|^(q-2) s, odd and strictly increasing, alpha(0) = 0."""
    s = np.asarray(s, dtype=float)
    # |0|^(q-2) = 0 for q > 2, so no NaN can arise at the origin.
    return np.abs(s) ** (law.q - 2.0) * s


def alpha_prime(s, law: PowerLaw):
    """Derivative (q-1)|s|^(q-2); vanishes at s = 0 for q > 2."""
    s = np.asarray(s, dtype=float)
    return (law.q - 1.0) * np.abs(s) ** (law.q - 2.0)


def alpha_inverse(r, law: PowerLaw):
    """Inverse power law sign(r)|r|^(1/(q-1))."""
    r = np.asarray(r, dtype=float)
    return np.sign(r) * np.abs(r) ** (1.0 / (law.q - 1.0))


def eta(s, mu: float, law: PowerLaw):
    """eta(s) = s - mu * alpha(s)."""
    _check_mu(mu)
    s = np.asarray(s, dtype=float)
    return s - mu * alpha(s, law)


def phi_alpha_inverse(s, law: PowerLaw):
    """Primitive of alpha_inverse: ((q-1)/q) |s|^(q/(q-1))."""
    q = law.q
    s = np.asarray(s, dtype=float)
    return (q - 1.0) / q * np.abs(s) ** (q / (q - 1.0))


def lipschitz_on(interval_bound: float, law: PowerLaw) -> float:
    """Lipschitz constant of alpha on [-M, M]: (q-1) M^(q-2).

    Exact because alpha' is even and increasing in |s| for q > 2.
    """
    if interval_bound < 0:
        raise ConfigurationError("interval bound must be nonnegative")
    return (law.q - 1.0) * float(interval_bound) ** (law.q - 2.0)


# scalar fast paths used inside the root finders

def _alpha_s(x: float, q: float) -> float:
    if x == 0.0:
        return 0.0
    return math.copysign(abs(x) ** (q - 1.0), x)


def _alpha_prime_s(x: float, q: float) -> float:
    if x == 0.0:
        return 0.0
    return (q - 1.0) * abs(x) ** (q - 2.0)


def _check_mu(mu: float):
    if not mu > 0:
        raise ConfigurationError(f"mu must be positive, got {mu}")


_BRACKET_GROWTH_CAP = 200


def _branch_end(mu: float, law: PowerLaw) -> float:
    """Largest z with mu * alpha'(z) <= 1; the monotone branch of eta ends
    there and that of zeta at alpha(z)."""
    return (1.0 / (mu * (law.q - 1.0))) ** (1.0 / (law.q - 2.0))


def _grow_bracket(residual, target, seed: float, limit: float,
                  want_nonpositive: bool):
    """Geometrically grow [0, b] from b = seed until the residual changes sign.

    The monotone branch passes through 0, so the root bracket starts at the
    origin; only the outer endpoint is pushed outward.  Growth is clamped at
    the analytic branch endpoint: doubling alone can step across the window
    where the residual changes sign when the target sits close to the fold
    of the branch, while at the endpoint the sign is conclusive.
    """
    lo = 0.0
    hi = min(seed, limit)
    for _ in range(_BRACKET_GROWTH_CAP):
        r = residual(hi)
        if not math.isfinite(r):
            break
        if (r <= 0.0) if want_nonpositive else (r >= 0.0):
            return lo, hi
        if hi >= limit:
            break
        lo = hi
        hi = min(2.0 * hi, limit)
    raise RootFindError(
        f"no sign change while bracketing inverse at {target!r}; "
        "the value lies outside the monotone branch through 0",
        target=target,
        bracket=(lo, hi),
    )


def _bisect_newton(residual, derivative, lo: float, hi: float,
                   tol: float, max_iter: int, target):
    """Bracketing bisection refined by Newton steps, to absolute tolerance.

    ``residual`` must be >= 0 at ``lo`` and <= 0 at ``hi`` (the bracket may
    be given in either orientation of sign; only a sign change is needed).
    """
    flo = residual(lo)
    fhi = residual(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise RootFindError("bracket endpoints have equal sign",
                            target=target, bracket=(lo, hi))
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        fx = residual(x)
        if fx == 0.0:
            return x
        if fx * flo > 0.0:
            lo, flo = x, fx
        else:
            hi, fhi = x, fx
        if abs(hi - lo) <= tol:
            return 0.5 * (lo + hi)
        dfx = derivative(x)
        if dfx != 0.0:
            cand = x - fx / dfx
            inside = (lo < cand < hi) or (hi < cand < lo)
        else:
            inside = False
        x = cand if inside else 0.5 * (lo + hi)
    raise RootFindError(
        f"root refinement exceeded {max_iter} iterations",
        target=target, bracket=(lo, hi),
    )


def zeta_inverse(v: float, mu: float, law: PowerLaw,
                 tol: float = 1e-13, max_iter: int = 200) -> float:
    """Solve alpha(mu*u + v) = u for u on the monotone branch through 0.

    Equivalently v is in zeta(u).  Odd in v.  Raises RootFindError with the
    offending value and the last bracket when v lies outside the branch.
    """
    _check_mu(mu)
    v = float(v)
    if v == 0.0:
        return 0.0
    q = law.q
    sign = 1.0 if v > 0.0 else -1.0
    w = abs(v)

    def res(u):
        return _alpha_s(mu * u + w, q) - u

    def dres(u):
        return mu * _alpha_prime_s(mu * u + w, q) - 1.0

    # res(0) = alpha(w) > 0; the first root outward is the branch through 0,
    # which ends at u = alpha(z_end)
    u_end = _alpha_s(_branch_end(mu, law), q)
    lo, hi = _grow_bracket(res, v, w, u_end, want_nonpositive=True)
    return sign * _bisect_newton(res, dres, lo, hi, tol, max_iter, v)


def eta_inverse(w: float, mu: float, law: PowerLaw,
                tol: float = 1e-13, max_iter: int = 200) -> float:
    """Solve eta(z) = w for z on the monotone branch through 0.  Odd in w."""
    _check_mu(mu)
    w = float(w)
    if w == 0.0:
        return 0.0
    q = law.q
    sign = 1.0 if w > 0.0 else -1.0
    a = abs(w)

    def res(z):
        return z - mu * _alpha_s(z, q) - a

    def dres(z):
        return 1.0 - mu * _alpha_prime_s(z, q)

    # res(0) = -a < 0 and eta(z) <= z, so the outer endpoint grows from a.
    lo, hi = _grow_bracket(res, w, a, _branch_end(mu, law),
                           want_nonpositive=False)
    return sign * _bisect_newton(res, dres, lo, hi, tol, max_iter, w)


def phi_eta_inverse(s: float, mu: float, law: PowerLaw,
                    rel_tol: float = 1e-10) -> float:
    """Primitive of eta_inverse, by adaptive quadrature from 0 to s."""
    _check_mu(mu)
    s = float(s)
    if s == 0.0:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, abserr = quad(
                lambda r: eta_inverse(r, mu, law),
                0.0, s, epsabs=1e-15, epsrel=rel_tol, limit=200,
            )
        except IntegrationWarning as exc:
            raise QuadratureError(
                f"quadrature of eta_inverse on [0, {s}] did not converge: {exc}"
            ) from exc
    if abserr > max(rel_tol * abs(val), 1e-13):
        raise QuadratureError(
            f"quadrature error estimate {abserr:.3e} exceeds tolerance "
            f"for integral value {val:.6e}"
        )
    return float(val)
