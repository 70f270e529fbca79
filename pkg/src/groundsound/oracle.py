"""Brute-force convolution of the fourth-order kernel with the exact step response.

Independent of the closed form: it only uses :func:`lamb.step_shape` and
:func:`regularized.kernel_f`, and integrates numerically with the interval
split at the three wavefronts. The inverse square-root singularity just before
the Rayleigh front is handled by an algebraic-weight rule.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy import integrate

from .lamb import check_radius, step_shape
from .materials import HalfspaceParams
from .regularized import kernel_f


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, error_estimate):
        super().__init__(f"{message} (error estimate {error_estimate:.3e})")
        self.error_estimate = error_estimate


def _quad(func, lo, hi, tol, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(func, lo, hi, epsabs=tol, epsrel=0.0, limit=500, **kw)
        except integrate.IntegrationWarning:
            val, err = integrate.quad(func, lo, hi, epsabs=tol, epsrel=0.0, limit=2000, **kw)
    if not err <= 10 * tol:
        raise QuadratureError("convolution quadrature did not converge", err)
    return val, err


def _split_points(lo, hi, centre, width):
    pts = [p for p in (centre - 10 * width, centre, centre + 10 * width) if lo < p < hi]
    return pts or None


def convolution_oracle(hs: HalfspaceParams, eps: float, r: float, t: float, tol: float = 1e-8) -> float:
    """``(f_eps * u_n)(r, t)`` by adaptive quadrature.

    ``tol`` is an absolute tolerance on the dimensionless bracket (the result
    divided by the static displacement ``(1 - nu) / (2 pi mu r)``). Works for
    every ``nu`` in [0, 0.5).
    """
    r = float(check_radius(r))
    cs = hs.c_s
    width = eps / cs
    t_p, t_s, t_r = hs.a * r / cs, r / cs, hs.gamma * r / cs

    def kern(s):
        return kernel_f(t - s, eps, cs)

    total = 0.0
    # a < tau < 1: bounded, kinks at both ends
    total += _quad(lambda s: kern(s) * float(step_shape(hs, cs * s / r)), t_p, t_s, tol,
                   points=_split_points(t_p, t_s, t, width))[0]
    # 1 <= tau < gamma: 1 - A1' / sqrt(gamma^2 - tau^2)
    total += _quad(kern, t_s, t_r, tol, points=_split_points(t_s, t_r, t, width))[0]
    a1 = hs.a1_real
    # in s: sqrt(gamma^2 - tau^2) = sqrt(t_r - s) sqrt(gamma + tau) sqrt(cs / r)
    sing = _quad(lambda s: kern(s) / np.sqrt(hs.gamma + cs * s / r), t_s, t_r, tol,
                 weight="alg", wvar=(0.0, -0.5))[0]
    total -= a1 * sing / np.sqrt(cs / r)
    # tau >= gamma: unit plateau
    far = max(t, t_r) + 50 * width
    total += _quad(kern, t_r, far, tol, points=_split_points(t_r, far, t, width))[0]
    total += _quad(kern, far, np.inf, tol)[0]
    return hs.static_prefactor() / r * total


def pekeris_volume_displacement(hs: HalfspaceParams, t: float, tol: float = 1e-10) -> float:
    """Volume under the exact step response, ``integral u_n dA`` over the plane.

    With ``r = c_s t / tau`` the disc integral becomes
    ``2 pi (1-nu)/(2 pi mu) * c_s t * integral_a^inf G(tau) tau^-2 dtau``.
    """
    if t <= 0:
        return 0.0
    return hs.static_prefactor() * 2 * np.pi * hs.c_s * t * pekeris_volume_rate_constant(hs, tol)


def pekeris_volume_rate_constant(hs: HalfspaceParams, tol: float = 1e-10) -> float:
    """``integral_a^inf G(tau) / tau^2 dtau`` with the Rayleigh singularity weighted out."""
    a, g = hs.a, hs.gamma
    part1 = _quad(lambda x: float(step_shape(hs, x)) / x**2, a, 1.0, tol)[0]
    part2 = _quad(lambda x: 1.0 / x**2, 1.0, g, tol)[0]
    part2 -= hs.a1_real * _quad(lambda x: 1.0 / (x**2 * np.sqrt(g + x)), 1.0, g, tol,
                                weight="alg", wvar=(0.0, -0.5))[0]
    part3 = 1.0 / g
    return part1 + part2 + part3
