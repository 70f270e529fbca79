"""Exact vertical surface response of an elastic halfspace to a step point load.

This is the unregularized reference solution. It is singular at the origin
and at the Rayleigh wavefront, and only continuous at the P and S fronts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .materials import HalfspaceParams

#: Smallest radius at which any response is evaluated, in m.
R_MIN = 1e-6


class DomainError(ValueError):
    """Raised when a response is requested outside its domain of validity."""


@dataclass(frozen=True)
class WavefrontTimes:
    t_p: float
    t_s: float
    t_r: float


def wavefront_times(hs: HalfspaceParams, r: float) -> WavefrontTimes:
    """Arrival times of the P, S and Rayleigh fronts at radius ``r``."""
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    t_s = r / hs.c_s
    return WavefrontTimes(t_p=hs.a * t_s, t_s=t_s, t_r=hs.gamma * t_s)


def check_radius(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any(~(r >= R_MIN)):
        raise DomainError(f"radius below r_min={R_MIN} m (the origin is singular)")
    return r


def step_shape(hs: HalfspaceParams, tau) -> np.ndarray:
    """Dimensionless bracket of the step response as a function of ``tau = c_s t / r``.

    Multiplying by ``(1 - nu) / (2 pi mu r)`` gives the displacement. Square
    roots are principal complex roots and the real part of the summed bracket
    is returned, so the same path serves real and complex Rayleigh roots.
    """
    tau = np.asarray(tau, dtype=float)
    k2 = np.asarray(hs.kappa_sq, dtype=complex)
    A = np.asarray(hs.coeffs, dtype=complex)
    t2 = (tau * tau).astype(complex)[..., None]
    terms = A / np.sqrt(t2 - k2)
    middle = 0.5 * (1.0 - terms.sum(axis=-1))
    rayleigh = 1.0 - terms[..., 0]
    out = np.where(
        tau <= hs.a,
        0.0,
        np.where(tau < 1.0, middle.real, np.where(tau < hs.gamma, rayleigh.real, 1.0)),
    )
    return out


def pekeris_displacement(hs: HalfspaceParams, r, t) -> np.ndarray:
    """Vertical surface displacement for a unit step point load (m per N).

    Broadcasts over ``r`` and ``t``. ``r`` must be at least ``R_MIN``.
    """
    r = check_radius(r)
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        shape = step_shape(hs, hs.c_s * t / r)
    return hs.static_prefactor() / r * shape
