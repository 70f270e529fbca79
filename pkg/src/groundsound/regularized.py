"""Temporally regularized halfspace response in closed form.

The step response is convolved with the smooth unit-mass kernel

    g_eps(t) = c_s eps / (pi (c_s^2 t^2 + eps^2)),    f_eps = 2 g_eps - g_2eps,

whose tail decays like t^-4. ``eps`` is a length: the kernel width in time is
``eps / c_s``. Internally everything is written in ``t' = c_s t`` so that the
closed forms keep their natural shape; public functions take seconds.

With ``c = t' + i eps`` each antiderivative is the real or imaginary part of an
analytic function of ``c``. Time derivatives are therefore derivatives in
``c``, which are carried exactly with truncated Taylor arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._jet import Jet
from .lamb import DomainError, check_radius
from .materials import HalfspaceParams, real_root_limit


class UnsupportedRegimeError(DomainError):
    """The closed form is only branch-cut free for nu below about 0.2631."""


# ---------------------------------------------------------------------------
# kernels


def kernel_g(t, eps: float, c_s: float):
    """Lorentzian kernel ``g_eps(t)`` in 1/s."""
    t = np.asarray(t, dtype=float)
    return c_s * eps / (np.pi * ((c_s * t) ** 2 + eps * eps))


def kernel_f(t, eps: float, c_s: float):
    """Fourth-order kernel ``2 g_eps - g_2eps``; integrates to one."""
    return 2.0 * kernel_g(t, eps, c_s) - kernel_g(t, 2.0 * eps, c_s)


def kernel_f_derivative(t, eps: float, c_s: float, n: int = 1):
    """``n``-th time derivative of :func:`kernel_f` (``n`` = 0..3)."""
    t = np.asarray(t, dtype=float)
    out = 0.0
    for weight, e in ((2.0, eps), (-1.0, 2.0 * eps)):
        # g(t) = Re[i / (pi (t' - i e)^*)] with t' = c_s t; d/dt = c_s d/dt'
        c = c_s * t + 1j * e
        dn = 1j * (-1.0) ** n * math.factorial(n) / c ** (n + 1)
        out = out + weight * (c_s ** (n + 1)) * dn.real / np.pi
    return out


def kernel_f_cdf(t, eps: float, c_s: float):
    """Running integral of :func:`kernel_f` from minus infinity."""
    t = np.asarray(t, dtype=float)
    x = c_s * t
    return 0.5 + (2.0 * np.arctan(x / eps) - np.arctan(x / (2.0 * eps))) / np.pi


# ---------------------------------------------------------------------------
# closed-form antiderivatives (t' = c_s t)


def closed_form_U(tp, sigma, eps, r):
    """``(1/r) * integral_sigma^inf g_eps(t' - s) ds``."""
    return 1.0 / (2.0 * r) + np.arctan((np.asarray(tp) - sigma) / eps) / (np.pi * r)


def closed_form_Z(tp, alpha, eps):
    """``sqrt(alpha^2 + (eps - i t')^2)``, principal branch."""
    tp = np.asarray(tp, dtype=float)
    return np.sqrt(alpha * alpha + (eps - 1j * tp) ** 2)


def _check(cond, msg):
    if not np.all(cond):
        raise DomainError(msg)


def closed_form_V(tp, s, alpha, eps):
    """Antiderivative in ``s`` of ``g_eps(t' - s) / sqrt(s^2 - alpha^2)``, for ``s > alpha``."""
    _check(np.asarray(s) > np.asarray(alpha), "V requires s > alpha")
    tp = np.asarray(tp, dtype=float)
    z = closed_form_Z(tp, alpha, eps)
    q = np.sqrt(np.asarray(s * s - alpha * alpha, dtype=float))
    inner = -np.log(eps - 1j * (tp - s)) + np.log(alpha * alpha - (tp + 1j * eps) * s - 1j * z * q)
    return (inner / (np.pi * z)).real


def closed_form_W(tp, s, alpha, eps):
    """Antiderivative in ``s`` of ``g_eps(t' - s) / sqrt(alpha^2 - s^2)``, for ``s <= alpha``."""
    _check(np.asarray(s) <= np.asarray(alpha), "W requires s <= alpha")
    tp = np.asarray(tp, dtype=float)
    z = closed_form_Z(tp, alpha, eps)
    q = np.sqrt(np.asarray(alpha * alpha - s * s, dtype=float))
    inner = -np.log(eps - 1j * (tp - s)) + np.log(alpha * alpha - (tp + 1j * eps) * s + z * q)
    return (-inner / (np.pi * z)).imag


# Jet versions: functions of c = t' + i eps, carried to the requested order.


def _u_series(c: Jet, sigma, r, order):
    """Derivatives of ``U`` in t'; returns list of real arrays."""
    x = c.c[0] - sigma
    out = [1.0 / (2.0 * r) + np.arctan(x.real / x.imag) / (np.pi * r)]
    for n in range(1, order + 1):
        dn = 1j * (-1.0) ** (n - 1) * math.factorial(n - 1) / x**n
        out.append(dn.real / (np.pi * r))
    return out


def _first_log(c: Jet, s) -> Jet:
    return (1j * (s - c)).log()


def _v_jet(c: Jet, z: Jet, s, alpha) -> Jet:
    q = np.sqrt(s * s - alpha * alpha)
    n = alpha * alpha - c * s - 1j * q * z
    return (n.log() - _first_log(c, s)) / z


def _w_jet(c: Jet, z: Jet, s, alpha) -> Jet:
    q = np.sqrt(np.maximum(alpha * alpha - s * s, 0.0))
    n = alpha * alpha - c * s + q * z
    return (n.log() - _first_log(c, s)) / z


def _kprime(hs: HalfspaceParams, r, tp, eps: float, order: int) -> np.ndarray:
    """Bracket of ``k'_eps`` (without ``(1-nu)/(4 pi mu)``) and its t'-derivatives."""
    r, tp = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(tp, dtype=float))
    c = Jet.variable(tp + 1j * eps, order)
    a, gamma = hs.a, hs.gamma
    ar, gr = a * r, gamma * r

    total = [np.zeros(r.shape) for _ in range(order + 1)]
    for sigma in (ar, r):
        for k, v in enumerate(_u_series(c, sigma, r, order)):
            total[k] = total[k] + v

    # Rayleigh-pole term: -A1' (2 W(gr) - W(r) - W(ar)), alpha = gamma r
    zg = (gr * gr - c * c).sqrt()
    wsum = 2.0 * _w_jet(c, zg, gr, gr) - _w_jet(c, zg, r, gr) - _w_jet(c, zg, ar, gr)
    a1 = hs.a1_real
    for k, d in enumerate(wsum.derivatives()):
        # W = Im(-F)/pi
        total[k] = total[k] - a1 * (-d.imag / np.pi)

    for j in (1, 2):
        kr = math.sqrt(hs.kappa_sq[j].real) * r
        zk = (kr * kr - c * c).sqrt()
        vdiff = _v_jet(c, zk, r, kr) - _v_jet(c, zk, ar, kr)
        aj = hs.coeffs[j].real
        for k, d in enumerate(vdiff.derivatives()):
            total[k] = total[k] - aj * (d.real / np.pi)
    return np.stack(total)


# ---------------------------------------------------------------------------
# regularized field


@dataclass(frozen=True)
class RegularizedField:
    """Halfspace plus smoothing length ``eps`` (m)."""

    halfspace: HalfspaceParams
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.halfspace.all_real or self.halfspace.nu >= real_root_limit():
            raise UnsupportedRegimeError(
                f"closed form requires nu < 0.2631 (real Rayleigh roots); got nu={self.halfspace.nu}"
            )

    @property
    def nu(self) -> float:
        return self.halfspace.nu


@dataclass(frozen=True)
class KernelEval:
    """Displacement ``u`` (step load), displacement ``w`` and acceleration ``a`` (unit impulse)."""

    u: np.ndarray
    w: np.ndarray
    a: np.ndarray


def response_derivatives(field: RegularizedField, r, t, order: int = 3) -> np.ndarray:
    """``d^k u_eps / dt^k`` for ``k = 0..order``, stacked on the first axis."""
    hs = field.halfspace
    r = check_radius(r)
    tp = hs.c_s * np.asarray(t, dtype=float)
    eps = field.epsilon
    k = 2.0 * _kprime(hs, r, tp, eps, order) - _kprime(hs, r, tp, 2.0 * eps, order)
    scale = (1.0 - hs.nu) / (4.0 * math.pi * hs.mu)
    chain = hs.c_s ** np.arange(order + 1)
    return k * (scale * chain).reshape((-1,) + (1,) * (k.ndim - 1))


def u_eps(field: RegularizedField, r, t) -> np.ndarray:
    """Displacement response to the smoothed step load ``f_eps * theta`` (m per N)."""
    return response_derivatives(field, r, t, order=0)[0]


def w_eps(field: RegularizedField, r, t) -> np.ndarray:
    """Displacement response to a unit impulse with force profile ``f_eps`` (m per N s)."""
    return response_derivatives(field, r, t, order=1)[1]


def a_eps(field: RegularizedField, r, t) -> np.ndarray:
    """Normal surface acceleration for a unit impulse (m/s^2 per N s)."""
    return response_derivatives(field, r, t, order=3)[3]


def evaluate(field: RegularizedField, r, t) -> KernelEval:
    d = response_derivatives(field, r, t, order=3)
    return KernelEval(u=d[0], w=d[1], a=d[3])
