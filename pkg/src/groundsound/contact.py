"""Hertzian ball-on-ground impact mapped onto the smooth fourth-order force profile."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .materials import Material
from .regularized import kernel_f, kernel_f_cdf, kernel_f_derivative

#: Standard gravity, used to turn a drop height into an impact speed.
GRAVITY = 9.80665
#: Prefactor of the Hertz contact duration.
HERTZ_DURATION_COEFF = 2.87


class ContactError(ValueError):
    pass


@dataclass(frozen=True)
class ContactEvent:
    """One impact on the ground plane.

    ``epsilon`` is the smoothing length of the ground kernel, ``c_s t_c / 4``
    with the ground shear speed ``c_s``.
    """

    impact_point: tuple[float, float, float]
    impact_time: float
    impulse: float
    contact_time: float
    epsilon: float
    normal_velocity: float
    mass: float
    radius: float
    effective_stiffness: float
    ground_shear_speed: float
    contact_radius: float = float("nan")

    @property
    def kernel_width(self) -> float:
        """``eps / c_s`` in seconds (a quarter of the contact time)."""
        return self.epsilon / self.ground_shear_speed

    def scaled(self, impulse: float) -> "ContactEvent":
        return replace(self, impulse=impulse)


def effective_stiffness(obj: Material, gnd: Material) -> float:
    """``1/E* = (1 - nu1^2)/E1 + (1 - nu2^2)/E2``."""
    inv = (1 - obj.poisson_ratio**2) / obj.youngs_modulus + (1 - gnd.poisson_ratio**2) / gnd.youngs_modulus
    return 1.0 / inv


def sphere_mass(material: Material, radius: float) -> float:
    return material.density * 4.0 / 3.0 * math.pi * radius**3


def drop_velocity(height: float) -> float:
    return math.sqrt(2.0 * GRAVITY * height)


def hertz_contact_time(mass: float, radius: float, e_star: float, v_n: float) -> float:
    """``t_c = 2.87 (m^2 / (a0 E*^2 v_n))^(1/5)``."""
    if not v_n > 0:
        raise ContactError("normal velocity must be positive for an impact")
    return HERTZ_DURATION_COEFF * (mass**2 / (radius * e_star**2 * v_n)) ** 0.2


def hertz_contact_radius(mass: float, radius: float, e_star: float, v_n: float) -> float:
    """Maximum Hertz contact radius ``sqrt(a0 delta_max)``. Diagnostic only."""
    delta = (15.0 * mass * v_n**2 / (16.0 * e_star * math.sqrt(radius))) ** 0.4
    return math.sqrt(radius * delta)


def make_event(
    obj: Material,
    gnd: Material,
    radius: float,
    v_n: float,
    restitution: float,
    impact_point=(0.0, 0.0, 0.0),
    impact_time: float = 0.0,
    contact_time: float | None = None,
) -> ContactEvent:
    """Build a :class:`ContactEvent`; ``contact_time`` overrides the Hertz value."""
    if not v_n > 0:
        raise ContactError("normal velocity must be positive for an impact")
    if not 0.0 <= restitution <= 1.0:
        raise ContactError(f"restitution must lie in [0, 1], got {restitution}")
    mass = sphere_mass(obj, radius)
    e_star = effective_stiffness(obj, gnd)
    t_c = contact_time if contact_time is not None else hertz_contact_time(mass, radius, e_star, v_n)
    c_s = gnd.shear_speed
    return ContactEvent(
        impact_point=tuple(float(x) for x in impact_point),
        impact_time=float(impact_time),
        impulse=(1.0 + restitution) * mass * v_n,
        contact_time=t_c,
        epsilon=c_s * t_c / 4.0,
        normal_velocity=v_n,
        mass=mass,
        radius=radius,
        effective_stiffness=e_star,
        ground_shear_speed=c_s,
        contact_radius=hertz_contact_radius(mass, radius, e_star, v_n),
    )


def hertz_event(scenario, index: int = 0) -> ContactEvent:
    """Contact event for impact ``index`` of a scenario."""
    imp = scenario.impacts[index]
    return make_event(
        scenario.object,
        scenario.ground,
        scenario.ball_radius,
        imp.normal_velocity,
        scenario.restitution,
        impact_point=imp.point,
        impact_time=imp.time,
        contact_time=scenario.contact_time,
    )


def ground_force_profile(event: ContactEvent, t):
    """Force on the ground, ``J f_eps(t - t_impact)``, in N."""
    t = np.asarray(t, dtype=float) - event.impact_time
    return event.impulse * kernel_f(t, event.epsilon, event.ground_shear_speed)


def ball_acceleration(event: ContactEvent, t, derivative: int = 0):
    """Ball acceleration ``a = -f / m`` along +z (and its time derivatives).

    The sign follows the load convention of the halfspace solution, where the
    ground force points along +z; only relative signs between ball and ground
    matter for the radiated sound.
    """
    t = np.asarray(t, dtype=float) - event.impact_time
    d = kernel_f_derivative(t, event.epsilon, event.ground_shear_speed, derivative)
    return -event.impulse / event.mass * d


def ball_velocity_change(event: ContactEvent, t):
    """Integral of the ball acceleration from minus infinity to ``t``."""
    t = np.asarray(t, dtype=float) - event.impact_time
    return -event.impulse / event.mass * kernel_f_cdf(t, event.epsilon, event.ground_shear_speed)
