import math

import numpy as np
import pytest

from groundsound.contact import make_event
from groundsound.oracle import pekeris_volume_displacement, pekeris_volume_rate_constant
from groundsound.radiation import (
    CoverageError,
    PressureTrace,
    SilentTraceError,
    TraceSpec,
    arrival_window,
    ball_dipole_pressure,
    default_trace,
    intensity_db,
    radial_grid,
    rayleigh_ground_pressure,
    source_radius,
    volume_displacement,
)
from groundsound.regularized import RegularizedField, kernel_f_derivative


@pytest.fixture(scope="module")
def event(db):
    return make_event(db["steel"], db["wood"], 0.01, 1.0, 0.5)


def test_trace_arithmetic():
    a = PressureTrace(100.0, 0.0, np.ones(10))
    b = PressureTrace(100.0, 0.0, 2 * np.ones(10))
    assert (a + b).samples[0] == 3
    assert a.scaled(3).energy() == pytest.approx(0.9)
    assert a.times[-1] == pytest.approx(0.09)
    with pytest.raises(ValueError):
        a + PressureTrace(100.0, 0.5, np.ones(10))
    with pytest.raises(ValueError):
        PressureTrace(100.0, 0.0, np.array([np.nan]))


def test_intensity_db():
    a = PressureTrace(100.0, 0.0, np.ones(10))
    assert intensity_db(a.scaled(10), a) == pytest.approx(20.0)
    with pytest.raises(SilentTraceError):
        intensity_db(a, a.scaled(0))


def test_radial_grid_weights():
    g = radial_grid(2.0, 0.01, 1e-4)
    assert g.weights.sum() == pytest.approx(math.pi * g.max_radius**2, rel=1e-12)
    assert g.max_radius >= 2.0
    assert np.all(np.diff(g.radii) > 0)


def test_arrival_window_head_wave(event, wood):
    near = (0.0, 0.0, 0.2)
    assert arrival_window(event, near, hs=wood)[0] == pytest.approx(arrival_window(event, near)[0])
    grazing = (3.0, 0.0, 0.01)
    assert arrival_window(event, grazing, hs=wood)[0] < arrival_window(event, grazing)[0] - 1e-3


def test_default_trace_covers_arrivals(event):
    spec = default_trace(event, (0, 0, 0.2), before=6, after=30)
    first, last = arrival_window(event, (0, 0, 0.2))
    assert spec.start == pytest.approx(first - 6 * event.contact_time)
    assert spec.end >= last + 29.9 * event.contact_time
    assert spec.rate == pytest.approx(32 / event.contact_time)


def test_source_radius_causal(event, wood):
    spec = default_trace(event, (0, 0, 0.2))
    r = source_radius(event, wood, spec, 343.0, 0.0, (0, 0, 0.2))
    # a ring beyond r cannot be heard inside the window
    late = r / wood.c_p + math.hypot(r, 0.2) / 343.0
    assert late >= spec.end - event.impact_time


def test_ball_dipole_far_field(event):
    """Far on axis the free sphere radiates rho0 a0^3 jerk / (2 c0 r)."""
    r = 30.0
    listener = (0.0, 0.0, event.radius + r)
    spec = default_trace(event, listener)
    p = ball_dipole_pressure(event, listener, spec, reflective=False)
    w = event.kernel_width
    jerk = event.impulse / event.mass * np.abs(
        kernel_f_derivative(np.linspace(-3 * w, 3 * w, 6001), event.epsilon, event.ground_shear_speed, 1)).max()
    assert p.peak() == pytest.approx(1.2 * event.radius**3 * jerk / (2 * 343.0 * r), rel=0.02)


def test_ball_dipole_silent_broadside(event):
    listener = (0.5, 0.0, event.radius)
    p = ball_dipole_pressure(event, listener, default_trace(event, listener), reflective=False)
    assert p.peak() < 1e-12


def test_ball_inside_rejected(event):
    with pytest.raises(ValueError):
        ball_dipole_pressure(event, (0, 0, 0.011), default_trace(event, (0, 0, 0.2)))


def test_ground_far_field_compact_limit(event, wood):
    """At range the ground is a baffled point source of volume acceleration J K f'."""
    R = 50.0
    spec = default_trace(event, (0, 0, R), before=8, after=8)
    p = rayleigh_ground_pressure(event, wood, (0, 0, R), spec, spacing=0.4)
    k_vol = wood.static_prefactor() * 2 * math.pi * wood.c_s * pekeris_volume_rate_constant(wood)
    ref = 1.2 * event.impulse * k_vol * kernel_f_derivative(spec.times - R / 343.0, event.epsilon, wood.c_s, 1)
    ref /= 2 * math.pi * R
    assert np.abs(p.samples - ref).max() < 0.02 * np.abs(ref).max()


def test_ground_zero_impulse(event, wood):
    spec = TraceSpec(0.0, 1e5, 10)
    p = rayleigh_ground_pressure(event.scaled(0.0), wood, (0, 0, 0.2), spec)
    assert p.peak() == 0


def test_ground_listener_below_plane(event, wood):
    with pytest.raises(ValueError):
        rayleigh_ground_pressure(event, wood, (0, 0, -0.1), TraceSpec(0.0, 1e5, 10))


def test_volume_displacement_tracks_pekeris(wood):
    field = RegularizedField(wood, 0.2)
    t = np.linspace(-2e-4, 6e-4, 41)
    d = volume_displacement(field, t, r_max=1.2 * wood.c_p * t.max() + 2.0)
    ref = np.array([pekeris_volume_displacement(wood, x) for x in t])
    assert np.abs(d - ref).max() < 0.1 * np.abs(ref).max()
    assert d[-1] == pytest.approx(ref[-1], rel=0.05)
    with pytest.raises(CoverageError):
        volume_displacement(field, t, r_max=0.5)
