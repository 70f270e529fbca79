import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groundsound.lamb import DomainError, pekeris_displacement, step_shape, wavefront_times


def test_wavefront_order(wood):
    wt = wavefront_times(wood, 1.0)
    assert wt.t_p < wt.t_s < wt.t_r
    assert wt.t_s == pytest.approx(1.0 / wood.c_s)


def test_quiet_before_p_and_static_after_rayleigh(wood):
    r = 0.7
    wt = wavefront_times(wood, r)
    t = np.array([-1e-3, 0.5 * wt.t_p, 0.999 * wt.t_p])
    assert np.all(pekeris_displacement(wood, r, t) == 0)
    late = pekeris_displacement(wood, r, 1.01 * wt.t_r)
    assert late == pytest.approx(wood.static_prefactor() / r, rel=1e-12)


def test_rayleigh_singularity_diverges(wood):
    g = wood.gamma
    left = step_shape(wood, g - np.array([1e-2, 1e-4, 1e-6]))
    assert np.all(np.diff(np.abs(left)) > 0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 10.0), st.floats(0.0, 3.0))
def test_scaling_in_r(r, tau):
    """Displacement at fixed tau = c_s t / r scales as 1 / r."""
    from groundsound.materials import halfspace_from_constants

    hs = halfspace_from_constants(0.25, 1e9, 1000.0)
    t = tau * r / hs.c_s
    u1 = pekeris_displacement(hs, r, t)
    u2 = pekeris_displacement(hs, 2 * r, 2 * t)
    assert u2 == pytest.approx(u1 / 2, rel=1e-9, abs=1e-300)


def test_bad_radius(wood):
    with pytest.raises(DomainError):
        pekeris_displacement(wood, 0.0, 1e-3)
    with pytest.raises(DomainError):
        wavefront_times(wood, -1.0)
