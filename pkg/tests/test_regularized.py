import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from groundsound.lamb import DomainError, pekeris_displacement, wavefront_times
from groundsound.materials import halfspace_from_constants
from groundsound.oracle import convolution_oracle
from groundsound.regularized import (
    RegularizedField,
    UnsupportedRegimeError,
    a_eps,
    evaluate,
    kernel_f,
    kernel_f_cdf,
    kernel_f_derivative,
    response_derivatives,
    u_eps,
    w_eps,
)

EPS = 9.888e-2


@pytest.fixture(scope="module")
def field(wood):
    return RegularizedField(wood, EPS)


def test_kernel_unit_mass_and_cdf():
    cs, eps = 1000.0, 0.1
    w = eps / cs
    total, _ = quad(kernel_f, -400 * w, 400 * w, args=(eps, cs), points=[0.0], limit=400)
    assert total == pytest.approx(1.0, rel=1e-5)
    part, _ = quad(kernel_f, -400 * w, 0.7 * w, args=(eps, cs), points=[0.0], limit=400)
    assert float(kernel_f_cdf(0.7 * w, eps, cs) - kernel_f_cdf(-400 * w, eps, cs)) == pytest.approx(part, rel=1e-8)


def test_kernel_fourth_order_tail():
    cs, eps = 1000.0, 0.1
    t = np.array([1e2, 1e3]) * eps / cs
    ratio = kernel_f(t[0], eps, cs) / kernel_f(t[1], eps, cs)
    assert ratio == pytest.approx(1e4, rel=1e-2)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_kernel_derivatives(n):
    cs, eps = 1000.0, 0.1
    t, h = 0.37 * eps / cs, 1e-4 * eps / cs
    fd = (kernel_f_derivative(t + h, eps, cs, n - 1) - kernel_f_derivative(t - h, eps, cs, n - 1)) / (2 * h)
    assert float(kernel_f_derivative(t, eps, cs, n)) == pytest.approx(float(fd), rel=1e-6)


@pytest.mark.parametrize("r, tau", [(0.05, 0.2), (0.3, 0.7), (1.0, 1.03), (2.0, 1.5), (0.5, -1.0)])
def test_matches_oracle(wood, field, r, tau):
    t = tau * r / wood.c_s
    got = float(u_eps(field, r, t))
    ref = convolution_oracle(wood, EPS, r, t)
    assert abs(got - ref) * r / wood.static_prefactor() < 1e-6


def test_late_time_static(wood, field):
    r = 0.4
    t = 400 * r / wood.c_s
    assert float(u_eps(field, r, t)) == pytest.approx(wood.static_prefactor() / r, rel=1e-4)


def test_derivative_chain(field, wood):
    r, t, h = 0.3, 1.2e-4, 2e-7
    us = np.array([float(u_eps(field, r, t + k * h)) for k in range(-3, 4)])
    d1 = (-us[0] + 9 * us[1] - 45 * us[2] + 45 * us[4] - 9 * us[5] + us[6]) / (60 * h)
    assert float(w_eps(field, r, t)) == pytest.approx(d1, rel=1e-6)
    ws = np.array([float(w_eps(field, r, t + k * h)) for k in range(-1, 2)])
    d3 = (ws[0] - 2 * ws[1] + ws[2]) / h**2
    assert float(a_eps(field, r, t)) == pytest.approx(d3, rel=1e-4)
    ev = evaluate(field, r, t)
    assert ev.a == pytest.approx(float(a_eps(field, r, t)))


def test_broadcasting(field):
    r = np.array([0.1, 0.2, 0.4])[:, None]
    t = np.linspace(0, 1e-3, 5)[None, :]
    d = response_derivatives(field, r, t, order=2)
    assert d.shape == (3, 3, 5)
    np.testing.assert_allclose(d[0][1], u_eps(field, 0.2, t[0]), rtol=1e-13)


def test_unsupported_poisson():
    hs = halfspace_from_constants(0.3, 1e9, 1000.0)
    with pytest.raises(UnsupportedRegimeError):
        RegularizedField(hs, 0.1)
    assert isinstance(UnsupportedRegimeError("x"), DomainError)
    # the quadrature oracle still works there
    assert np.isfinite(convolution_oracle(hs, 0.05, 1.0, 1.1e-3))


def test_bad_epsilon_and_radius(wood, field):
    with pytest.raises(ValueError):
        RegularizedField(wood, 0.0)
    with pytest.raises(DomainError):
        u_eps(field, 0.0, 1e-4)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.02, 3.0), st.floats(-2.0, 4.0))
def test_self_similarity(r, tau):
    """u_eps depends on (r, t, eps) only through r u and the ratios t c_s / r, eps / r."""
    hs = halfspace_from_constants(0.22, 1e9, 1000.0)
    t = tau * r / hs.c_s
    a = float(u_eps(RegularizedField(hs, 0.1 * r), r, t)) * r
    b = float(u_eps(RegularizedField(hs, 0.2 * r), 2 * r, 2 * t)) * 2 * r
    assert a == pytest.approx(b, rel=1e-8, abs=1e-12 * hs.static_prefactor())


def test_converges_to_pekeris_away_from_fronts(wood):
    r = 1.0
    wt = wavefront_times(wood, r)
    t = np.array([0.5 * wt.t_p, 0.5 * (wt.t_p + wt.t_s), 2.0 * wt.t_r])
    ref = pekeris_displacement(wood, r, t)
    errs = []
    for eps in (0.02, 0.005):
        errs.append(np.abs(u_eps(RegularizedField(wood, eps), r, t) - ref).max())
    assert errs[1] < errs[0] / 4
    assert errs[1] < 0.01 * np.abs(ref).max()
