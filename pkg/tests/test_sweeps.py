import math

import numpy as np
import pytest

from groundsound.sweeps import (
    MaterialMatrix,
    _pmap,
    fixed_poisson_halfspace,
    knee_reference,
    loglog_slope,
    slope_crossing,
    sweep_angle,
)


def test_loglog_slope_exact():
    x = np.logspace(0, 3, 10)
    y_db = 10 * np.log10(5 * x**2)
    assert loglog_slope(x, y_db, 0, 50) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        loglog_slope(x, y_db, 2000, 3000)


def test_slope_crossing_knee():
    x = np.logspace(1, 5, 81)
    k = 1e3
    y_db = 10 * np.log10(x**2 / (1 + (x / k) ** 2))
    knee = slope_crossing(x, y_db, 1.0)
    assert knee == pytest.approx(k, rel=0.01)
    assert math.isnan(slope_crossing(x, y_db, 5.0))


def test_matrix_classification():
    m = MaterialMatrix(["a", "b"], ["x", "y"], np.array([[0.0, -13.0], [-13.01, 3.0]]))
    assert m.classification(0, 0) == "teal"
    assert m.classification(0, 1) == "orange"
    assert m.classification(1, 0) == "none"
    assert m.cell("b", "y") == 3.0


def test_fixed_poisson_keeps_shear_speed(db):
    hs = fixed_poisson_halfspace(db["steel"])
    assert hs.nu == 0.25
    assert hs.c_s == pytest.approx(db["steel"].shear_speed)
    assert hs.mu == pytest.approx(db["steel"].youngs_modulus / 2.5)


def test_knee_reference(steel_wood):
    assert knee_reference(steel_wood, 1.633e-4, 0.2) == pytest.approx(math.sqrt(343 * 0.2 / 1.633e-4))


def test_pmap_matches_serial():
    xs = [1.0, 4.0, 9.0]
    assert _pmap(math.sqrt, xs, workers=2) == _pmap(math.sqrt, xs, workers=1) == [1.0, 2.0, 3.0]


def test_ball_elevation_minimum(steel_wood):
    res = sweep_angle(steel_wood, [5.0, 45.0, 90.0], ground=False, ball_angles_deg=np.arange(0.5, 20.01, 0.5))
    assert 3.0 <= res.fits["ball_min_deg"] <= 7.0
    assert np.all(np.isnan(res.ground_db))
    assert res.ball_db[2] > res.ball_db[0]
