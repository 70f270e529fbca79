import dataclasses

import numpy as np
import pytest

from groundsound.fdtd import (
    SOLID,
    GridError,
    InstabilityError,
    FaceSet,
    PointSource,
    WaveGrid,
    free_space_grid,
    gaussian_pulse,
    rasterize_ball,
    run_scene,
    snap_to_vertex,
    solid_faces,
    stable_timestep,
)
from groundsound.scenario import parse_scenario

SCENE = """
[ground]
material = wood
[object]
material = steel
radius = 0.01
[contact]
restitution = 0.5
impacts = 0.0012 -0.0007 0.15 0; 0.0143 0.0021 0.1 0.0001
[listening]
points = 0, 0, 0.06
[fdtd]
spacing = 0.005
cells = 24, 24, 20
duration = 0.0003
"""


def _centre_crossing(times, x):
    """Zero crossing between the two lobes of a bipolar pulse, linearly interpolated."""
    lo, hi = sorted((int(np.argmax(x)), int(np.argmin(x))))
    seg = x[lo:hi + 1]
    j = int(np.nonzero(np.diff(np.sign(seg)))[0][0])
    return times[lo + j] + seg[j] / (seg[j] - seg[j + 1]) * (times[1] - times[0])


def test_timestep_and_validation():
    assert stable_timestep(0.01, 343.0, 1.0) == pytest.approx(0.01 / (343 * np.sqrt(3)))
    with pytest.raises(GridError):
        WaveGrid(0.01, (2, 10, 10), (0, 0, 0))
    with pytest.raises(GridError):
        WaveGrid(0.01, (10, 10, 10), (0, 0, 0), cfl=1.5)
    g = WaveGrid(0.01, (10, 10, 10), (0, 0, 0))
    with pytest.raises(GridError):
        g.cell_of((0.5, 0.0, 0.0))


def test_free_space_pulse_speed():
    g = free_space_grid(0.01, (60, 40, 40), alpha=0.0)
    width = 1e-4
    g.sources.append(PointSource((-0.1, 0.0, 0.0), gaussian_pulse(5 * width, width)))
    mics = [(-0.05, 0.0, 0.0), (0.1, 0.0, 0.0)]
    times, rec = [], []
    while g.time < 10 * width + 0.2 / 343.0:
        g.step()
        times.append(g.time)
        rec.append([g.sample(m) for m in mics])
    rec = np.array(rec)
    t1, t2 = (_centre_crossing(np.array(times), rec[:, q]) for q in range(2))
    assert 0.15 / (t2 - t1) == pytest.approx(343.0, rel=0.02)


def test_energy_never_increases():
    rng = np.random.default_rng(1)
    g = WaveGrid(0.01, (16, 14, 12), (0, 0, 0), alpha=2e-6, sponge_cells=3)
    mask = np.zeros(g.dims, bool)
    mask[5:8, 5:8, 4:7] = True
    g.cell_type[mask] = SOLID
    g.refresh()
    g.p = rng.normal(size=g.dims) * g._air
    g.p_prev = g.p + 0.1 * rng.normal(size=g.dims) * g._air
    e = [g.energy()]
    for _ in range(300):
        g.step()
        e.append(g.energy())
    e = np.array(e)
    assert np.all(np.diff(e) <= 1e-12 * e[0])
    assert e[-1] < e[0]


def test_closed_ball_surface_has_no_net_normal():
    g = WaveGrid(0.002, (30, 30, 30), (-0.03, -0.03, 0.0))
    mask = rasterize_ball(g, (0.0, 0.0, 0.01), 0.01)
    assert not mask[:, :, 0].any()
    fs = solid_faces(g, mask, lambda p, n, t: np.zeros(len(p)))
    assert len(fs) > 0
    np.testing.assert_allclose(fs.normals.sum(axis=0), 0.0, atol=1e-9)
    # every face sits half a cell from its owning air cell centre
    own = np.column_stack([g.centres(a)[fs.cells[a]] for a in range(3)])
    np.testing.assert_allclose(np.linalg.norm(fs.points - own, axis=1), 0.001)
    with pytest.raises(GridError):
        rasterize_ball(g, (0.0, 0.0, 0.01), 1e-4)


def test_bad_shader_raises():
    g = WaveGrid(0.01, (8, 8, 8), (0, 0, 0))
    pts = np.array([[0.035, 0.035, 0.0]])
    g.faces.append(FaceSet((np.array([3]), np.array([3]), np.array([0])), pts, np.array([[0, 0, 1.0]]),
                           lambda p, n, t: np.array([np.nan])))
    with pytest.raises(InstabilityError):
        g.step()


def test_snap_to_vertex():
    assert snap_to_vertex((0.0123, -0.0049, 0.0), (0.0, 0.0, 0.0), 0.005) == pytest.approx((0.01, -0.005, 0.0))


def test_scene_superposition_and_snapping():
    sc = parse_scenario(SCENE)
    res = run_scene(sc, solo=True)
    assert set(res.traces) == {"combined", "ball", "ground"}
    # the grid is anchored on the first impact; later impacts snap to its vertices
    assert res.events[0].impact_point == pytest.approx((0.0012, -0.0007, 0.0), abs=1e-12)
    assert res.events[1].impact_point == pytest.approx((0.0162, 0.0043, 0.0), abs=1e-12)
    c = res.traces["combined"][0].samples
    s = res.traces["ball"][0].samples + res.traces["ground"][0].samples
    assert np.abs(c).max() > 0
    assert np.abs(c - s).max() <= 1e-12 * np.abs(c).max()


def test_scene_errors():
    sc = parse_scenario(SCENE)
    with pytest.raises(GridError, match="outside"):
        run_scene(dataclasses.replace(sc, listening_points=((0.0, 0.0, 0.5),)))
    with pytest.raises(GridError, match="solid"):
        run_scene(dataclasses.replace(sc, listening_points=((0.0, 0.0, 0.01),)))
    opt = dataclasses.replace(sc.fdtd, ball_geometry=False)
    with pytest.raises(GridError, match="ball_geometry"):
        run_scene(sc, options=opt)
