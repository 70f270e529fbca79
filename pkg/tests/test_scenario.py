import math

import pytest

from groundsound.scenario import ScenarioError, load_scenario, parse_scenario

BASE = """
[ground]
material = wood
[object]
material = steel
radius = 0.01
[contact]
drop_height = 0.15
restitution = 0.5
[listening]
points = 0, 0, 0.2; 0.1, 0, 0.3
"""


def test_parse_base():
    sc = parse_scenario(BASE)
    assert sc.ground.name == "Wood"
    assert sc.ball_radius == 0.01
    assert len(sc.listening_points) == 2
    assert sc.impact.normal_velocity == pytest.approx(math.sqrt(2 * 9.81 * 0.15), rel=1e-3)
    assert sc.contact_time is None


def test_overrides_apply():
    sc = parse_scenario(BASE, overrides={"ground.poisson_ratio": "0.2", "air.sound_speed": "340",
                                         "fdtd.cells": "10 12 14", "fdtd.sources": "ground"})
    assert sc.ground.poisson_ratio == 0.2
    assert sc.sound_speed == 340
    assert sc.fdtd.cells == (10, 12, 14)
    assert sc.fdtd.sources == ("ground",)


def test_multiple_impacts():
    text = BASE.replace("drop_height = 0.15", "impacts = 0 0 0.15 0; 0.05 0 0.1 0.002")
    sc = parse_scenario(text)
    assert len(sc.impacts) == 2
    assert sc.impacts[1].point == (0.05, 0.0, 0.0)
    assert sc.impacts[1].time == 0.002


@pytest.mark.parametrize("edit, match", [
    (("points = 0, 0, 0.2; 0.1, 0, 0.3", "points = 0, 0, 0"), "above the ground"),
    (("points = 0, 0, 0.2; 0.1, 0, 0.3", "points = "), "at least one"),
    (("radius = 0.01", "radius = -1"), "radius"),
    (("restitution = 0.5", "restitution = 1.5"), "restitution"),
    (("material = wood", "material = cheese"), "unknown material"),
    (("drop_height = 0.15", "drop_height = 0.15\nnormal_velocity = 1"), "exactly one"),
    (("[listening]", "[colour]\nx = 1\n[listening]"), "unknown section"),
    (("restitution = 0.5", "restitution = 0.5\nbounce = 2"), "unknown keys"),
    (("drop_height = 0.15", "drop_height = 0.15\nimpact_point = 0 0 0.1"), "ground plane"),
    (("material = wood", "material = wood\npoisson_ratio = 0.7"), "poisson"),
])
def test_errors(edit, match):
    with pytest.raises(ScenarioError, match=match):
        parse_scenario(BASE.replace(*edit))


def test_missing_section():
    with pytest.raises(ScenarioError, match="missing section"):
        parse_scenario(BASE.split("[listening]")[0])


def test_packaged_scenarios_load():
    from importlib import resources

    root = resources.files("groundsound") / "data" / "scenarios"
    names = sorted(p.name for p in root.iterdir() if p.name.endswith(".ini"))
    assert "steel_wood.ini" in names
    for name in names:
        load_scenario(root / name)
