"""Ground impact sound: regularized halfspace response, radiation and FDTD synthesis."""

__version__ = "0.1.0"

from .contact import ContactEvent, hertz_event, make_event
from .materials import HalfspaceParams, Material, builtin_materials, derive_halfspace, load_material_db
from .radiation import PressureTrace, ball_dipole_pressure, intensity_db, rayleigh_ground_pressure
from .regularized import RegularizedField, a_eps, u_eps, w_eps
from .scenario import ScenarioConfig, load_scenario, parse_scenario

__all__ = [
    "ContactEvent",
    "HalfspaceParams",
    "Material",
    "PressureTrace",
    "RegularizedField",
    "ScenarioConfig",
    "a_eps",
    "ball_dipole_pressure",
    "builtin_materials",
    "derive_halfspace",
    "hertz_event",
    "intensity_db",
    "load_material_db",
    "load_scenario",
    "make_event",
    "parse_scenario",
    "rayleigh_ground_pressure",
    "u_eps",
    "w_eps",
]
