"""Scenario files: INI-style sections with SI values.

Example::

    [ground]
    material = wood

    [object]
    material = steel
    radius = 0.01

    [contact]
    drop_height = 0.15
    restitution = 0.5
    impact_point = 0, 0, 0

    [listening]
    points = 0, 0, 0.2

Sections and keys:

``[ground]``, ``[object]``
    ``material`` (database key), optional ``youngs_modulus``,
    ``poisson_ratio``, ``density`` overrides. ``[object]`` also needs
    ``radius``.
``[contact]``
    ``restitution``; exactly one of ``drop_height`` / ``normal_velocity``;
    optional ``impact_point`` (x, y, z with z = 0), ``impact_time``,
    ``contact_time`` (overrides the Hertz value). Several impacts can be
    listed instead with ``impacts = x y drop_height time; ...``.
``[listening]``
    ``points``: ``x, y, z`` triples separated by ``;``.
``[air]``
    ``density`` (default 1.2), ``sound_speed`` (default 343).
``[output]``
    ``sample_rate`` (WAV rate, default 44100), ``duration`` (s),
    ``start_time`` (s), ``internal_rate`` (Hz, rate used for metrics).
``[rayleigh]``
    ``spacing`` (radial step as a fraction of eps * min(1, c0 / c_s)), ``r_min``,
    ``azimuths``, ``margin``.
``[fdtd]``
    ``spacing``, ``cells`` (nx, ny, nz), ``duration``, ``alpha``, ``cfl``,
    ``sponge_cells``, ``sources`` (ball, ground), ``ball_geometry``,
    ``snapshot_every``.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace

from .contact import drop_velocity
from .materials import Material, MaterialError, load_material_db


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Impact:
    point: tuple[float, float, float]
    time: float
    normal_velocity: float
    drop_height: float | None = None


@dataclass(frozen=True)
class RayleighOptions:
    spacing: float = 0.1
    r_min: float = 1e-4
    azimuths: int = 96
    margin: float = 0.2


@dataclass(frozen=True)
class FdtdOptions:
    spacing: float = 0.005
    cells: tuple[int, int, int] = (64, 64, 64)
    duration: float = 2.0e-3
    alpha: float = 2e-6
    cfl: float = 0.9
    sponge_cells: int = 8
    sources: tuple[str, ...] = ("ball", "ground")
    ball_geometry: bool = True
    snapshot_every: int = 0


@dataclass(frozen=True)
class ScenarioConfig:
    ground: Material
    object: Material
    ball_radius: float
    restitution: float
    impacts: tuple[Impact, ...]
    listening_points: tuple[tuple[float, float, float], ...]
    contact_time: float | None = None
    air_density: float = 1.2
    sound_speed: float = 343.0
    sample_rate: float = 44100.0
    internal_rate: float | None = None
    duration: float | None = None
    start_time: float | None = None
    rayleigh: RayleighOptions = field(default_factory=RayleighOptions)
    fdtd: FdtdOptions = field(default_factory=FdtdOptions)

    def __post_init__(self):
        if not self.ball_radius > 0:
            raise ScenarioError(f"object radius must be > 0, got {self.ball_radius}")
        if not 0.0 <= self.restitution <= 1.0:
            raise ScenarioError(f"restitution must lie in [0, 1], got {self.restitution}")
        if not self.impacts:
            raise ScenarioError("scenario has no impacts")
        if not self.listening_points:
            raise ScenarioError("listening points: at least one point is required")
        for p in self.listening_points:
            if not p[2] > 0:
                raise ScenarioError(f"listening point {p} must lie strictly above the ground plane z = 0")
        for imp in self.impacts:
            if imp.point[2] != 0:
                raise ScenarioError(f"impact point {imp.point} must lie on the ground plane z = 0")
            if not imp.normal_velocity > 0:
                raise ScenarioError("impact normal velocity must be positive")
        if self.contact_time is not None and not self.contact_time > 0:
            raise ScenarioError("contact_time must be positive")

    @property
    def impact(self) -> Impact:
        return self.impacts[0]

    def with_listener(self, point) -> "ScenarioConfig":
        return replace(self, listening_points=(tuple(float(x) for x in point),))


_SCHEMA = {
    "ground": {"material", "youngs_modulus", "poisson_ratio", "density"},
    "object": {"material", "youngs_modulus", "poisson_ratio", "density", "radius"},
    "contact": {"drop_height", "normal_velocity", "restitution", "impact_point", "impact_time",
                "contact_time", "impacts"},
    "listening": {"points"},
    "air": {"density", "sound_speed"},
    "output": {"sample_rate", "duration", "start_time", "internal_rate"},
    "rayleigh": {"spacing", "r_min", "azimuths", "margin"},
    "fdtd": {"spacing", "cells", "duration", "alpha", "cfl", "sponge_cells", "sources",
             "ball_geometry", "snapshot_every"},
}
_REQUIRED = ("ground", "object", "contact", "listening")


def _floats(text: str, n: int | None, what: str) -> tuple[float, ...]:
    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise ScenarioError(f"{what}: expected numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise ScenarioError(f"{what}: expected {n} values, got {len(vals)}")
    return vals


def _number(section, key, what=None, cast=float):
    try:
        return cast(section[key])
    except ValueError:
        raise ScenarioError(f"{what or key}: cannot parse {section[key]!r}") from None


def _material(section, name, db) -> Material:
    key = section.get("material")
    if key is None:
        raise ScenarioError(f"[{name}]: missing key 'material'")
    base = db.get(key.strip().lower())
    if base is None:
        raise ScenarioError(f"[{name}]: unknown material {key!r}; known: {sorted(db)}")
    overrides = {k: _number(section, k, f"[{name}] {k}") for k in ("youngs_modulus", "poisson_ratio", "density")
                 if k in section}
    try:
        return base.with_overrides(**overrides)
    except MaterialError as exc:
        raise ScenarioError(f"[{name}]: {exc}") from None


def _impacts(sec) -> tuple[Impact, ...]:
    if "impacts" in sec:
        out = []
        for item in sec["impacts"].split(";"):
            if not item.strip():
                continue
            x, y, h, t = _floats(item, 4, "[contact] impacts entry")
            if not h > 0:
                raise ScenarioError(f"[contact] impacts: drop height must be positive, got {h}")
            out.append(Impact((x, y, 0.0), t, drop_velocity(h), h))
        return tuple(out)
    has_h, has_v = "drop_height" in sec, "normal_velocity" in sec
    if has_h == has_v:
        raise ScenarioError("[contact]: give exactly one of drop_height / normal_velocity")
    point = _floats(sec.get("impact_point", "0 0 0"), 3, "[contact] impact_point")
    time = _number(sec, "impact_time") if "impact_time" in sec else 0.0
    if has_h:
        h = _number(sec, "drop_height", "[contact] drop_height")
        if not h > 0:
            raise ScenarioError(f"[contact] drop_height must be positive, got {h}")
        return (Impact(point, time, drop_velocity(h), h),)
    v = _number(sec, "normal_velocity", "[contact] normal_velocity")
    return (Impact(point, time, v, None),)


def parse_scenario(text: str, source: str = "<scenario>", db: dict[str, Material] | None = None,
                   overrides: dict[str, str] | None = None) -> ScenarioConfig:
    """Parse and validate scenario text.

    ``overrides`` maps ``"section.key"`` to a replacement value string.
    """
    db = db if db is not None else load_material_db()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioError(f"{source}: {exc}") from None
    for dotted, value in (overrides or {}).items():
        sec, _, key = dotted.partition(".")
        if not key:
            raise ScenarioError(f"override {dotted!r}: expected section.key")
        if not parser.has_section(sec):
            parser.add_section(sec)
        parser[sec][key] = value
    for sec in parser.sections():
        if sec not in _SCHEMA:
            raise ScenarioError(f"{source}: unknown section [{sec}]")
        unknown = set(parser[sec]) - _SCHEMA[sec]
        if unknown:
            raise ScenarioError(f"{source}: [{sec}] unknown keys {sorted(unknown)}")
    for sec in _REQUIRED:
        if not parser.has_section(sec):
            raise ScenarioError(f"{source}: missing section [{sec}]")

    obj_sec = parser["object"]
    if "radius" not in obj_sec:
        raise ScenarioError("[object]: missing key 'radius'")
    contact = parser["contact"]
    if "restitution" not in contact:
        raise ScenarioError("[contact]: missing key 'restitution'")
    points_text = parser["listening"].get("points", "")
    points = tuple(_floats(p, 3, "[listening] points") for p in points_text.split(";") if p.strip())

    kw = {}
    if parser.has_section("air"):
        air = parser["air"]
        if "density" in air:
            kw["air_density"] = _number(air, "density", "[air] density")
        if "sound_speed" in air:
            kw["sound_speed"] = _number(air, "sound_speed", "[air] sound_speed")
    if parser.has_section("output"):
        out = parser["output"]
        for key in ("sample_rate", "duration", "start_time", "internal_rate"):
            if key in out:
                kw[key] = _number(out, key, f"[output] {key}")
    if parser.has_section("rayleigh"):
        ray = parser["rayleigh"]
        kw["rayleigh"] = RayleighOptions(
            spacing=_number(ray, "spacing") if "spacing" in ray else RayleighOptions.spacing,
            r_min=_number(ray, "r_min") if "r_min" in ray else RayleighOptions.r_min,
            azimuths=_number(ray, "azimuths", cast=int) if "azimuths" in ray else RayleighOptions.azimuths,
            margin=_number(ray, "margin") if "margin" in ray else RayleighOptions.margin,
        )
    if parser.has_section("fdtd"):
        kw["fdtd"] = _fdtd_options(parser["fdtd"])
    if "contact_time" in contact:
        kw["contact_time"] = _number(contact, "contact_time", "[contact] contact_time")

    return ScenarioConfig(
        ground=_material(parser["ground"], "ground", db),
        object=_material(obj_sec, "object", db),
        ball_radius=_number(obj_sec, "radius", "[object] radius"),
        restitution=_number(contact, "restitution", "[contact] restitution"),
        impacts=_impacts(contact),
        listening_points=points,
        **kw,
    )


def _fdtd_options(sec) -> FdtdOptions:
    d = FdtdOptions()
    kw = {}
    for key in ("spacing", "duration", "alpha", "cfl"):
        if key in sec:
            kw[key] = _number(sec, key, f"[fdtd] {key}")
    for key in ("sponge_cells", "snapshot_every"):
        if key in sec:
            kw[key] = _number(sec, key, f"[fdtd] {key}", cast=int)
    if "cells" in sec:
        kw["cells"] = tuple(int(v) for v in _floats(sec["cells"], 3, "[fdtd] cells"))
    if "sources" in sec:
        names = tuple(s.strip().lower() for s in sec["sources"].replace(",", " ").split())
        bad = set(names) - {"ball", "ground"}
        if bad:
            raise ScenarioError(f"[fdtd] sources: unknown {sorted(bad)}")
        kw["sources"] = names
    if "ball_geometry" in sec:
        kw["ball_geometry"] = sec.getboolean("ball_geometry")
    return replace(d, **kw)


def load_scenario(path, db=None, overrides=None) -> ScenarioConfig:
    with open(path) as fh:
        return parse_scenario(fh.read(), str(path), db=db, overrides=overrides)
