"""Ground-vs-ball intensity studies: the material matrix and one-parameter sweeps.

Every study fixes a scenario and varies one thing. Intensities are
``10 log10`` of the time-integrated squared pressure (Pa^2 s); ratios are
ground over ball.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .contact import ContactEvent, make_event
from .materials import HalfspaceParams, Material, derive_halfspace, halfspace_from_constants, load_material_db
from .radiation import (
    PressureTrace,
    ball_dipole_pressure,
    default_trace,
    rayleigh_ground_pressure,
)
from .scenario import RayleighOptions, ScenarioConfig

log = logging.getLogger(__name__)

#: Ground louder than the ball.
LOUDER_DB = 0.0
#: Most sensitive just-noticeable level difference.
JND_DB = -13.0
#: Contact time and Poisson ratio held fixed across the material matrix.
MATRIX_CONTACT_TIME = 1.633e-4
MATRIX_POISSON = 0.25


def energy_db(trace: PressureTrace) -> float:
    e = trace.energy()
    return 10.0 * math.log10(e) if e > 0 else -math.inf


def fixed_poisson_halfspace(material: Material, nu: float = MATRIX_POISSON) -> HalfspaceParams:
    """Halfspace with Poisson ratio forced to ``nu`` but the material's own shear speed.

    The shear modulus is taken from ``E`` at the forced ratio, ``E / (2 (1 + nu))``,
    while ``c_s`` stays ``sqrt(mu / rho)`` of the material as listed.
    """
    return halfspace_from_constants(nu, material.youngs_modulus / (2.0 * (1.0 + nu)), material.shear_speed)


def _event(scenario: ScenarioConfig, obj: Material, gnd: Material, hs: HalfspaceParams,
           contact_time: float | None) -> ContactEvent:
    imp = scenario.impact
    ev = make_event(obj, gnd, scenario.ball_radius, imp.normal_velocity, scenario.restitution,
                    impact_point=imp.point, impact_time=imp.time,
                    contact_time=contact_time if contact_time is not None else scenario.contact_time)
    if ev.ground_shear_speed != hs.c_s:
        ev = replace(ev, ground_shear_speed=hs.c_s, epsilon=hs.c_s * ev.contact_time / 4.0)
    return ev


def pair_traces(scenario: ScenarioConfig, event: ContactEvent, hs: HalfspaceParams, listener=None,
                options: RayleighOptions | None = None) -> tuple[PressureTrace, PressureTrace]:
    """Ground and ball traces on a common window at one listener."""
    listener = scenario.listening_points[0] if listener is None else listener
    opt = options or scenario.rayleigh
    c0, rho0 = scenario.sound_speed, scenario.air_density
    spec = default_trace(event, listener, c0, hs=hs, rate=scenario.internal_rate)
    ground = rayleigh_ground_pressure(event, hs, listener, spec, rho0, c0, spacing=opt.spacing,
                                      r_min=opt.r_min, azimuths=opt.azimuths, margin=opt.margin)
    ball = ball_dipole_pressure(event, listener, spec, reflective=True, rho0=rho0, c0=c0)
    return ground, ball


def _pmap(fn, items, workers: int = 1) -> list:
    """Ordered map, in worker processes when ``workers > 1``."""
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _pair_db(args) -> tuple[float, float]:
    scenario, event, hs, listener = args
    g, b = pair_traces(scenario, event, hs, listener=listener)
    return energy_db(g), energy_db(b)


# ---------------------------------------------------------------------------
# material matrix


@dataclass
class MaterialMatrix:
    """Relative intensity (dB) of ground to ball sound; rows are balls, columns grounds."""

    balls: list[str]
    grounds: list[str]
    db: np.ndarray

    @property
    def louder(self) -> np.ndarray:
        return self.db >= LOUDER_DB

    @property
    def audible(self) -> np.ndarray:
        return self.db >= JND_DB

    def classification(self, i: int, j: int) -> str:
        if self.louder[i, j]:
            return "teal"
        if self.audible[i, j]:
            return "orange"
        return "none"

    def cell(self, ball: str, ground: str) -> float:
        return float(self.db[self.balls.index(ball), self.grounds.index(ground)])


def material_matrix(
    scenario: ScenarioConfig,
    materials: dict[str, Material] | None = None,
    contact_time: float = MATRIX_CONTACT_TIME,
    nu: float = MATRIX_POISSON,
    direct: bool = False,
    workers: int = 1,
) -> MaterialMatrix:
    """Ground-to-ball intensity for every ball/ground pair of ``materials``.

    Geometry, drop and listener come from ``scenario``. With the contact time
    fixed, the ball acceleration ``J / m = (1 + restitution) v_n`` does not
    depend on the ball material while the ground sound scales with
    ``J``, i.e. with the ball density. Each ground is therefore solved once and
    rows differ by ``20 log10`` of the density ratio. ``direct=True`` solves
    every pair instead.
    """
    materials = materials if materials is not None else load_material_db()
    names = list(materials)
    ref = names[0]
    jobs, where = [], []
    for j, gname in enumerate(names):
        gnd = materials[gname]
        hs = fixed_poisson_halfspace(gnd, nu)
        balls = names if direct else [ref]
        for bname in balls:
            jobs.append((scenario, _event(scenario, materials[bname], gnd, hs, contact_time), hs, None))
            where.append((names.index(bname), j))
    results = _pmap(_pair_db, jobs, workers)
    db = np.full((len(names), len(names)), np.nan)
    for (i, j), (g, b) in zip(where, results):
        db[i, j] = g - b
    if not direct:
        for j in range(len(names)):
            log.info("ground %s: %.2f dB against a %s ball", names[j], db[0, j], ref)
            for i, bname in enumerate(names):
                db[i, j] = db[0, j] + 20.0 * math.log10(materials[bname].density / materials[ref].density)
    return MaterialMatrix(names, names, db)


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepResult:
    """Per-sample ground and ball intensities along one axis, plus fitted features."""

    axis: str
    values: np.ndarray
    ground_db: np.ndarray
    ball_db: np.ndarray
    fits: dict[str, float] = field(default_factory=dict)

    @property
    def ratio_db(self) -> np.ndarray:
        return self.ground_db - self.ball_db

    def columns(self) -> dict[str, np.ndarray]:
        return {self.axis: self.values, "ground_db": self.ground_db, "ball_db": self.ball_db,
                "ratio_db": self.ratio_db}


def loglog_slope(x, y_db, lo: float, hi: float) -> float:
    """Least-squares slope of ``log10(intensity)`` against ``log10(x)`` over ``lo <= x <= hi``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y_db, dtype=float) / 10.0
    m = (x >= lo) & (x <= hi)
    if m.sum() < 2:
        raise ValueError(f"fewer than two samples in [{lo}, {hi}]")
    return float(np.polyfit(np.log10(x[m]), y[m], 1)[0])


def _fit(x, y_db, lo: float, hi: float) -> float:
    """:func:`loglog_slope`, or NaN with a warning when the range holds too few samples."""
    try:
        return loglog_slope(x, y_db, lo, hi)
    except ValueError as exc:
        log.warning("slope fit skipped: %s", exc)
        return math.nan


def slope_crossing(x, y_db, level: float) -> float:
    """First ``x`` where the local log-log slope falls through ``level`` (log-interpolated)."""
    lx = np.log10(np.asarray(x, dtype=float))
    ly = np.asarray(y_db, dtype=float) / 10.0
    slopes = np.diff(ly) / np.diff(lx)
    mids = 0.5 * (lx[1:] + lx[:-1])
    for k in range(len(slopes) - 1):
        if slopes[k] >= level > slopes[k + 1]:
            f = (slopes[k] - level) / (slopes[k] - slopes[k + 1])
            return float(10 ** (mids[k] + f * (mids[k + 1] - mids[k])))
    return math.nan


def _elevation_point(scenario: ScenarioConfig, distance: float, degrees: float):
    imp = np.asarray(scenario.impact.point, dtype=float)
    th = math.radians(degrees)
    return tuple(imp + np.array([distance * math.cos(th), 0.0, distance * math.sin(th)]))


def _listener_distance(scenario: ScenarioConfig) -> float:
    return float(np.linalg.norm(np.subtract(scenario.listening_points[0], scenario.impact.point)))


def sweep_angle(scenario: ScenarioConfig, angles_deg, distance: float | None = None,
                ball_angles_deg=None, ground: bool = True, workers: int = 1) -> SweepResult:
    """Intensities against listener elevation at fixed distance from the impact.

    ``distance`` defaults to the distance of the scenario's first listener.
    The ball model is cheap, so ``ball_angles_deg`` (default a half-degree
    grid) is scanned separately to locate its minimum; the result carries it
    in ``fits["ball_min_deg"]``. With ``ground=False`` only the ball is computed.
    """
    distance = _listener_distance(scenario) if distance is None else distance
    hs = derive_halfspace(scenario.ground)
    ev = _event(scenario, scenario.object, scenario.ground, hs, None)
    angles = np.asarray(angles_deg, dtype=float)
    c0, rho0 = scenario.sound_speed, scenario.air_density

    def ball_db(th):
        pt = _elevation_point(scenario, distance, th)
        spec = default_trace(ev, pt, c0, hs=hs, rate=scenario.internal_rate)
        return energy_db(ball_dipole_pressure(ev, pt, spec, rho0=rho0, c0=c0))

    if ground:
        res = _pmap(_pair_db, [(scenario, ev, hs, _elevation_point(scenario, distance, th)) for th in angles],
                    workers)
        g_db = np.array([r[0] for r in res])
        b_db = np.array([r[1] for r in res])
    else:
        g_db = np.full(len(angles), np.nan)
        b_db = np.array([ball_db(th) for th in angles])
    fine = np.arange(0.5, 90.01, 0.5) if ball_angles_deg is None else np.asarray(ball_angles_deg, dtype=float)
    fine_db = np.array([ball_db(th) for th in fine])
    fits = {"distance": distance, "ball_min_deg": float(fine[int(np.argmin(fine_db))])}
    return SweepResult("elevation_deg", angles, g_db, b_db, fits)


def knee_reference(scenario: ScenarioConfig, contact_time: float, distance: float) -> float:
    """``sqrt(c0 R / t_c)``, the speed scale of the ground-sound knee."""
    return math.sqrt(scenario.sound_speed * distance / contact_time)


def sweep_cs(scenario: ScenarioConfig, speeds, contact_time: float | None = None,
             low_fit: float = 0.5, high_fit: float = 60.0, workers: int = 1) -> SweepResult:
    """Ground intensity against ground shear speed at fixed shear modulus and contact time.

    ``c_s`` is varied through the density, so the static compliance stays put.
    Slopes are fitted below ``low_fit`` and above ``high_fit`` times the knee
    reference ``sqrt(c0 R / t_c)``. The knee is where the local slope falls
    through the mean of the two fitted slopes; ``fits["knee_A"]`` is the knee
    over the reference.
    """
    distance = _listener_distance(scenario)
    base = derive_halfspace(scenario.ground)
    ev0 = _event(scenario, scenario.object, scenario.ground, base, contact_time)
    t_c = ev0.contact_time
    speeds = np.asarray(speeds, dtype=float)
    jobs = []
    for cs in speeds:
        hs = halfspace_from_constants(base.nu, base.mu, float(cs))
        jobs.append((scenario, replace(ev0, ground_shear_speed=hs.c_s, epsilon=hs.c_s * t_c / 4.0), hs, None))
    res = _pmap(_pair_db, jobs, workers)
    g_db = np.array([r[0] for r in res])
    b_db = np.array([r[1] for r in res])
    ref = knee_reference(scenario, t_c, distance)
    fits = {"contact_time": t_c, "knee_reference": ref}
    fits["low_slope"] = _fit(speeds, g_db, 0.0, low_fit * ref)
    fits["high_slope"] = _fit(speeds, g_db, high_fit * ref, math.inf)
    knee = slope_crossing(speeds, g_db, 0.5 * (fits["low_slope"] + fits["high_slope"]))
    fits["knee"] = knee
    fits["knee_A"] = knee / ref
    return SweepResult("c_s", speeds, g_db, b_db, fits)


def sweep_tc(scenario: ScenarioConfig, contact_times, low_fit: float = 0.05,
             high_fit: float = 20.0, workers: int = 1) -> SweepResult:
    """Ground and ball intensities against contact time.

    Slopes are fitted below ``low_fit`` and above ``high_fit`` times the
    acoustic crossing time ``R / c0`` of the listener distance.
    """
    distance = _listener_distance(scenario)
    hs = derive_halfspace(scenario.ground)
    tcs = np.asarray(contact_times, dtype=float)
    jobs = [(scenario, _event(scenario, scenario.object, scenario.ground, hs, float(tc)), hs, None) for tc in tcs]
    res = _pmap(_pair_db, jobs, workers)
    g_db = np.array([r[0] for r in res])
    b_db = np.array([r[1] for r in res])
    cross = distance / scenario.sound_speed
    fits = {"crossing_time": cross}
    lo, hi = low_fit * cross, high_fit * cross
    fits["ground_low_slope"] = _fit(tcs, g_db, 0.0, lo)
    fits["ball_low_slope"] = _fit(tcs, b_db, 0.0, lo)
    fits["ball_high_slope"] = _fit(tcs, b_db, hi, math.inf)
    fits["ground_high_slope"] = _fit(tcs, g_db, hi, math.inf)
    return SweepResult("contact_time", tcs, g_db, b_db, fits)


#: Default sample grids of the sweeps.
DEFAULT_ANGLES = (2.0, 5.0, 10.0, 20.0, 30.0, 45.0, 60.0, 75.0, 90.0)
DEFAULT_SPEEDS = tuple(float(v) for v in np.logspace(2, 5.4, 18))
DEFAULT_CONTACT_TIMES = tuple(float(v) for v in np.logspace(-5.5, -1, 14))
