"""Free-field sound from the ground (Rayleigh integral) and from the ball (dipole).

Ground pressure at a point above the rigid-baffled plane::

    p(x, t) = rho0 * J * integral a_eps(r', t - R'/c0) / (2 pi R') dA'

The plane is discretized on annuli around the impact point. For a listener on
the impact axis every annulus has one distance, so ``a_eps`` is evaluated
exactly at the retarded times. Off axis, each annulus is split into azimuthal
cells and ``a_eps`` is tabulated on a fine source-time grid and interpolated.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .contact import ContactEvent, ball_acceleration
from .materials import HalfspaceParams
from .regularized import RegularizedField, kernel_f_cdf, kernel_f_derivative, response_derivatives

log = logging.getLogger(__name__)

AIR_DENSITY = 1.2
SOUND_SPEED = 343.0


class CoverageError(ValueError):
    pass


class SilentTraceError(ValueError):
    pass


@dataclass(frozen=True)
class PressureTrace:
    """Uniformly sampled pressure (Pa)."""

    sample_rate: float
    start_time: float
    samples: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("pressure trace contains non-finite samples")

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(len(self.samples)) / self.sample_rate

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    def energy(self) -> float:
        """Time-integrated squared pressure, Pa^2 s."""
        return float(np.sum(self.samples**2) / self.sample_rate)

    def peak(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def __add__(self, other: "PressureTrace") -> "PressureTrace":
        _check_aligned(self, other)
        return PressureTrace(self.sample_rate, self.start_time, self.samples + other.samples)

    def scaled(self, k: float) -> "PressureTrace":
        return PressureTrace(self.sample_rate, self.start_time, self.samples * k)


def _check_aligned(a: PressureTrace, b: PressureTrace):
    if a.sample_rate != b.sample_rate or len(a.samples) != len(b.samples) or \
            not math.isclose(a.start_time, b.start_time, rel_tol=0, abs_tol=0.25 / a.sample_rate):
        raise ValueError("traces must share sample rate, start time and length")


@dataclass(frozen=True)
class TraceSpec:
    """Sampling of an output trace: ``n`` samples at ``rate`` from ``start``."""

    start: float
    rate: float
    n: int

    @property
    def times(self) -> np.ndarray:
        return self.start + np.arange(self.n) / self.rate

    @property
    def end(self) -> float:
        return self.start + (self.n - 1) / self.rate


def _ball_centres(event: ContactEvent):
    centre = np.asarray(event.impact_point, dtype=float) + np.array([0.0, 0.0, event.radius])
    return centre, centre * np.array([1.0, 1.0, -1.0])


def arrival_window(event: ContactEvent, listener, c0: float = SOUND_SPEED,
                   hs: HalfspaceParams | None = None) -> tuple[float, float]:
    """Earliest and latest main arrival times at ``listener`` over ground and ball sources.

    With ``hs`` given and ``c_p > c0`` the ground head wave (P front along the
    surface, then air) is included, which can beat the direct path at low
    elevation.
    """
    listener = np.asarray(listener, dtype=float)
    impact = np.asarray(event.impact_point, dtype=float)
    direct = float(np.linalg.norm(listener - impact)) / c0
    balls = [(float(np.linalg.norm(listener - c)) - event.radius) / c0 for c in _ball_centres(event)]
    first = min([direct] + balls)
    if hs is not None and hs.c_p > c0:
        rho = float(np.hypot(*(listener[:2] - impact[:2])))
        z = float(listener[2])
        sin_c = c0 / hs.c_p
        tan_c = sin_c / math.sqrt(1.0 - sin_c * sin_c)
        if rho > z * tan_c:
            head = (rho - z * tan_c) / hs.c_p + z / (c0 * math.sqrt(1.0 - sin_c * sin_c))
            first = min(first, head)
    last = max([direct] + balls)
    return event.impact_time + first, event.impact_time + last


def default_trace(event: ContactEvent, listener, c0: float = SOUND_SPEED, rate: float | None = None,
                  before: float = 6.0, after: float = 30.0, duration: float | None = None,
                  start: float | None = None, hs: HalfspaceParams | None = None) -> TraceSpec:
    """Window from ``before`` contact times ahead of the first arrival to ``after`` past the last.

    Arrivals are those of :func:`arrival_window`; ``rate`` defaults to 32
    samples per contact time.
    """
    t_c = event.contact_time
    rate = rate or 32.0 / t_c
    first, last = arrival_window(event, listener, c0, hs)
    start = first - before * t_c if start is None else start
    duration = (last + after * t_c - start) if duration is None else duration
    return TraceSpec(start=start, rate=rate, n=int(round(duration * rate)) + 1)


# ---------------------------------------------------------------------------
# radial grid


@dataclass(frozen=True)
class RadialGrid:
    """Annuli covering the disc ``r < R_max``; nodes at annulus mid-radii."""

    edges: np.ndarray

    @property
    def radii(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def weights(self) -> np.ndarray:
        return np.pi * (self.edges[1:] ** 2 - self.edges[:-1] ** 2)

    @property
    def max_radius(self) -> float:
        return float(self.edges[-1])


def radial_grid(r_max: float, dr: float, r_min: float = 1e-4, ratio: float = 1.1) -> RadialGrid:
    """Geometric annuli from ``r_min`` until the step reaches ``dr``, then uniform to ``r_max``."""
    if not r_max > r_min:
        raise ValueError("r_max must exceed r_min")
    edges = [0.0, r_min]
    r = r_min
    while r * (ratio - 1.0) < dr and r < r_max:
        r *= ratio
        edges.append(min(r, r_max))
    if edges[-1] < r_max:
        n = max(1, int(math.ceil((r_max - edges[-1]) / dr)))
        edges.extend(np.linspace(edges[-1], r_max, n + 1)[1:])
    return RadialGrid(np.asarray(edges))


# ---------------------------------------------------------------------------
# ground radiation


def _ring_accel(field: RegularizedField, r: np.ndarray, t: np.ndarray, chunk: int = 400_000) -> np.ndarray:
    """``a_eps`` on an (rings x times) grid, chunked to bound memory."""
    out = np.empty((len(r), t.shape[-1]) if t.ndim == 1 else t.shape)
    rows = max(1, chunk // max(1, t.shape[-1]))
    for i in range(0, len(r), rows):
        tt = t if t.ndim == 1 else t[i:i + rows]
        out[i:i + rows] = response_derivatives(field, r[i:i + rows, None], tt, order=3)[3]
    return out


def resolution_length(event: ContactEvent, c0: float = SOUND_SPEED) -> float:
    """Shortest length scale of the retarded integrand, ``eps * min(1, c0 / c_s)``.

    Seen at a fixed listening time, a supersonic surface front is compressed
    in radius by about ``c0 / c_s``, so the radial step must resolve the
    acoustic wavelength as well as ``eps``.
    """
    return event.epsilon * min(1.0, c0 / event.ground_shear_speed)


def source_radius(event: ContactEvent, hs: HalfspaceParams, spec: TraceSpec, c0: float, margin: float,
                  listener=None) -> float:
    """Disc radius holding every surface point that can reach the listener inside the trace.

    A ring at radius ``r`` starts moving at ``r / c_p`` (less a few kernel
    widths of smoothing tail) and its sound then travels at least
    ``sqrt((r - rho)^2 + z^2)`` to a listener at height ``z`` and horizontal
    offset ``rho``. Without a listener the path is bounded below by ``r``.
    """
    horizon = max(spec.end - event.impact_time, 0.0) + 6.0 * event.kernel_width
    if listener is None:
        return (1.0 + margin) * horizon / (1.0 / c0 + 1.0 / hs.c_p)
    listener = np.asarray(listener, dtype=float)
    rho = float(np.hypot(listener[0] - event.impact_point[0], listener[1] - event.impact_point[1]))
    z = float(listener[2])

    def late(r):
        return r / hs.c_p + math.hypot(max(r - rho, 0.0), z) / c0 - horizon

    hi = horizon / (1.0 / c0 + 1.0 / hs.c_p) + rho
    if late(rho) >= 0:
        r_hit = rho
    else:
        r_hit = brentq(late, rho, hi)
    return max((1.0 + margin) * r_hit, 8.0 * resolution_length(event, c0))


def rayleigh_ground_pressure(
    event: ContactEvent,
    hs: HalfspaceParams,
    listener,
    spec: TraceSpec,
    rho0: float = AIR_DENSITY,
    c0: float = SOUND_SPEED,
    spacing: float = 0.1,
    r_min: float = 1e-4,
    azimuths: int = 96,
    margin: float = 0.2,
    grid: RadialGrid | None = None,
    origin_ramp: float | None = None,
) -> PressureTrace:
    """Ground pressure trace at ``listener`` by the Rayleigh integral.

    Args:
        spacing: uniform radial step as a fraction of :func:`resolution_length`.
        azimuths: azimuthal cells over a half turn, used off axis.
        origin_ramp: if given, the ``1/r`` singular part of the response is
            replaced inside this radius by a volume-preserving ramp.
    """
    listener = np.asarray(listener, dtype=float)
    if not listener[2] > 0:
        raise ValueError("listener must be above the ground plane")
    if event.impulse == 0:
        return PressureTrace(spec.rate, spec.start, np.zeros(spec.n))
    field = RegularizedField(hs, event.epsilon)
    if grid is None:
        r_max = source_radius(event, hs, spec, c0, margin, listener)
        grid = radial_grid(r_max, spacing * resolution_length(event, c0), r_min)
    r, w = grid.radii, grid.weights
    z = listener[2]
    rho = float(np.hypot(listener[0] - event.impact_point[0], listener[1] - event.impact_point[1]))
    t_out = spec.times - event.impact_time

    if rho < 1e-9:
        dist = np.sqrt(r * r + z * z)
        acc = _ring_accel(field, r, t_out[None, :] - dist[:, None] / c0)
        if origin_ramp is not None:
            acc += _ramp_correction(field, r, t_out[None, :] - dist[:, None] / c0, origin_ramp)
        contrib = acc * (w / (2 * np.pi * dist))[:, None]
    else:
        dphi = np.pi / azimuths
        phi = (np.arange(azimuths) + 0.5) * dphi
        dist = np.sqrt(r[:, None] ** 2 + rho**2 - 2 * r[:, None] * rho * np.cos(phi)[None, :] + z * z)
        fine_dt = event.kernel_width / 16.0
        t_lo = t_out[0] - dist.max() / c0 - fine_dt
        t_hi = t_out[-1] - dist.min() / c0 + fine_dt
        table_t = np.arange(t_lo, t_hi + fine_dt, fine_dt)
        contrib = np.zeros((len(r), spec.n))
        rows = max(1, 200_000 // len(table_t))
        for i in range(0, len(r), rows):
            acc = _ring_accel(field, r[i:i + rows], table_t)
            if origin_ramp is not None:
                acc += _ramp_correction(field, r[i:i + rows], table_t[None, :], origin_ramp)
            for k in range(acc.shape[0]):
                d = dist[i + k]
                retarded = t_out[None, :] - d[:, None] / c0
                vals = np.interp(retarded, table_t, acc[k])
                # two half-turn cells per azimuth by mirror symmetry
                contrib[i + k] = (vals * (2 * w[i + k] / (2 * azimuths) / (2 * np.pi * d))[:, None]).sum(axis=0)
    p = rho0 * event.impulse * contrib.sum(axis=0)
    _warn_truncation(contrib, p)
    return PressureTrace(spec.rate, spec.start, p)


def _warn_truncation(contrib: np.ndarray, total: np.ndarray):
    n = contrib.shape[0]
    outer = contrib[int(0.9 * n):].sum(axis=0)
    e_tot = float(np.sum(total**2))
    if e_tot > 0:
        frac = float(np.sum(outer**2)) / e_tot
        if frac > 1e-4:
            log.warning("outer 10%% of the source disc carries %.2e of the trace energy; "
                        "the integration domain may be too small", frac)


def singular_coefficient(field: RegularizedField, t, derivative: int = 0):
    """Time factor ``s(t)`` of the near-origin behaviour ``u_eps ~ s(t) / r``."""
    hs = field.halfspace
    t = np.asarray(t, dtype=float)
    if derivative == 0:
        d = kernel_f_cdf(t, field.epsilon, hs.c_s)
    else:
        d = kernel_f_derivative(t, field.epsilon, hs.c_s, derivative - 1)
    return hs.static_prefactor() * d


def ramp_profile(r, radius: float):
    return np.clip(1.0 - np.asarray(r) / radius, 0.0, None)


def _ramp_correction(field, r, t, radius, derivative: int = 3):
    """Change of the response when ``R(r) s(t)/r`` is swapped for ``C R(r)`` with equal volume."""
    s = singular_coefficient(field, t, derivative)
    ramp = ramp_profile(r, radius)
    # integral of R/r dA = pi H, integral of R dA = pi H^2 / 3
    shape = ramp[:, None] * (3.0 / radius - 1.0 / r[:, None])
    return shape * s


# ---------------------------------------------------------------------------
# ball radiation


def ball_dipole_pressure(
    event: ContactEvent,
    listener,
    spec: TraceSpec,
    reflective: bool = True,
    rho0: float = AIR_DENSITY,
    c0: float = SOUND_SPEED,
) -> PressureTrace:
    """Compact translating-sphere radiation, optionally with its ground image.

    Each sphere contributes ``rho0 a0^3 cos(theta) / 2 * (a/r^2 + a'/(c0 r))``
    at retarded time ``t - (r - a0)/c0``, where ``a`` is the acceleration along
    the sphere's motion axis and ``theta`` the angle from that axis. The image
    sits mirrored below the plane with its axis mirrored too.
    """
    listener = np.asarray(listener, dtype=float)
    a0 = event.radius
    centre, image = _ball_centres(event)
    sources = [(centre, 1.0)]
    if reflective:
        sources.append((image, -1.0))
    p = np.zeros(spec.n)
    t = spec.times
    for pos, axis in sources:
        d = listener - pos
        r = float(np.linalg.norm(d))
        if r < a0:
            raise ValueError("listener lies inside the ball")
        cos_t = axis * d[2] / r
        t_ret = t - (r - a0) / c0
        acc = ball_acceleration(event, t_ret)
        jerk = ball_acceleration(event, t_ret, derivative=1)
        p += rho0 * a0**3 * cos_t / 2.0 * (acc / r**2 + jerk / (c0 * r))
    return PressureTrace(spec.rate, spec.start, p)


# ---------------------------------------------------------------------------
# diagnostics


def volume_displacement(field: RegularizedField, t, r_max: float, kind: str = "u",
                        spacing: float = 0.05, r_min: float = 1e-5, origin_ramp: float | None = None,
                        grid: RadialGrid | None = None) -> np.ndarray:
    """Disc integral of ``u_eps`` (push volume), ``w_eps``, ``dw/dt`` or ``a_eps``.

    ``kind`` is one of ``"u"``, ``"w"``, ``"flux"`` (dw/dt) or ``"a"``. The disc
    must contain the P front at every requested time.
    """
    order = {"u": 0, "w": 1, "flux": 2, "a": 3}[kind]
    hs = field.halfspace
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if r_max < hs.c_p * t.max():
        raise CoverageError(f"r_max={r_max} m does not cover the P front at t={t.max()} s")
    grid = grid or radial_grid(r_max, spacing * field.epsilon, r_min)
    r, w = grid.radii, grid.weights
    vals = _ring_derivative(field, r, t, order)
    if origin_ramp is not None:
        vals = vals + _ramp_correction(field, r, t[None, :], origin_ramp, derivative=order)
    return (vals * w[:, None]).sum(axis=0)


def _ring_derivative(field, r, t, order, chunk=400_000):
    out = np.empty((len(r), len(t)))
    rows = max(1, chunk // len(t))
    for i in range(0, len(r), rows):
        out[i:i + rows] = response_derivatives(field, r[i:i + rows, None], t[None, :], order=order)[order]
    return out


def intensity_db(ground: PressureTrace, ball: PressureTrace) -> float:
    """``10 log10`` of the ratio of time-integrated squared pressures."""
    _check_aligned(ground, ball)
    eb = ball.energy()
    if eb == 0:
        raise SilentTraceError("ball trace is silent")
    return 10.0 * math.log10(ground.energy() / eb)
