"""Small 3-D FDTD acoustic solver with shader-driven Neumann boundaries.

Pressure lives at cell centres of a uniform grid. One step of the damped wave
equation ``p_tt / c0^2 = lap p + (alpha / c0) lap p_t`` is::

    (1 + sigma dt/2) p+ = 2 p - (1 - sigma dt/2) p- + s (L p + S) + b (L (p - p-) + S - S-)

with ``s = (c0 dt)^2``, ``b = alpha c0 dt``, ``L`` the 7-point Laplacian with
zero-flux faces against solids and the domain edge, ``sigma`` the sponge
damping, and ``S = rho0 a_n / dx`` the ghost-cell form of ``dp/dn = -rho0 a_n``
on every driven face. Acoustic shaders supply ``a_n``.

The ground is the plane ``z = 0`` at the bottom of the grid; impact points are
snapped to grid vertices so no face centre sits on an impact.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Protocol, Sequence

import numpy as np

from .contact import ContactEvent, ball_acceleration, hertz_event
from .materials import HalfspaceParams, derive_halfspace
from .radiation import AIR_DENSITY, SOUND_SPEED, PressureTrace
from .regularized import RegularizedField, a_eps

log = logging.getLogger(__name__)

AIR, SOLID = 0, 1


class InstabilityError(RuntimeError):
    """Raised when the pressure field blows up."""


class GridError(ValueError):
    pass


class AcousticShader(Protocol):
    """Normal acceleration (m/s^2, along ``normals``) of boundary samples at time ``t``."""

    def __call__(self, points: np.ndarray, normals: np.ndarray, t: float) -> np.ndarray: ...


def stable_timestep(spacing: float, c0: float = SOUND_SPEED, cfl: float = 0.9) -> float:
    """``cfl * dx / (c0 sqrt(3))``; ``cfl <= 1`` is stable without damping."""
    return cfl * spacing / (c0 * math.sqrt(3.0))


# ---------------------------------------------------------------------------
# boundary faces


@dataclass
class FaceSet:
    """Driven faces: owning air cell, face centre and unit normal (pointing into the air)."""

    cells: tuple[np.ndarray, np.ndarray, np.ndarray]
    points: np.ndarray
    normals: np.ndarray
    shader: AcousticShader

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class PointSource:
    """Monopole of volume velocity ``q(t)`` (m^3/s); ``rate`` returns ``dq/dt``."""

    position: tuple[float, float, float]
    rate: Callable[[float], float]


def gaussian_pulse(centre: float, width: float, amplitude: float = 1.0) -> Callable[[float], float]:
    """``dq/dt`` of a Gaussian volume velocity with standard deviation ``width``."""

    def rate(t):
        x = (t - centre) / width
        return -amplitude * x / width * math.exp(-0.5 * x * x)

    return rate


# ---------------------------------------------------------------------------
# grid


@dataclass
class WaveGrid:
    """Cell-centred pressure grid and its boundary description.

    ``origin`` is the lower corner; cell ``(i, j, k)`` has centre
    ``origin + (i + 1/2, j + 1/2, k + 1/2) dx``.
    """

    spacing: float
    dims: tuple[int, int, int]
    origin: np.ndarray
    c0: float = SOUND_SPEED
    rho0: float = AIR_DENSITY
    alpha: float = 2e-6
    cfl: float = 0.9
    sponge_cells: int = 8
    sponge_faces: tuple[str, ...] = ("-x", "+x", "-y", "+y", "+z")
    cell_type: np.ndarray | None = None
    time: float = 0.0
    faces: list[FaceSet] = field(default_factory=list)
    sources: list[PointSource] = field(default_factory=list)

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float)
        self.dims = tuple(int(n) for n in self.dims)
        if min(self.dims) < 3:
            raise GridError("grid needs at least 3 cells per axis")
        if not 0 < self.cfl <= 1.0:
            raise GridError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.cell_type is None:
            self.cell_type = np.full(self.dims, AIR, dtype=np.int8)
        self.dt = stable_timestep(self.spacing, self.c0, self.cfl)
        self.p = np.zeros(self.dims)
        self.p_prev = np.zeros(self.dims)
        self._src_prev = np.zeros(self.dims)
        self._peak = 0.0
        self._forcing_scale = 0.0
        self.steps = 0
        self.refresh()

    # geometry ------------------------------------------------------------

    def centres(self, axis: int) -> np.ndarray:
        return self.origin[axis] + (np.arange(self.dims[axis]) + 0.5) * self.spacing

    def cell_of(self, point) -> tuple[int, int, int]:
        idx = np.floor((np.asarray(point, dtype=float) - self.origin) / self.spacing).astype(int)
        if np.any(idx < 0) or np.any(idx >= np.asarray(self.dims)):
            raise GridError(f"point {tuple(point)} lies outside the grid")
        return tuple(int(i) for i in idx)

    def refresh(self):
        """Rebuild face masks and sponge after the cell types change."""
        air = self.cell_type == AIR
        self._air = air.astype(float)
        # open[axis] marks faces between two air neighbours along that axis
        self._open = []
        for axis in range(3):
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[axis] = slice(None, -1)
            hi[axis] = slice(1, None)
            self._open.append((air[tuple(lo)] & air[tuple(hi)]).astype(float))
        self._sigma = self._sponge_profile()
        s = self._sigma * self.dt / 2.0
        self._den = 1.0 / (1.0 + s)
        self._back = 1.0 - s

    def _sponge_profile(self) -> np.ndarray:
        sigma = np.zeros(self.dims)
        n = self.sponge_cells
        if n <= 0:
            return sigma
        smax = 0.5 * self.c0 / self.spacing * 3.0
        for name in self.sponge_faces:
            axis = "xyz".index(name[1])
            depth = np.arange(self.dims[axis], dtype=float)
            if name[0] == "+":
                depth = depth[::-1]
            prof = np.clip((n - depth - 0.5) / n, 0.0, None) ** 2 * smax
            shape = [1, 1, 1]
            shape[axis] = -1
            sigma = np.maximum(sigma, prof.reshape(shape))
        return sigma

    # operators -----------------------------------------------------------

    def laplacian(self, p: np.ndarray) -> np.ndarray:
        """Zero-flux Laplacian over air cells (undriven part)."""
        out = np.zeros_like(p)
        h2 = self.spacing**2
        for axis in range(3):
            flux = np.diff(p, axis=axis) * self._open[axis]
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[axis] = slice(None, -1)
            hi[axis] = slice(1, None)
            out[tuple(lo)] += flux
            out[tuple(hi)] -= flux
        return out / h2

    def boundary_source(self, t: float) -> np.ndarray:
        """``rho0 a_n / dx`` accumulated into the owning cells of every driven face."""
        src = np.zeros(self.dims)
        for fs in self.faces:
            if not len(fs):
                continue
            a_n = np.asarray(fs.shader(fs.points, fs.normals, t), dtype=float)
            if a_n.shape != (len(fs),) or not np.all(np.isfinite(a_n)):
                raise InstabilityError("shader returned non-finite or misshaped accelerations")
            if a_n.size:
                self._forcing_scale = max(self._forcing_scale, self.rho0 * float(np.abs(a_n).max()) * self.spacing)
            np.add.at(src, fs.cells, self.rho0 * a_n / self.spacing)
        for ps in self.sources:
            idx, w = self._trilinear(ps.position)
            val = self.rho0 * ps.rate(t) / self.spacing**3
            self._forcing_scale = max(self._forcing_scale, abs(val) * self.spacing**2)
            np.add.at(src, idx, w * val)
        return src

    def _trilinear(self, point):
        """Cell indices and weights interpolating cell-centred values at ``point``."""
        u = (np.asarray(point, dtype=float) - self.origin) / self.spacing - 0.5
        base = np.floor(u).astype(int)
        base = np.clip(base, 0, np.asarray(self.dims) - 2)
        f = u - base
        ii, jj, kk, ww = [], [], [], []
        for dx in (0, 1):
            for dy in (0, 1):
                for dz in (0, 1):
                    ii.append(base[0] + dx)
                    jj.append(base[1] + dy)
                    kk.append(base[2] + dz)
                    ww.append((f[0] if dx else 1 - f[0]) * (f[1] if dy else 1 - f[1]) * (f[2] if dz else 1 - f[2]))
        return (np.array(ii), np.array(jj), np.array(kk)), np.array(ww)

    def sample(self, point) -> float:
        idx, w = self._trilinear(point)
        return float(np.sum(self.p[idx] * w))

    # stepping ------------------------------------------------------------

    def step(self):
        """Advance one timestep."""
        s = (self.c0 * self.dt) ** 2
        b = self.alpha * self.c0 * self.dt
        src = self.boundary_source(self.time)
        lap = self.laplacian(self.p) + src
        visc = self.laplacian(self.p - self.p_prev) + (src - self._src_prev) if b else 0.0
        new = (2.0 * self.p - self._back * self.p_prev + s * lap + b * visc) * self._den
        new *= self._air
        self.p_prev, self.p = self.p, new
        self._src_prev = src
        self.time += self.dt
        self.steps += 1
        self._check()

    def _check(self):
        peak = float(np.abs(self.p).max())
        if not math.isfinite(peak):
            raise InstabilityError(f"non-finite pressure at step {self.steps} (t = {self.time:.6g} s)")
        ref = max(self._peak, self._forcing_scale)
        if ref > 0 and peak > 1e6 * ref:
            raise InstabilityError(
                f"pressure grew {peak / ref:.3g}x at step {self.steps} (t = {self.time:.6g} s, "
                f"max |p| = {peak:.3g} Pa, dt = {self.dt:.3g} s, dx = {self.spacing} m)")
        self._peak = max(self._peak, peak)

    def energy(self) -> float:
        """Discrete energy ``|v|^2 - s <L p, p_prev> + (b/2) <L v, v>`` with ``v = p - p_prev``.

        Without driven faces or point sources it never increases.
        """
        s = (self.c0 * self.dt) ** 2
        b = self.alpha * self.c0 * self.dt
        v = self.p - self.p_prev
        return float(np.sum(v * v) - s * np.sum(self.laplacian(self.p) * self.p_prev)
                     + 0.5 * b * np.sum(self.laplacian(v) * v))


# ---------------------------------------------------------------------------
# shaders


class GroundShader:
    """Normal ground acceleration ``sum_i J_i a_eps(r_i, t - t_i)`` for one or more impacts."""

    def __init__(self, events: Sequence[ContactEvent], hs: HalfspaceParams):
        self.events = list(events)
        self.fields = [RegularizedField(hs, ev.epsilon) for ev in self.events]
        self._cache: tuple | None = None

    def _radii(self, points):
        key = (id(points), len(points))
        if self._cache is None or self._cache[0] != key:
            per = []
            for ev in self.events:
                r = np.hypot(points[:, 0] - ev.impact_point[0], points[:, 1] - ev.impact_point[1])
                uniq, inv = np.unique(r, return_inverse=True)
                per.append((uniq, inv))
            self._cache = (key, per)
        return self._cache[1]

    def __call__(self, points, normals, t):
        out = np.zeros(len(points))
        for ev, fld, (uniq, inv) in zip(self.events, self.fields, self._radii(points)):
            vals = a_eps(fld, uniq, np.full_like(uniq, t - ev.impact_time))
            out += ev.impulse * vals[inv]
        return out * normals[:, 2]


class BallShader:
    """Rigid-body acceleration ``a(t) (n . z)`` of a ball resting at its impact point."""

    def __init__(self, event: ContactEvent):
        self.event = event

    def __call__(self, points, normals, t):
        return float(ball_acceleration(self.event, t)) * normals[:, 2]


def ground_shader(events, hs: HalfspaceParams) -> GroundShader:
    if isinstance(events, ContactEvent):
        events = [events]
    return GroundShader(events, hs)


def ball_shader(event: ContactEvent) -> BallShader:
    return BallShader(event)


# ---------------------------------------------------------------------------
# scene assembly


def ground_faces(grid: WaveGrid, shader: AcousticShader) -> FaceSet:
    """Bottom faces (``z = grid.origin[2]``) of the air cells in the lowest layer."""
    i, j = np.nonzero(grid.cell_type[:, :, 0] == AIR)
    k = np.zeros_like(i)
    x = grid.centres(0)[i]
    y = grid.centres(1)[j]
    pts = np.column_stack([x, y, np.full(len(i), grid.origin[2])])
    normals = np.tile([0.0, 0.0, 1.0], (len(i), 1))
    return FaceSet((i, j, k), pts, normals, shader)


def rasterize_ball(grid: WaveGrid, centre, radius: float, ground_gap: bool = True) -> np.ndarray:
    """Mark cells whose centres lie inside the sphere as solid; returns the new solid mask.

    A ball resting on the ground would seal its staircase footprint against
    the plane, leaving the surface open so that rigid translation pumps a net
    volume (a spurious monopole). With ``ground_gap`` the lowest cell layer is
    kept as air, which closes the surface; the true contact is a single point.
    """
    cx, cy, cz = (grid.centres(a) for a in range(3))
    inside = ((cx[:, None, None] - centre[0]) ** 2 + (cy[None, :, None] - centre[1]) ** 2
              + (cz[None, None, :] - centre[2]) ** 2) < radius**2
    if ground_gap:
        inside[:, :, 0] = False
    if not inside.any():
        raise GridError(f"ball of radius {radius} m is smaller than the grid resolution")
    grid.cell_type[inside] = SOLID
    grid.refresh()
    return inside


def solid_faces(grid: WaveGrid, mask: np.ndarray, shader: AcousticShader) -> FaceSet:
    """Faces between air cells and the solid ``mask``, normals pointing into the air."""
    air = grid.cell_type == AIR
    cells = ([], [], [])
    pts, normals = [], []
    h = grid.spacing
    for axis in range(3):
        for sgn in (-1, 1):
            # solid neighbour on the ``sgn`` side of an air cell
            nb = np.zeros_like(mask)
            src = [slice(None)] * 3
            dst = [slice(None)] * 3
            if sgn > 0:
                dst[axis], src[axis] = slice(None, -1), slice(1, None)
            else:
                dst[axis], src[axis] = slice(1, None), slice(None, -1)
            nb[tuple(dst)] = mask[tuple(src)]
            i, j, k = np.nonzero(nb & air)
            if not len(i):
                continue
            centre = np.column_stack([grid.centres(0)[i], grid.centres(1)[j], grid.centres(2)[k]])
            n = np.zeros(3)
            n[axis] = -sgn
            centre[:, axis] += sgn * h / 2
            for c, idx in zip(cells, (i, j, k)):
                c.append(idx)
            pts.append(centre)
            normals.append(np.tile(n, (len(i), 1)))
    if not pts:
        return FaceSet((np.array([], int),) * 3, np.zeros((0, 3)), np.zeros((0, 3)), shader)
    return FaceSet(tuple(np.concatenate(c) for c in cells), np.concatenate(pts), np.concatenate(normals), shader)


def snap_to_vertex(point, grid_origin, spacing) -> tuple[float, float, float]:
    o = np.asarray(grid_origin, dtype=float)
    p = np.asarray(point, dtype=float)
    snapped = o + np.round((p - o) / spacing) * spacing
    snapped[2] = p[2]
    return tuple(float(v) for v in snapped)


@dataclass
class FdtdResult:
    """Microphone traces per source set (``"combined"``, ``"ball"``, ``"ground"``)."""

    traces: dict[str, list[PressureTrace]]
    microphones: list[tuple[float, float, float]]
    spacing: float
    dt: float
    steps: int
    events: list[ContactEvent]
    snapshots: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)


def scene_grid(scenario, options=None) -> WaveGrid:
    """Empty grid for a scenario: ground at ``z = 0``, centred horizontally on the impacts."""
    opt = options or scenario.fdtd
    h = opt.spacing
    nx, ny, nz = opt.cells
    pts = np.array([imp.point for imp in scenario.impacts], dtype=float)
    centre = 0.5 * (pts.min(axis=0) + pts.max(axis=0))
    origin = np.array([centre[0] - nx * h / 2, centre[1] - ny * h / 2, 0.0])
    anchor = pts[0]
    # shift so the first impact lands exactly on a vertex
    origin[:2] = anchor[:2] - np.round((anchor[:2] - origin[:2]) / h) * h
    return WaveGrid(h, (nx, ny, nz), origin, c0=scenario.sound_speed, rho0=scenario.air_density,
                    alpha=opt.alpha, cfl=opt.cfl, sponge_cells=opt.sponge_cells)


def _build(scenario, sources: Sequence[str], options, events, hs):
    grid = scene_grid(scenario, options)
    opt = options or scenario.fdtd
    masks = []
    if opt.ball_geometry:
        for ev in events:
            centre = np.asarray(ev.impact_point) + np.array([0.0, 0.0, ev.radius])
            masks.append(rasterize_ball(grid, centre, ev.radius))
    if "ground" in sources:
        grid.faces.append(ground_faces(grid, ground_shader(events, hs)))
    if "ball" in sources:
        if not opt.ball_geometry:
            raise GridError("ball source requires ball_geometry = true")
        for ev, mask in zip(events, masks):
            grid.faces.append(solid_faces(grid, mask, ball_shader(ev)))
    return grid


def run_scene(scenario, solo: bool = False, options=None, snapshot_every: int | None = None) -> FdtdResult:
    """Simulate a scenario and record every listening point.

    Impact points are snapped to the nearest grid vertex. The run starts four
    contact times before the first impact and lasts ``fdtd.duration`` past it.
    With ``solo=True`` each source in ``fdtd.sources`` is also run on its own
    (same geometry), giving ``"ball"`` and/or ``"ground"`` traces next to
    ``"combined"``.
    """
    opt = options or scenario.fdtd
    base = scene_grid(scenario, opt)
    events = []
    for idx in range(len(scenario.impacts)):
        ev = hertz_event(scenario, idx)
        snapped = snap_to_vertex(ev.impact_point, base.origin, base.spacing)
        if snapped != tuple(ev.impact_point):
            log.info("impact %d snapped from %s to grid vertex %s", idx, ev.impact_point, snapped)
        events.append(replace(ev, impact_point=snapped))
    hs = derive_halfspace(scenario.ground)
    mics = [tuple(float(v) for v in m) for m in scenario.listening_points]
    for m in mics:
        base.cell_of(m)
    t_first = min(ev.impact_time for ev in events)
    lead = 4.0 * max(ev.contact_time for ev in events)
    t0, t1 = t_first - lead, t_first + opt.duration
    every = opt.snapshot_every if snapshot_every is None else snapshot_every

    runs = {"combined": tuple(opt.sources)}
    if solo:
        for s in opt.sources:
            runs[s] = (s,)
    traces, snaps, steps, dt = {}, {}, 0, base.dt
    for name, srcs in runs.items():
        grid = _build(scenario, srcs, opt, events, hs)
        for m in mics:
            if grid.cell_type[grid.cell_of(m)] != AIR:
                raise GridError(f"microphone {m} lies inside a solid")
        grid.time = t0
        n = int(math.ceil((t1 - t0) / grid.dt))
        rec = np.zeros((len(mics), n))
        frames, frame_t = [], []
        k_slice = grid.cell_of(mics[0])[2]
        for step in range(n):
            grid.step()
            for q, m in enumerate(mics):
                rec[q, step] = grid.sample(m)
            if every and step % every == 0:
                frames.append(grid.p[:, :, k_slice].astype(np.float32))
                frame_t.append(grid.time)
        traces[name] = [PressureTrace(1.0 / grid.dt, t0 + grid.dt, rec[q]) for q in range(len(mics))]
        if frames:
            snaps[name] = (np.asarray(frame_t), np.stack(frames))
        steps, dt = n, grid.dt
        log.info("fdtd run %s: %d steps of %.3g s on %s cells", name, n, grid.dt, grid.dims)
    return FdtdResult(traces, mics, base.spacing, dt, steps, events, snaps)


def free_space_grid(spacing: float, dims, centre=(0.0, 0.0, 0.0), c0: float = SOUND_SPEED,
                    alpha: float = 0.0, sponge_cells: int = 8, cfl: float = 0.9) -> WaveGrid:
    """Grid with sponges on all six sides and no ground."""
    dims = tuple(int(n) for n in dims)
    origin = np.asarray(centre, dtype=float) - 0.5 * spacing * np.asarray(dims)
    return WaveGrid(spacing, dims, origin, c0=c0, alpha=alpha, cfl=cfl, sponge_cells=sponge_cells,
                    sponge_faces=("-x", "+x", "-y", "+y", "-z", "+z"))
