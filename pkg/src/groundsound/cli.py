"""Command-line front end.

Every subcommand reads a scenario (default: the packaged steel-on-wood drop),
applies ``--set section.key=value`` overrides, writes its outputs into
``--out`` together with ``manifest.json``, and exits with 0 on success, 1 on
configuration errors and 2 on numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .branch import branch_safety_scan
from .contact import ContactError, ContactEvent, hertz_event
from .fdtd import GridError, InstabilityError, run_scene
from .io import CSV_FORMAT, write_csv, write_manifest, write_snapshots, write_wav
from .lamb import DomainError, pekeris_displacement, wavefront_times
from .materials import (MaterialError, derive_halfspace, halfspace_from_constants, load_material_db, rayleigh_roots,
                        real_root_limit, speed_ratio)
from .oracle import QuadratureError, convolution_oracle
from .radiation import (
    CoverageError,
    PressureTrace,
    SilentTraceError,
    TraceSpec,
    arrival_window,
    ball_dipole_pressure,
    intensity_db,
    rayleigh_ground_pressure,
)
from .regularized import RegularizedField, response_derivatives
from .scenario import ScenarioConfig, ScenarioError, load_scenario
from .sweeps import (
    DEFAULT_ANGLES,
    DEFAULT_CONTACT_TIMES,
    DEFAULT_SPEEDS,
    material_matrix,
    sweep_angle,
    sweep_cs,
    sweep_tc,
)

log = logging.getLogger("groundsound")

COMMANDS = ("response", "contact", "rayleigh", "ball", "compare", "matrix", "sweep", "fdtd", "validate",
            "branch-scan")
CLAMPED_POISSON = 0.25


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def default_scenario_path() -> Path:
    return Path(str(resources.files("groundsound") / "data" / "scenarios" / "steel_wood.ini"))


# ---------------------------------------------------------------------------
# scenario plumbing


def _overrides(pairs) -> dict[str, str]:
    out = {}
    for item in pairs or ():
        key, sep, value = item.partition("=")
        if not sep or "." not in key:
            raise ScenarioError(f"--set expects section.key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def clamp_poisson(scenario: ScenarioConfig) -> ScenarioConfig:
    """Force the ground Poisson ratio into the closed form's supported range."""
    nu = scenario.ground.poisson_ratio
    if nu < real_root_limit():
        return scenario
    log.warning("!!! ground Poisson ratio %.4f is at or above %.4f, where the closed form is unsupported; "
                "clamping it to %.2f !!!", nu, real_root_limit(), CLAMPED_POISSON)
    return replace(scenario, ground=scenario.ground.with_overrides(poisson_ratio=CLAMPED_POISSON))


def _load(args, clamp: bool = True) -> ScenarioConfig:
    path = Path(args.scenario) if args.scenario else default_scenario_path()
    try:
        sc = load_scenario(path, overrides=_overrides(args.set))
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}") from None
    return clamp_poisson(sc) if clamp else sc


def _events(sc: ScenarioConfig) -> list[ContactEvent]:
    return [hertz_event(sc, i) for i in range(len(sc.impacts))]


def scenario_window(sc: ScenarioConfig, events, listener, hs=None, before: float = 6.0,
                    after: float = 30.0) -> TraceSpec:
    """Trace window covering every impact's arrivals at ``listener`` (or the configured one)."""
    t_c = min(ev.contact_time for ev in events)
    rate = sc.internal_rate or 32.0 / t_c
    spans = [arrival_window(ev, listener, sc.sound_speed, hs) for ev in events]
    start = min(s[0] for s in spans) - before * max(ev.contact_time for ev in events)
    end = max(s[1] for s in spans) + after * max(ev.contact_time for ev in events)
    if sc.start_time is not None:
        start = sc.start_time
    if sc.duration is not None:
        end = start + sc.duration
    return TraceSpec(start, rate, int(round((end - start) * rate)) + 1)


def _ground_trace(sc, events, hs, listener, spec) -> PressureTrace:
    opt = sc.rayleigh
    total = None
    for ev in events:
        p = rayleigh_ground_pressure(ev, hs, listener, spec, sc.air_density, sc.sound_speed, spacing=opt.spacing,
                                     r_min=opt.r_min, azimuths=opt.azimuths, margin=opt.margin)
        total = p if total is None else total + p
    return total


def _ball_trace(sc, events, listener, spec) -> PressureTrace:
    total = None
    for ev in events:
        p = ball_dipole_pressure(ev, listener, spec, reflective=True, rho0=sc.air_density, c0=sc.sound_speed)
        total = p if total is None else total + p
    return total


def _manifest(args, sc: ScenarioConfig | None, extra: dict | None = None) -> dict:
    out = {"command": args.command, "version": __version__,
           "arguments": {k: v for k, v in vars(args).items() if k not in ("func", "out")}}
    if sc is not None:
        hs = derive_halfspace(sc.ground)
        out["scenario"] = sc
        out["halfspace"] = hs
        out["derived"] = {"c_r": hs.c_r, "static_prefactor": hs.static_prefactor(),
                          "real_root_limit": real_root_limit()}
        out["events"] = _events(sc)
    out.update(extra or {})
    return out


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(out: Path, stem: str, trace: PressureTrace, sc: ScenarioConfig, column: str = "p"):
    write_csv(out / f"{stem}.csv", {"t": trace.times, column: trace.samples})
    if trace.peak() > 0:
        write_wav(out / f"{stem}.wav", trace, rate=sc.sample_rate)


# ---------------------------------------------------------------------------
# commands


def cmd_response(args) -> int:
    sc = _load(args, clamp=not args.exact)
    material = sc.ground
    if args.material:
        db = load_material_db()
        if args.material.lower() not in db:
            raise ScenarioError(f"unknown material {args.material!r}; known: {sorted(db)}")
        material = db[args.material.lower()]
        if not args.exact and material.poisson_ratio >= real_root_limit():
            material = material.with_overrides(poisson_ratio=CLAMPED_POISSON)
            log.warning("!!! clamping Poisson ratio of %s to %.2f !!!", args.material, CLAMPED_POISSON)
    hs = derive_halfspace(material)
    r = args.r
    wt = wavefront_times(hs, r)
    eps = args.eps if args.eps is not None else hertz_event(sc).epsilon
    t0 = args.tmin if args.tmin is not None else (0.0 if args.exact else -10 * eps / hs.c_s)
    t1 = args.tmax if args.tmax is not None else 3.0 * wt.t_r
    t = np.linspace(t0, t1, args.samples)
    out = _outdir(args)
    if args.exact:
        write_csv(out / "response_exact.csv", {"t": t, "u_n": pekeris_displacement(hs, r, t)})
    else:
        d = response_derivatives(RegularizedField(hs, eps), r, t, order=3)
        write_csv(out / "response.csv", {"t": t, "u": d[0], "w": d[1], "a": d[3]})
    write_manifest(out / "manifest.json", _manifest(args, sc, {"response": {
        "material": material, "r": r, "epsilon": eps, "wavefronts": wt, "halfspace_used": hs}}))
    print(f"wrote {args.samples} samples at r = {r} m (t_p={wt.t_p:.6g} s, t_s={wt.t_s:.6g} s, t_r={wt.t_r:.6g} s)")
    return 0


def cmd_contact(args) -> int:
    sc = _load(args)
    events = _events(sc)
    out = _outdir(args)
    cols = {k: [] for k in ("impact", "mass", "normal_velocity", "contact_time", "epsilon", "impulse",
                            "contact_radius", "effective_stiffness", "ground_shear_speed")}
    print(f"{'#':>3} {'m (kg)':>12} {'v_n (m/s)':>12} {'t_c (s)':>12} {'eps (m)':>12} {'J (N s)':>12} "
          f"{'r_c (m)':>12} {'E* (Pa)':>12} {'c_s (m/s)':>10}")
    for i, ev in enumerate(events):
        vals = (ev.mass, ev.normal_velocity, ev.contact_time, ev.epsilon, ev.impulse, ev.contact_radius,
                ev.effective_stiffness, ev.ground_shear_speed)
        print(f"{i:>3} " + " ".join(f"{v:>12.5g}" for v in vals[:-1]) + f" {vals[-1]:>10.2f}")
        cols["impact"].append(i)
        for k, v in zip(list(cols)[1:], vals):
            cols[k].append(v)
    write_csv(out / "contact.csv", cols)
    write_manifest(out / "manifest.json", _manifest(args, sc))
    return 0


def _traces_for(args, which: str) -> int:
    sc = _load(args)
    events = _events(sc)
    hs = derive_halfspace(sc.ground)
    out = _outdir(args)
    results = []
    for k, listener in enumerate(sc.listening_points):
        spec = scenario_window(sc, events, listener, hs)
        row = {"listener": listener}
        g = _ground_trace(sc, events, hs, listener, spec) if which in ("rayleigh", "compare") else None
        b = _ball_trace(sc, events, listener, spec) if which in ("ball", "compare") else None
        if g is not None:
            _emit(out, f"ground_{k}", g, sc)
            row["ground_peak_pa"] = g.peak()
            row["ground_energy"] = g.energy()
        if b is not None:
            _emit(out, f"ball_{k}", b, sc)
            row["ball_peak_pa"] = b.peak()
            row["ball_energy"] = b.energy()
        if which == "compare":
            db = intensity_db(g, b)
            row["ground_to_ball_db"] = db
            write_csv(out / f"compare_{k}.csv", {"t": g.times, "ground": g.samples, "ball": b.samples})
            print(f"listener {k} {tuple(listener)}: ground {10 * math.log10(g.energy()):.2f} dB, "
                  f"ball {10 * math.log10(b.energy()):.2f} dB, ground/ball {db:+.2f} dB")
        else:
            tr = g if g is not None else b
            print(f"listener {k} {tuple(listener)}: peak {tr.peak():.4g} Pa")
        results.append(row)
    write_manifest(out / "manifest.json", _manifest(args, sc, {"results": results}))
    return 0


def cmd_matrix(args) -> int:
    sc = _load(args, clamp=False)
    m = material_matrix(sc, direct=args.direct, workers=args.threads)
    out = _outdir(args)
    with open(out / "matrix.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ball"] + m.grounds + [f"class_{g}" for g in m.grounds])
        for i, b in enumerate(m.balls):
            w.writerow([b] + [CSV_FORMAT % v for v in m.db[i]] + [m.classification(i, j) for j in range(len(m.grounds))])
    width = max(len(g) for g in m.grounds) + 1
    print("ball \\ ground".ljust(10) + "".join(g.rjust(width) for g in m.grounds))
    for i, b in enumerate(m.balls):
        marks = {"teal": "*", "orange": "+", "none": " "}
        print(b.ljust(10) + "".join(f"{m.db[i, j]:{width - 1}.2f}{marks[m.classification(i, j)]}"
                                     for j in range(len(m.grounds))))
    print("* ground louder than ball (>= 0 dB); + audible (>= -13 dB)")
    write_manifest(out / "manifest.json", _manifest(args, sc, {"matrix": {
        "balls": m.balls, "grounds": m.grounds, "db": m.db, "contact_time": 1.633e-4, "poisson_ratio": 0.25}}))
    return 0


def _values(text, default):
    if not text:
        return list(default)
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise ScenarioError(f"--values: cannot parse {text!r}") from None


def cmd_sweep(args) -> int:
    sc = _load(args)
    if args.axis == "angle":
        res = sweep_angle(sc, _values(args.values, DEFAULT_ANGLES), workers=args.threads)
    elif args.axis == "cs":
        res = sweep_cs(sc, _values(args.values, DEFAULT_SPEEDS), workers=args.threads)
    else:
        res = sweep_tc(sc, _values(args.values, DEFAULT_CONTACT_TIMES), workers=args.threads)
    out = _outdir(args)
    write_csv(out / f"sweep_{args.axis}.csv", res.columns())
    for k, v in res.fits.items():
        print(f"{k} = {v:.6g}")
    write_manifest(out / "manifest.json", _manifest(args, sc, {"sweep": {"axis": res.axis, "fits": res.fits}}))
    return 0


def cmd_fdtd(args) -> int:
    sc = _load(args)
    res = run_scene(sc, solo=args.solo)
    out = _outdir(args)
    summary = {}
    for name, traces in res.traces.items():
        for k, tr in enumerate(traces):
            _emit(out, f"fdtd_{name}_{k}", tr, sc)
            summary[f"{name}_{k}_peak_pa"] = tr.peak()
            print(f"{name} mic {k} {res.microphones[k]}: peak {tr.peak():.4g} Pa")
    for name, (times, frames) in res.snapshots.items():
        write_snapshots(out / f"snapshots_{name}", times, frames, {"spacing": res.spacing, "plane": "z"})
    write_manifest(out / "manifest.json", _manifest(args, sc, {"fdtd": {
        "dt": res.dt, "steps": res.steps, "spacing": res.spacing, "snapped_events": res.events,
        "summary": summary}}))
    return 0


def cmd_validate(args) -> int:
    sc = _load(args)
    checks = []

    roots, _ = rayleigh_roots(math.sqrt(1.0 / 3.0))
    exact = sorted([(3 + math.sqrt(3)) / 4, 0.25, (3 - math.sqrt(3)) / 4], reverse=True)
    got = sorted((z.real for z in roots), reverse=True)
    checks.append(("Rayleigh roots at nu = 0.25", max(abs(a - b) / b for a, b in zip(got, exact)) < 1e-9))

    hs = derive_halfspace(sc.ground)
    ev = hertz_event(sc)
    fld = RegularizedField(hs, ev.epsilon)
    worst = 0.0
    scale = hs.static_prefactor()
    for r in (0.05, 0.3, 1.0):
        for tau in (0.3, 1.0, 1.5):
            t = tau * r / hs.c_s
            u = float(response_derivatives(fld, r, t, 0)[0])
            worst = max(worst, abs(u - convolution_oracle(hs, ev.epsilon, r, t)) * r / scale)
    checks.append(("closed form against convolution quadrature", worst < 1e-6))

    r, t, h = 0.4, 1.2 * 0.4 / hs.c_s, 2e-7
    d = response_derivatives(fld, r, np.array([t - h, t, t + h]), 1)
    fd = (d[0][2] - d[0][0]) / (2 * h)
    checks.append(("time derivative against central difference", abs(fd - d[1][1]) < 1e-5 * abs(d[1][1])))

    rep = branch_safety_scan(hs, [ev.epsilon, 2 * ev.epsilon], np.geomspace(1e-3, 5, 40),
                             np.linspace(-2, 8, 200) * ev.epsilon)
    checks.append(("branch-cut quadrant conditions", rep.ok))

    ok = all(c[1] for c in checks)
    for name, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
    out = _outdir(args)
    write_manifest(out / "manifest.json", _manifest(args, sc, {"checks": dict(checks)}))
    return 0 if ok else 2


def cmd_branch_scan(args) -> int:
    sc = _load(args)
    out = _outdir(args)
    nus = _values(args.nu, (0.05, 0.15, 0.25))
    ev = hertz_event(sc)
    n_r = max(10, int(round(math.sqrt(args.points / 10.0))))
    radii = np.geomspace(1e-4, 10.0, n_r)
    tps = np.linspace(-20.0, 40.0, n_r) * ev.epsilon
    reports = []
    bad = False
    for nu in nus:
        hs = halfspace_from_constants(nu, sc.ground.shear_modulus, sc.ground.shear_speed)
        rep = branch_safety_scan(hs, [ev.epsilon, 2 * ev.epsilon], radii, tps)
        reports.append(rep)
        if not rep.supported:
            print(f"nu = {nu}: unsupported regime (complex Rayleigh roots or nu >= {real_root_limit():.4f})")
            continue
        print(f"nu = {nu}: {rep.points_checked} points, {rep.total_violations} violations")
        for ex in rep.examples:
            print(f"  {ex[0]}: t'={ex[1]:.6g} s={ex[2]:.6g} alpha={ex[3]:.6g} eps={ex[4]:.6g}")
        bad |= rep.total_violations > 0
    write_manifest(out / "branch_scan.json", {"reports": reports, "speed_ratio": [speed_ratio(n) for n in nus]})
    return 2 if bad else 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--scenario", help="scenario file (default: packaged steel-on-wood drop)")
    common.add_argument("--out", default="out", help="output directory (default: %(default)s)")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override a scenario value; repeatable")
    common.add_argument("--threads", type=int, default=1, help="worker processes for sweeps and the matrix")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = _Parser(prog="groundsound", description="Ground impact sound synthesis.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("response", parents=[common], help="halfspace surface response at one radius")
    p.add_argument("--r", type=float, default=1.0, help="radius in m (default: %(default)s)")
    p.add_argument("--eps", type=float, help="smoothing length in m (default: from the scenario's contact)")
    p.add_argument("--material", help="ground material key (default: scenario ground)")
    p.add_argument("--tmin", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--exact", action="store_true", help="unregularized step response (t, u_n)")
    p.set_defaults(func=cmd_response)

    p = sub.add_parser("contact", parents=[common], help="derived contact parameters per impact")
    p.set_defaults(func=cmd_contact)
    for name, text in (("rayleigh", "ground pressure by the Rayleigh integral"),
                       ("ball", "ball acceleration noise"),
                       ("compare", "ground against ball intensity")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.set_defaults(func=lambda a, _n=name: _traces_for(a, _n))

    p = sub.add_parser("matrix", parents=[common], help="ball x ground intensity table")
    p.add_argument("--direct", action="store_true", help="solve every pair instead of scaling rows")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("sweep", parents=[common], help="one-parameter intensity sweep")
    p.add_argument("axis", choices=("angle", "cs", "tc"))
    p.add_argument("--values", help="comma separated sample values (degrees, m/s or s)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fdtd", parents=[common], help="run the wave solver on the scenario")
    p.add_argument("--solo", action="store_true", help="also run each source on its own")
    p.set_defaults(func=cmd_fdtd)

    p = sub.add_parser("validate", parents=[common], help="quick numerical self-checks")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("branch-scan", parents=[common], help="branch-cut quadrant scan")
    p.add_argument("--nu", help="comma separated Poisson ratios (default: 0.05, 0.15, 0.25)")
    p.add_argument("--points", type=int, default=1_000_000, help="approximate points per ratio")
    p.set_defaults(func=cmd_branch_scan)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("groundsound: --threads must be >= 1", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (QuadratureError, InstabilityError, DomainError, CoverageError, SilentTraceError,
            FloatingPointError) as exc:
        print(f"groundsound: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ScenarioError, MaterialError, ContactError, GridError, UsageError, OSError, ValueError) as exc:
        # numerical ValueError subclasses are caught above; what is left is bad input
        print(f"groundsound: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
