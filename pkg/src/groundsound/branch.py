"""Quadrant checks guarding the closed form against principal branch-cut crossings.

This is a test instrument. For real Rayleigh roots every complex argument
handed to ``sqrt`` or ``log`` stays off the negative real axis:

* the radicand of ``Z`` is only real at ``t' = 0``, where it is positive;
* ``eps - i (t' - s)`` has positive real part;
* the second log argument of ``V`` has negative imaginary part;
* the second log argument of ``W`` avoids the second quadrant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .materials import HalfspaceParams, real_root_limit


@dataclass
class BranchReport:
    nu: float
    supported: bool
    points_checked: int = 0
    violations: dict[str, int] = field(default_factory=dict)
    examples: list[tuple[str, float, float, float, float]] = field(default_factory=list)

    @property
    def total_violations(self) -> int:
        return sum(self.violations.values())

    @property
    def ok(self) -> bool:
        return self.supported and self.total_violations == 0


def _record(report, name, bad, tp, s, alpha, eps):
    n = int(np.count_nonzero(bad))
    report.violations[name] = report.violations.get(name, 0) + n
    if n and len(report.examples) < 20:
        idx = np.flatnonzero(bad.ravel())[0]
        pick = lambda v: float(np.broadcast_to(v, bad.shape).ravel()[idx])
        report.examples.append((name, pick(tp), pick(s), pick(alpha), pick(eps)))


def scan_points(report: BranchReport, tp, s, alpha, eps, kind: str) -> None:
    """Check one batch of ``(t', s, alpha)`` points; ``kind`` is ``"V"`` or ``"W"``."""
    tp, s, alpha = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (tp, s, alpha)))
    radicand = alpha**2 + (eps - 1j * tp) ** 2
    _record(report, "Z radicand", (radicand.imag == 0) & (radicand.real <= 0), tp, s, alpha, eps)
    first = eps - 1j * (tp - s)
    _record(report, "first log", ~(first.real > 0), tp, s, alpha, eps)
    z = np.sqrt(radicand)
    if kind == "V":
        second = alpha**2 - (tp + 1j * eps) * s - 1j * z * np.sqrt(np.maximum(s * s - alpha * alpha, 0.0))
        _record(report, "V second log", ~(second.imag < 0), tp, s, alpha, eps)
    else:
        second = alpha**2 - (tp + 1j * eps) * s + z * np.sqrt(np.maximum(alpha * alpha - s * s, 0.0))
        _record(report, "W second log", (second.real < 0) & (second.imag >= 0), tp, s, alpha, eps)
    report.points_checked += tp.size


def branch_safety_scan(hs: HalfspaceParams, eps_values, r_values, tp_values) -> BranchReport:
    """Scan every ``(t', s, alpha)`` combination the closed form uses.

    The grid is the outer product of radii and ``t'`` values, for each smoothing
    length in ``eps_values`` (pass both ``eps`` and ``2 eps``). Returns a report
    marked unsupported, without scanning, when the Rayleigh roots are complex.
    """
    report = BranchReport(nu=hs.nu, supported=hs.all_real and hs.nu < real_root_limit())
    if not report.supported:
        return report
    r = np.asarray(r_values, dtype=float)[:, None]
    tp = np.asarray(tp_values, dtype=float)[None, :]
    a, g = hs.a, hs.gamma
    kappas = [np.sqrt(hs.kappa_sq[j].real) for j in (1, 2)]
    for eps in np.atleast_1d(eps_values):
        for s_fac in (g, 1.0, a):
            scan_points(report, tp, s_fac * r, g * r, float(eps), "W")
        for k in kappas:
            for s_fac in (1.0, a):
                scan_points(report, tp, s_fac * r, k * r, float(eps), "V")
    return report
