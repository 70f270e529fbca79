"""Elastic materials and the derived halfspace constants.

The halfspace response is parametrized by the shear modulus, the shear-wave
speed, the speed ratio ``a = c_s / c_p`` and the three roots ``kappa_j**2`` of
the Rayleigh cubic

    16 (1 - a^2) x^3 - 8 (3 - 2 a^2) x^2 + 8 x - 1 = 0.

The largest real root is ``gamma**2`` where ``gamma = c_s / c_r``.
"""

from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

#: Environment variable naming an alternative material database file.
MATERIAL_DB_ENV = "GROUNDSOUND_MATERIAL_DB"

_ROOT_RESIDUAL_TOL = 1e-10


class MaterialError(ValueError):
    """Raised for physically invalid material constants."""


@dataclass(frozen=True)
class Material:
    """Isotropic linear elastic solid.

    Attributes:
        name: display label.
        youngs_modulus: Young's modulus E in Pa.
        poisson_ratio: Poisson's ratio nu, ``0 <= nu < 0.5``.
        density: mass density rho in kg/m^3.
    """

    name: str
    youngs_modulus: float
    poisson_ratio: float
    density: float

    def __post_init__(self):
        if not self.youngs_modulus > 0:
            raise MaterialError(f"{self.name}: youngs_modulus must be > 0, got {self.youngs_modulus}")
        if not self.density > 0:
            raise MaterialError(f"{self.name}: density must be > 0, got {self.density}")
        if not 0.0 <= self.poisson_ratio < 0.5:
            raise MaterialError(
                f"{self.name}: poisson_ratio must satisfy 0 <= nu < 0.5, got {self.poisson_ratio}"
            )

    @property
    def shear_modulus(self) -> float:
        return self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))

    @property
    def shear_speed(self) -> float:
        return math.sqrt(self.shear_modulus / self.density)

    def with_overrides(self, **fields) -> "Material":
        values = dict(
            name=self.name,
            youngs_modulus=self.youngs_modulus,
            poisson_ratio=self.poisson_ratio,
            density=self.density,
        )
        values.update({k: v for k, v in fields.items() if v is not None})
        return Material(**values)


@dataclass(frozen=True)
class HalfspaceParams:
    """Constants of the Lamb's-problem solution for one ground material.

    ``kappa_sq`` holds the Rayleigh roots with ``gamma**2`` first; ``coeffs``
    holds the matching ``A_j``. ``all_real`` is True when all three roots are
    real, which is the regime where the closed-form regularization is valid.
    """

    nu: float
    mu: float
    c_s: float
    c_p: float
    a: float
    kappa_sq: tuple[complex, complex, complex]
    gamma: float
    coeffs: tuple[complex, complex, complex]
    all_real: bool

    @property
    def c_r(self) -> float:
        """Rayleigh-wave speed."""
        return self.c_s / self.gamma

    @property
    def a1_real(self) -> float:
        """``A_1 / i``: the real weight of the Rayleigh-pole term."""
        return float(self.coeffs[0].imag)

    def static_prefactor(self) -> float:
        """``(1 - nu) / (2 pi mu)``; multiply by ``1/r`` for the static displacement."""
        return (1.0 - self.nu) / (2.0 * math.pi * self.mu)


def speed_ratio(nu: float) -> float:
    """``a = c_s / c_p = sqrt((1 - 2 nu) / (2 - 2 nu))``."""
    if not 0.0 <= nu < 0.5:
        raise MaterialError(f"poisson_ratio must satisfy 0 <= nu < 0.5, got {nu}")
    return math.sqrt((1.0 - 2.0 * nu) / (2.0 - 2.0 * nu))


def rayleigh_cubic(a: float) -> np.ndarray:
    """Coefficients (highest power first) of the Rayleigh cubic in ``x = kappa**2``."""
    a2 = a * a
    return np.array([16.0 * (1.0 - a2), -8.0 * (3.0 - 2.0 * a2), 8.0, -1.0])


def _discriminant(a: float) -> float:
    A, B, C, D = rayleigh_cubic(a)
    return 18 * A * B * C * D - 4 * B**3 * D + B * B * C * C - 4 * A * C**3 - 27 * A * A * D * D


@lru_cache(maxsize=None)
def real_root_limit() -> float:
    """Poisson ratio above which two Rayleigh roots turn complex (about 0.2631)."""
    return brentq(lambda nu: _discriminant(speed_ratio(nu)), 0.2, 0.3, xtol=1e-15)


def _polish(coeffs: np.ndarray, x: complex) -> complex:
    deriv = np.polyder(coeffs)
    for _ in range(4):
        fx = np.polyval(coeffs, x)
        dfx = np.polyval(deriv, x)
        if dfx == 0:
            break
        step = fx / dfx
        x = x - step
        if abs(step) <= 1e-16 * max(1.0, abs(x)):
            break
    return x


def rayleigh_roots(a: float) -> tuple[tuple[complex, complex, complex], bool]:
    """Roots of the Rayleigh cubic.

    The roots come from the companion-matrix eigenvalues followed by a few
    Newton steps. They are ordered with the largest real root first
    (``gamma**2``), then by descending real part.

    Returns:
        ``(roots, all_real)``. Real roots are returned with zero imaginary part.
    """
    if not 0.0 < a <= math.sqrt(0.5) + 1e-15:
        raise MaterialError(f"speed ratio must satisfy 0 < a <= 1/sqrt(2), got {a}")
    coeffs = rayleigh_cubic(a)
    roots = [_polish(coeffs, complex(x)) for x in np.roots(coeffs)]
    all_real = _discriminant(a) > 0.0
    if all_real:
        roots = [complex(x.real, 0.0) for x in roots]
        roots.sort(key=lambda x: x.real, reverse=True)
    else:
        real = max(roots, key=lambda x: -abs(x.imag))
        rest = [x for x in roots if x is not real]
        real = complex(real.real, 0.0)
        rest.sort(key=lambda x: (x.real, x.imag), reverse=True)
        roots = [real] + rest
    return (roots[0], roots[1], roots[2]), bool(all_real)


def root_residuals(a: float, roots) -> np.ndarray:
    """``|p(x)| / max|coeff|`` for each root."""
    coeffs = rayleigh_cubic(a)
    scale = np.max(np.abs(coeffs))
    return np.abs(np.polyval(coeffs, np.asarray(roots, dtype=complex))) / scale


def coeff_A(j: int, roots, a: float) -> complex:
    """Coefficient ``A_j`` (``j`` is 0-based) with the principal square root."""
    roots = [complex(x) for x in roots]
    kj = roots[j]
    ki, kk = (roots[i] for i in range(3) if i != j)
    denom = (kj - ki) * (kj - kk)
    if abs(kj - ki) < 1e-12 or abs(kj - kk) < 1e-12:
        raise MaterialError("repeated Rayleigh root: A_j is undefined")
    return (kj - 0.5) ** 2 * np.sqrt(complex(a * a) - kj) / denom


def halfspace_from_constants(nu: float, mu: float, c_s: float) -> HalfspaceParams:
    """Build halfspace parameters directly from ``nu``, ``mu`` and ``c_s``."""
    if not mu > 0 or not c_s > 0:
        raise MaterialError(f"mu and c_s must be positive, got mu={mu}, c_s={c_s}")
    a = speed_ratio(nu)
    roots, all_real = rayleigh_roots(a)
    coeffs = tuple(coeff_A(j, roots, a) for j in range(3))
    return HalfspaceParams(
        nu=float(nu),
        mu=float(mu),
        c_s=float(c_s),
        c_p=float(c_s / a),
        a=a,
        kappa_sq=roots,
        gamma=math.sqrt(roots[0].real),
        coeffs=coeffs,
        all_real=all_real,
    )


def derive_halfspace(material: Material) -> HalfspaceParams:
    """Halfspace parameters of a ground material."""
    return halfspace_from_constants(material.poisson_ratio, material.shear_modulus, material.shear_speed)


def _parse_material_section(key: str, section) -> Material:
    allowed = {"name", "youngs_modulus", "poisson_ratio", "density"}
    unknown = set(section.keys()) - allowed
    if unknown:
        raise MaterialError(f"material [{key}]: unknown keys {sorted(unknown)}")
    try:
        return Material(
            name=section.get("name", key),
            youngs_modulus=float(section["youngs_modulus"]),
            poisson_ratio=float(section["poisson_ratio"]),
            density=float(section["density"]),
        )
    except KeyError as exc:
        raise MaterialError(f"material [{key}]: missing key {exc.args[0]}") from None


def parse_material_db(text: str, source: str = "<materials>") -> dict[str, Material]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.read_string(text, source=source)
    return {key.lower(): _parse_material_section(key, parser[key]) for key in parser.sections()}


def load_material_db(path: str | os.PathLike | None = None) -> dict[str, Material]:
    """Load a material database, keyed by lowercase name.

    With no ``path``, the file named by ``$GROUNDSOUND_MATERIAL_DB`` is used if
    set, otherwise the bundled database.
    """
    if path is None:
        path = os.environ.get(MATERIAL_DB_ENV) or None
    if path is None:
        text = resources.files("groundsound").joinpath("data/materials.ini").read_text()
        return parse_material_db(text, "materials.ini")
    path = Path(path)
    return parse_material_db(path.read_text(), str(path))


def builtin_materials() -> list[Material]:
    """The bundled database of eight common materials, in table order."""
    text = resources.files("groundsound").joinpath("data/materials.ini").read_text()
    return list(parse_material_db(text, "materials.ini").values())
