"""Sweeps over photon angles and energies, peak tracking and angular widths.

Signed polar angles describe a slice through the detector sphere in a fixed
azimuthal plane: ``theta >= 0`` means ``(theta, phi)`` and ``theta < 0`` means
``(|theta|, phi + pi)``. With the default ``phi = 0`` the slice is the x-z plane
and passes through both beams of :func:`superposition_geometry`.

Grid points that are kinematically closed hold ``nan`` (missing), never zero.
Every point is evaluated independently (the quadrature kernel parallelizes
over nodes inside a point), so grids do not depend on evaluation order or on
the worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .cross_section import DEFAULT_QUAD, UNIT, QuadratureSpec, adcs_parts
from .kinematics import (
    CONSTANTS,
    ElectronState,
    KinematicallyForbidden,
    PhotonSpec,
    PhysicalConstants,
    SuperpositionConfig,
)

TIE_RTOL = 1e-9


class WidthUndefined(ValueError):
    """The slice has no half-maximum crossing on one side of its maximum."""


class Axis(NamedTuple):
    name: str
    values: np.ndarray
    unit: str


@dataclass
class EmissionGrid:
    axis_1: Axis
    axis_2: Axis
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        shape = (len(self.axis_1.values), len(self.axis_2.values))
        if self.values.shape != shape:
            raise ValueError(f"values shape {self.values.shape} does not match axes {shape}")

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmissionGrid):
            return NotImplemented
        return (
            _axis_eq(self.axis_1, other.axis_1)
            and _axis_eq(self.axis_2, other.axis_2)
            and np.array_equal(self.values, other.values, equal_nan=True)
            and self.metadata == other.metadata
        )


def _axis_eq(a: Axis, b: Axis) -> bool:
    return a.name == b.name and a.unit == b.unit and np.array_equal(a.values, b.values)


@dataclass
class PeakCurve:
    omegas: np.ndarray
    coherent: np.ndarray
    incoherent: np.ndarray

    @property
    def separation(self) -> np.ndarray:
        return np.abs(self.coherent - self.incoherent)


def signed_to_spherical(theta_signed: float, phi: float = 0.0) -> tuple[float, float]:
    if theta_signed >= 0.0:
        return theta_signed, phi
    return -theta_signed, phi + math.pi


def _monotone(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} grid must be a non-empty 1-D sequence")
    d = np.diff(arr)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise ValueError(f"{name} grid must be strictly monotone")
    return arr


def _source_electrons(cfg, mode):
    if isinstance(cfg, ElectronState):
        if mode != "single":
            raise ValueError("an ElectronState only supports mode='single'")
        return cfg
    return cfg.electron_1 if mode == "single" else cfg


def _evaluate(cfg, photons, modes, quad, const, scale):
    """Fill one array per mode; ``photons`` is a 2-D nested list of PhotonSpec."""
    n1, n2 = len(photons), len(photons[0])
    out = {m: np.full((n1, n2), np.nan) for m in modes}
    stats = {"near_singular": 0, "unconverged": 0, "forbidden": 0, "max_error": 0.0}
    need_pair = any(m != "single" for m in modes)
    source = cfg if need_pair else _source_electrons(cfg, "single")
    xi = getattr(cfg, "xi", 0.0)
    for i in range(n1):
        for j in range(n2):
            ph = photons[i][j]
            try:
                parts = adcs_parts(source, ph, quad, const)
            except KinematicallyForbidden:
                stats["forbidden"] += 1
                continue
            stats["near_singular"] += parts.near_singular
            stats["unconverged"] += int(not parts.converged)
            stats["max_error"] = max(stats["max_error"], parts.error)
            for m in modes:
                out[m][i, j] = parts.value(m, xi) * scale[i]
    return out, stats


def _check_modes(cfg, modes):
    modes = tuple(modes)
    for m in modes:
        if m not in ("coherent", "incoherent", "single"):
            raise ValueError(f"unknown mode {m!r}")
        if m != "single" and isinstance(cfg, ElectronState):
            raise ValueError("coherent/incoherent maps need a SuperpositionConfig")
    return modes


def _source_meta(cfg) -> dict:
    def el(e: ElectronState):
        return {"kinetic_energy_kev": e.kinetic_energy, "direction": [float(x) for x in e.direction]}

    if isinstance(cfg, ElectronState):
        return {"electron": el(cfg)}
    return {"electron_1": el(cfg.electron_1), "electron_2": el(cfg.electron_2), "xi": cfg.xi}


def adcs_maps(
    cfg: SuperpositionConfig | ElectronState,
    omega: float,
    thetas: Sequence[float],
    phis: Sequence[float],
    modes: Sequence[str] = ("coherent", "incoherent"),
    quad: QuadratureSpec = DEFAULT_QUAD,
    const: PhysicalConstants = CONSTANTS,
) -> dict[str, EmissionGrid]:
    """ADCS over a (theta_k, phi_k) grid, one grid per requested mode."""
    modes = _check_modes(cfg, modes)
    thetas = _monotone(thetas, "theta")
    phis = _monotone(phis, "phi")
    photons = [[PhotonSpec(omega, float(t), float(p)) for p in phis] for t in thetas]
    vals, stats = _evaluate(cfg, photons, modes, quad, const, np.ones(len(thetas)))
    return {
        m: EmissionGrid(
            Axis("theta_k", thetas.copy(), "rad"),
            Axis("phi_k", phis.copy(), "rad"),
            vals[m],
            _meta("adcs", cfg, m, quad, const, UNIT, stats, omega_kev=omega),
        )
        for m in modes
    }


def adcs_map(cfg, omega, thetas, phis, mode="coherent", quad=DEFAULT_QUAD, const=CONSTANTS):
    return adcs_maps(cfg, omega, thetas, phis, (mode,), quad, const)[mode]


def adp_maps(
    cfg: SuperpositionConfig | ElectronState,
    omegas: Sequence[float],
    thetas_signed: Sequence[float],
    phi_k: float = 0.0,
    modes: Sequence[str] = ("coherent", "incoherent"),
    quad: QuadratureSpec = DEFAULT_QUAD,
    const: PhysicalConstants = CONSTANTS,
) -> dict[str, EmissionGrid]:
    """ADP ``omega * dsigma/dk`` over (omega, signed theta_k) at fixed azimuth."""
    modes = _check_modes(cfg, modes)
    omegas = _monotone(omegas, "omega")
    thetas_signed = _monotone(thetas_signed, "theta")
    if np.any(omegas <= 0):
        raise ValueError("photon energies must be positive")
    photons = [
        [PhotonSpec(float(w), *signed_to_spherical(float(t), phi_k)) for t in thetas_signed]
        for w in omegas
    ]
    vals, stats = _evaluate(cfg, photons, modes, quad, const, omegas)
    return {
        m: EmissionGrid(
            Axis("omega", omegas.copy(), "keV"),
            Axis("theta_k_signed", thetas_signed.copy(), "rad"),
            vals[m],
            _meta("adp", cfg, m, quad, const, "keV^-2 sr^-1", stats, phi_k=phi_k),
        )
        for m in modes
    }


def adp_map(cfg, omegas, thetas_signed, phi_k=0.0, mode="coherent", quad=DEFAULT_QUAD, const=CONSTANTS):
    return adp_maps(cfg, omegas, thetas_signed, phi_k, (mode,), quad, const)[mode]


def _meta(kind, cfg, mode, quad, const, unit, stats, **extra) -> dict:
    meta = {
        "kind": kind,
        "mode": mode,
        "unit": unit,
        "source": _source_meta(cfg),
        "quadrature": quad.as_dict(),
        "constants": const.as_dict(),
        "near_singular": stats["near_singular"],
        "unconverged_points": stats["unconverged"],
        "forbidden_points": stats["forbidden"],
        "max_error_estimate": stats["max_error"],
    }
    meta.update(extra)
    return meta


def peak_position(x, y) -> float:
    """Location of the maximum of ``y(x)``, refined by a 3-point parabola.

    Values within ``TIE_RTOL`` of the maximum count as ties and the smallest
    ``x`` wins. Returns ``nan`` when every value is missing.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = ~np.isnan(y)
    if not ok.any():
        return math.nan
    top = np.max(y[ok])
    order = np.argsort(x)
    xs, ys = x[order], y[order]
    cand = np.flatnonzero(~np.isnan(ys) & (ys >= top - TIE_RTOL * abs(top)))
    i = int(cand[0])
    if i == 0 or i == len(xs) - 1 or np.isnan(ys[i - 1]) or np.isnan(ys[i + 1]):
        return float(xs[i])
    return _parabola_vertex(xs[i - 1 : i + 2], ys[i - 1 : i + 2])


def _parabola_vertex(x, y) -> float:
    x0, x1, x2 = x
    y0, y1, y2 = y
    d0 = (y1 - y0) / (x1 - x0)
    d1 = (y2 - y1) / (x2 - x1)
    curv = (d1 - d0) / (x2 - x0)
    if curv >= 0.0:
        return float(x1)
    # derivative of the Newton form: d0 + curv * (2x - x0 - x1) = 0
    v = 0.5 * (x0 + x1) - 0.5 * d0 / curv
    return float(min(max(v, x0), x2))


def peak_angles(grid: EmissionGrid) -> np.ndarray:
    """Peak of every axis-1 row over axis 2 (nan for all-missing rows)."""
    return np.array([peak_position(grid.axis_2.values, row) for row in grid.values])


def peak_curve(coherent: EmissionGrid, incoherent: EmissionGrid) -> PeakCurve:
    if not (_axis_eq(coherent.axis_1, incoherent.axis_1) and _axis_eq(coherent.axis_2, incoherent.axis_2)):
        raise ValueError("coherent and incoherent grids must share axes")
    return PeakCurve(
        coherent.axis_1.values.copy(), peak_angles(coherent), peak_angles(incoherent)
    )


def angular_fwhm(angles, values) -> float:
    """Full width at half maximum about the global maximum, linearly interpolated.

    Raises:
        WidthUndefined: no half-maximum crossing on one side, or a flat slice.
    """
    x = np.asarray(angles, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 3:
        raise ValueError("angles and values must be equal-length 1-D arrays (>= 3 points)")
    order = np.argsort(x)
    x, y = x[order], y[order]
    if np.isnan(y).any():
        raise WidthUndefined("slice contains missing values")
    i = int(np.argmax(y))
    half = 0.5 * y[i]
    if not y[i] > 0.0:
        raise WidthUndefined("slice has no positive maximum")

    j = i
    while j > 0 and y[j] > half:
        j -= 1
    if y[j] > half or j == i:
        raise WidthUndefined("no half-maximum crossing below the peak")
    left = x[j] + (half - y[j]) * (x[j + 1] - x[j]) / (y[j + 1] - y[j])

    j = i
    while j < len(y) - 1 and y[j] > half:
        j += 1
    if y[j] > half or j == i:
        raise WidthUndefined("no half-maximum crossing above the peak")
    right = x[j - 1] + (half - y[j - 1]) * (x[j] - x[j - 1]) / (y[j] - y[j - 1])
    return float(right - left)
