"""Photon-energy and photon-angle differential cross section dsigma/(domega dOmega_k).

    dsigma/dk = omega |r| / (8 |p| (2 pi)^5) * Int dOmega_r (1/2) sum |iM|^2

(``beta_r E_r = |r|`` and ``beta_p E_p = |p|``). Units: keV^-3 sr^-1, i.e. an
area in keV^-2 per keV of photon energy per steradian.

Quadrature over the final-electron direction
--------------------------------------------
``|iM|^2`` carries ``1/|q|^4`` and ``|q|`` gets as small as ``||p - k| - |r||``,
which is a few keV against momenta of hundreds of keV. A fixed lab-frame grid
cannot resolve that spike, so each branch gets its own polar frame about
``p - k``. In that frame ``|q|^2 = A - B cos(theta')`` and the polar variable is
``t = ln |q|^2``, sampled with Gauss-Legendre (``n_theta`` nodes); the azimuth
uses the periodic trapezoid rule (``n_phi`` nodes). The frame's reference
azimuth follows the photon direction, so results are rotation covariant.

For a superposition, ``|M1 + e^{i xi} M2|^2 / 2`` splits into the two
single-branch squares (each integrated in its own frame, so incoherent mode is
exactly the mean of two single-electron results) and the cross term
``Re(e^{i xi} C)`` with ``C = Int conj(M1) M2``. ``C`` has spikes at both branch
minima; it is integrated over both frames with smooth partition-of-unity
weights ``w_b = q_b^-4 / (q_1^-4 + q_2^-4)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .amplitude import MODES, Q_MIN_SQ, amplitude_table
from .kinematics import (
    CONSTANTS,
    ElectronState,
    PhotonSpec,
    PhysicalConstants,
    SuperpositionConfig,
    final_electron_energy,
    final_momentum_magnitude,
)

UNIT = "keV^-3 sr^-1"
BARN_UNIT = "barn keV^-1 sr^-1"


class ConvergenceFailure(RuntimeError):
    """Raised only on request (``strict=True``); otherwise the result is flagged."""


@dataclass(frozen=True)
class QuadratureSpec:
    n_theta: int = 64
    n_phi: int = 128
    refine_tol: float = 1e-5
    max_doublings: int = 4
    q_min_sq: float = Q_MIN_SQ

    def __post_init__(self):
        if self.n_theta < 8:
            raise ValueError(f"n_theta must be >= 8, got {self.n_theta}")
        if self.n_phi < 16:
            raise ValueError(f"n_phi must be >= 16, got {self.n_phi}")
        if not self.refine_tol > 0:
            raise ValueError(f"refine_tol must be positive, got {self.refine_tol}")
        if self.max_doublings < 0:
            raise ValueError("max_doublings must be >= 0")

    def doubled(self, times: int = 1) -> "QuadratureSpec":
        f = 2**times
        return replace(self, n_theta=self.n_theta * f, n_phi=self.n_phi * f)

    def as_dict(self) -> dict:
        return {
            "n_theta": self.n_theta,
            "n_phi": self.n_phi,
            "refine_tol": self.refine_tol,
            "max_doublings": self.max_doublings,
            "q_min_sq": self.q_min_sq,
        }


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class DifferentialCrossSection:
    value: float
    mode: str
    error: float
    converged: bool = True
    near_singular: int = 0
    n_theta: int = 0
    n_phi: int = 0
    unit: str = UNIT

    def in_barn(self, const: PhysicalConstants = CONSTANTS) -> "DifferentialCrossSection":
        if self.unit == BARN_UNIT:
            return self
        return replace(self, value=self.value * const.kev2_to_barn, unit=BARN_UNIT)


@dataclass
class AdcsParts:
    """Everything needed to form any mode and any relative phase at one photon point.

    ``diag[b]`` is the single-electron ADCS of branch ``b``; ``cross`` is the
    complex interference integral (already including the prefactor).
    """

    diag: np.ndarray
    cross: complex = 0.0j
    error: float = 0.0
    converged: bool = True
    near_singular: int = 0
    n_theta: int = 0
    n_phi: int = 0
    history: list = field(default_factory=list)

    def value(self, mode: str, xi: float = 0.0) -> float:
        if mode == "single":
            return float(self.diag[0])
        incoh = 0.5 * float(self.diag[0] + self.diag[1])
        if mode == "incoherent":
            return incoh
        if mode == "coherent":
            coh = incoh + float((np.exp(1j * xi) * self.cross).real)
            # destructive interference may undershoot zero at roundoff level
            return max(coh, 0.0)
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")

    def result(self, mode: str, xi: float = 0.0) -> DifferentialCrossSection:
        return DifferentialCrossSection(
            value=self.value(mode, xi),
            mode=mode,
            error=self.error,
            converged=self.converged,
            near_singular=self.near_singular,
            n_theta=self.n_theta,
            n_phi=self.n_phi,
        )


def _gauss_legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


def _frame(axis: np.ndarray, ref: np.ndarray):
    """Orthonormal (e1, e2, n) with e1 the part of ``ref`` orthogonal to ``axis``."""
    perp = ref - np.dot(ref, axis) * axis
    s = np.linalg.norm(perp)
    if s < 1e-12:
        perp = np.cross([0.0, 1.0, 0.0], axis)
        if np.linalg.norm(perp) < 1e-8:
            perp = np.cross([1.0, 0.0, 0.0], axis)
        s = np.linalg.norm(perp)
    e1 = perp / s
    return e1, np.cross(axis, e1)


def branch_nodes(p3, k3, r_mag: float, n_theta: int, n_phi: int):
    """Final-electron directions and solid-angle weights focused on branch ``p``.

    Returns ``(r_dirs, weights)`` with shapes ``(n_theta*n_phi, 3)`` and
    ``(n_theta*n_phi,)``; ``weights.sum() == 4 pi`` up to quadrature error.
    """
    d = np.asarray(p3, dtype=float) - np.asarray(k3, dtype=float)
    D = float(np.linalg.norm(d))
    axis = d / D
    e1, e2 = _frame(axis, np.asarray(k3, dtype=float) / max(np.linalg.norm(k3), 1e-300))
    two_dr = 2.0 * D * r_mag
    q2_lo = (D - r_mag) ** 2
    q2_hi = (D + r_mag) ** 2
    t_lo, t_hi = math.log(q2_lo), math.log(q2_hi)
    x, w = _gauss_legendre(n_theta)
    half = 0.5 * (t_hi - t_lo)
    t = t_lo + half * (x + 1.0)
    q2 = np.exp(t)
    one_minus_u = (q2 - q2_lo) / two_dr
    one_plus_u = (q2_hi - q2) / two_dr
    u = 1.0 - one_minus_u
    sin_t = np.sqrt(np.clip(one_minus_u * one_plus_u, 0.0, None))
    w_t = w * half * q2 / two_dr

    phi = 2.0 * math.pi * (np.arange(n_phi) + 0.5) / n_phi
    w_phi = 2.0 * math.pi / n_phi
    cp, sp = np.cos(phi), np.sin(phi)

    st = sin_t[:, None]
    dirs = (
        (st * cp[None, :])[..., None] * e1
        + (st * sp[None, :])[..., None] * e2
        + np.broadcast_to(u[:, None, None], (n_theta, n_phi, 1)) * axis
    )
    weights = np.broadcast_to((w_t * w_phi)[:, None], (n_theta, n_phi))
    return dirs.reshape(-1, 3), weights.reshape(-1).copy()


def _prefactor(omega: float, r_mag: float, p_mag: float) -> float:
    return omega * r_mag / (8.0 * p_mag * (2.0 * math.pi) ** 5)


def _parts_once(ps, k_dir, omega, const, n_theta, n_phi, q_min_sq):
    nb = ps.shape[0]
    m = const.m_e
    E_r = final_electron_energy(ps[0, 0], omega, m)
    r_mag = final_momentum_magnitude(E_r, m)
    p_mag = float(np.linalg.norm(ps[0, 1:]))
    k3 = omega * np.asarray(k_dir, dtype=float)
    pref = _prefactor(omega, r_mag, p_mag)

    diag = np.zeros(nb)
    cross = 0.0j
    flagged = 0
    for b in range(nb):
        dirs, wts = branch_nodes(ps[b, 1:], k3, r_mag, n_theta, n_phi)
        amp, q2 = amplitude_table(ps, omega, k_dir, dirs, const, q_min_sq)
        flagged += int(np.count_nonzero(q2 <= q_min_sq))
        sq = 0.5 * np.sum(np.abs(amp[:, b]) ** 2, axis=(1, 2, 3))
        diag[b] = np.sum(wts * sq)
        if nb == 2:
            inv4 = 1.0 / np.square(np.maximum(q2, q_min_sq))
            share = inv4[:, b] / (inv4[:, 0] + inv4[:, 1])
            c = 0.5 * np.sum(np.conj(amp[:, 0]) * amp[:, 1], axis=(1, 2, 3))
            cross += np.sum(wts * share * c)
    return diag * pref, complex(cross * pref), flagged


def _spread(diag, cross, diag_ref, cross_ref) -> float:
    scale = float(np.mean(diag))
    if scale == 0.0:
        return 0.0
    err = float(np.max(np.abs(diag - diag_ref) / np.where(diag > 0, diag, scale)))
    if len(diag) == 2:
        err = max(err, abs(cross - cross_ref) / scale)
    return err


def adcs_parts(
    source: ElectronState | SuperpositionConfig,
    photon: PhotonSpec,
    quad: QuadratureSpec = DEFAULT_QUAD,
    const: PhysicalConstants = CONSTANTS,
    strict: bool = False,
) -> AdcsParts:
    """Integrated single-branch terms and interference term at one photon point.

    The error estimate compares the result with the one at half the orders
    (relative to the incoherent scale for the interference term); orders double
    until it drops below ``quad.refine_tol`` or ``quad.max_doublings`` is hit.

    Raises:
        KinematicallyForbidden: photon above the kinematic limit.
        ConvergenceFailure: only with ``strict=True``.
    """
    electrons = (source,) if isinstance(source, ElectronState) else source.electrons
    for e in electrons:
        if e.mass != const.m_e:
            raise ValueError("electron mass differs from the constants in use")
    ps = np.stack([e.four_momentum for e in electrons])
    final_electron_energy(ps[0, 0], photon.omega, const.m_e)
    k_dir = photon.direction

    nt, nph = quad.n_theta, quad.n_phi
    prev = _parts_once(ps, k_dir, photon.omega, const, nt // 2, nph // 2, quad.q_min_sq)
    history = []
    for level in range(quad.max_doublings + 1):
        cur = _parts_once(ps, k_dir, photon.omega, const, nt, nph, quad.q_min_sq)
        err = _spread(cur[0], cur[1], prev[0], prev[1])
        history.append((nt, nph, err))
        if err <= quad.refine_tol or level == quad.max_doublings:
            break
        prev = cur
        nt, nph = 2 * nt, 2 * nph
    converged = err <= quad.refine_tol
    if strict and not converged:
        raise ConvergenceFailure(f"relative change {err:.2e} > {quad.refine_tol:.2e} at {nt}x{nph}")
    return AdcsParts(cur[0], cur[1], err, converged, cur[2], nt, nph, history)


def adcs(
    source: ElectronState | SuperpositionConfig,
    photon: PhotonSpec,
    mode: str = "coherent",
    quad: QuadratureSpec = DEFAULT_QUAD,
    const: PhysicalConstants = CONSTANTS,
    strict: bool = False,
) -> DifferentialCrossSection:
    """dsigma/(domega dOmega_k) for a single electron or a two-momentum superposition."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if isinstance(source, ElectronState):
        if mode != "single":
            raise ValueError("an ElectronState only supports mode='single'")
        return adcs_parts(source, photon, quad, const, strict).result("single")
    if mode == "single":
        return adcs_parts(source.electron_1, photon, quad, const, strict).result("single")
    return adcs_parts(source, photon, quad, const, strict).result(mode, source.xi)


def adp(
    source: ElectronState | SuperpositionConfig,
    photon: PhotonSpec,
    mode: str = "coherent",
    quad: QuadratureSpec = DEFAULT_QUAD,
    const: PhysicalConstants = CONSTANTS,
    strict: bool = False,
) -> float:
    """Angular differential power ``omega * dsigma/dk`` (keV^-2 sr^-1)."""
    return photon.omega * adcs(source, photon, mode, quad, const, strict).value
