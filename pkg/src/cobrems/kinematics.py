"""On-shell states, energy conservation against a static Coulomb field, constants.

The nucleus is an infinitely heavy point charge (Z = 1) so the field supplies
momentum but no energy: the transfer ``q = p - r - k`` always has ``q0 = 0``.
User-facing electron energies are kinetic energies; total energies are used
internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dirac import four_vector


class KinematicallyForbidden(ValueError):
    """The requested photon cannot be emitted (final electron would be off shell)."""


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 values in natural units (hbar = c = 1, keV)."""

    m_e: float = 510.99895000
    alpha: float = 1.0 / 137.035999084
    hbar_c_kev_fm: float = 197326.9804

    @property
    def e(self) -> float:
        return math.sqrt(4.0 * math.pi * self.alpha)

    @property
    def kev2_to_barn(self) -> float:
        """Multiply a cross section in keV^-2 by this to get barn (1 b = 100 fm^2)."""
        return self.hbar_c_kev_fm**2 / 100.0

    def as_dict(self) -> dict:
        return {
            "m_e_kev": self.m_e,
            "alpha": self.alpha,
            "e": self.e,
            "hbar_c_kev_fm": self.hbar_c_kev_fm,
            "kev2_to_barn": self.kev2_to_barn,
        }


CONSTANTS = PhysicalConstants()


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("zero-length direction")
    return v / n


def direction(theta: float, phi: float) -> np.ndarray:
    """Unit vector for spherical polar angles (radians)."""
    st = math.sin(theta)
    return np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])


@dataclass(frozen=True)
class ElectronState:
    kinetic_energy: float
    direction: np.ndarray
    mass: float = CONSTANTS.m_e

    def __post_init__(self):
        if not self.kinetic_energy > 0.0:
            raise ValueError(f"kinetic energy must be positive, got {self.kinetic_energy}")
        d = np.asarray(self.direction, dtype=float)
        n = np.linalg.norm(d)
        if not abs(n - 1.0) <= 1e-12:
            raise ValueError(f"direction must be a unit vector, got norm {n}")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "direction", d)

    @property
    def energy(self) -> float:
        return self.kinetic_energy + self.mass

    @property
    def momentum_magnitude(self) -> float:
        T = self.kinetic_energy
        # (T + m)^2 - m^2 without cancellation
        return math.sqrt(T * (T + 2.0 * self.mass))

    @property
    def beta(self) -> float:
        return self.momentum_magnitude / self.energy

    @property
    def four_momentum(self) -> np.ndarray:
        return four_vector(self.energy, self.momentum_magnitude * self.direction)


@dataclass(frozen=True)
class PhotonSpec:
    omega: float
    theta_k: float
    phi_k: float = 0.0

    def __post_init__(self):
        if not self.omega > 0.0:
            raise ValueError(f"photon energy must be positive, got {self.omega}")
        if not 0.0 <= self.theta_k <= math.pi:
            raise ValueError(f"theta_k must lie in [0, pi], got {self.theta_k}")
        object.__setattr__(self, "phi_k", self.phi_k % (2.0 * math.pi))

    @property
    def direction(self) -> np.ndarray:
        return direction(self.theta_k, self.phi_k)

    @property
    def four_momentum(self) -> np.ndarray:
        return four_vector(self.omega, self.omega * self.direction)


@dataclass(frozen=True)
class SuperpositionConfig:
    """Equal-weight superposition ``(|p1> + exp(i xi)|p2>)/sqrt(2)``.

    Both components must carry the same kinetic energy; a static field cannot
    bring components of different energy into the same final state.
    """

    electron_1: ElectronState
    electron_2: ElectronState
    xi: float = 0.0

    def __post_init__(self):
        t1 = self.electron_1.kinetic_energy
        t2 = self.electron_2.kinetic_energy
        if abs(t1 - t2) > 1e-9 * t1:
            raise ValueError(
                f"superposed momenta need equal kinetic energies, got {t1} and {t2} keV"
            )
        if self.electron_1.mass != self.electron_2.mass:
            raise ValueError("superposed electrons must share the same mass")

    @property
    def electrons(self) -> tuple[ElectronState, ElectronState]:
        return (self.electron_1, self.electron_2)

    def with_xi(self, xi: float) -> "SuperpositionConfig":
        return SuperpositionConfig(self.electron_1, self.electron_2, xi)


class FinalStateKinematics(NamedTuple):
    r: np.ndarray
    k: np.ndarray
    q: np.ndarray


def final_electron_energy(E_p: float, omega: float, m_e: float = CONSTANTS.m_e) -> float:
    """Total final-electron energy ``E_p - omega``.

    Raises:
        KinematicallyForbidden: if ``omega >= E_p - m_e``.
    """
    if not omega < E_p - m_e:
        raise KinematicallyForbidden(
            f"photon energy {omega} keV reaches the threshold E_p - m_e = {E_p - m_e} keV"
        )
    return E_p - omega


def final_momentum_magnitude(E_r: float, m_e: float) -> float:
    return math.sqrt((E_r - m_e) * (E_r + m_e))


def build_final_state(
    p, omega: float, k_dir, r_dir, m_e: float = CONSTANTS.m_e
) -> FinalStateKinematics:
    p = np.asarray(p, dtype=float)
    E_r = final_electron_energy(p[0], omega, m_e)
    r = four_vector(E_r, final_momentum_magnitude(E_r, m_e) * np.asarray(r_dir, dtype=float))
    k = four_vector(omega, omega * np.asarray(k_dir, dtype=float))
    q = p - r - k
    q[0] = 0.0
    return FinalStateKinematics(r, k, q)


def superposition_geometry(
    T: float, separation: float, xi: float = 0.0, m_e: float = CONSTANTS.m_e
) -> SuperpositionConfig:
    """Two beams of kinetic energy ``T`` at polar angles ``+-separation/2``.

    Both lie in the x-z plane (azimuths 0 and pi) so the bisector is the z axis.
    """
    if not 0.0 <= separation <= math.pi:
        raise ValueError(f"separation must lie in [0, pi], got {separation}")
    half = 0.5 * separation
    d1 = np.array([math.sin(half), 0.0, math.cos(half)])
    d2 = np.array([-math.sin(half), 0.0, math.cos(half)])
    return SuperpositionConfig(ElectronState(T, d1, m_e), ElectronState(T, d2, m_e), xi)
