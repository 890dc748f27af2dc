"""Seeded self-checks run by ``cobrems validate``.

Each check reports the worst deviation it measured against a fixed tolerance.
Reports contain no timings, so the same seed and level give the same bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .amplitude import amplitude_table, trace_summed_square, ward_ratio
from .cross_section import DEFAULT_QUAD, PhotonSpec, adcs_parts
from .dirac import GAMMA, IDENTITY4, METRIC, dirac_adjoint, slash, spinor_u
from .kinematics import (
    CONSTANTS,
    ElectronState,
    PhysicalConstants,
    SuperpositionConfig,
    build_final_state,
    superposition_geometry,
)

LEVELS = {
    "quick": {"random": 1000, "xi_points": 6, "conv_points": 4, "bh_cases": 1},
    "full": {"random": 5000, "xi_points": 20, "conv_points": 20, "bh_cases": 4},
}

# (T keV, omega keV, theta_k deg, phi_k deg, mode, xi) -> ADCS in keV^-3 sr^-1,
# 30 degree separation, default quadrature, CODATA 2018 constants
GOLDEN = (
    ((200.0, 10.0, 15.0, 0.0, "coherent", 0.0), 2.962355060019635e-12),
    ((200.0, 10.0, 15.0, 0.0, "coherent", math.pi), 2.414743686226326e-12),
    ((200.0, 100.0, 40.0, 90.0, "incoherent", 0.0), 4.502569211073719e-14),
    ((20.0, 10.0, 90.0, 0.0, "coherent", 0.0), 2.8453094782183055e-12),
)
GOLDEN_RTOL = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    worst: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.worst <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<28s} worst={self.worst:.3e}  tol={self.tolerance:.1e}"


@dataclass(frozen=True)
class Report:
    level: str
    seed: int
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def text(self) -> str:
        head = [f"cobrems validate level={self.level} seed={self.seed}"]
        tail = [f"RESULT {'PASS' if self.passed else 'FAIL'} ({sum(c.passed for c in self.checks)}/{len(self.checks)})"]
        return "\n".join(head + [c.line() for c in self.checks] + tail) + "\n"


def random_unit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_kinematics(rng: np.random.Generator, const: PhysicalConstants = CONSTANTS):
    """Electron with T in [20, 2000] keV and a photon with omega/T in [0.05, 0.95]."""
    T = rng.uniform(20.0, 2000.0)
    omega = rng.uniform(0.05, 0.95) * T
    e = ElectronState(T, random_unit(rng), const.m_e)
    p = e.four_momentum
    fs = build_final_state(p, omega, random_unit(rng), random_unit(rng), const.m_e)
    return p, fs


def check_clifford() -> CheckResult:
    worst = 0.0
    for mu in range(4):
        for nu in range(4):
            anti = GAMMA[mu] @ GAMMA[nu] + GAMMA[nu] @ GAMMA[mu]
            worst = max(worst, float(np.max(np.abs(anti - 2 * METRIC[mu, nu] * IDENTITY4))))
    return CheckResult("gamma_anticommutator", worst, 1e-14)


def check_spinors(rng, n, const) -> list[CheckResult]:
    m = const.m_e
    dirac = norm = compl = 0.0
    for _ in range(n):
        T = rng.uniform(0.0, 10000.0 - m)
        p = ElectronState(max(T, 1e-3), random_unit(rng), m).four_momentum
        us = [spinor_u(p, s, m) for s in (0, 1)]
        for u in us:
            dirac = max(dirac, np.linalg.norm((slash(p) - m * IDENTITY4) @ u) / np.linalg.norm(u))
            norm = max(norm, abs((dirac_adjoint(u) @ u).real / (2 * m) - 1.0))
        s = sum(np.outer(u, dirac_adjoint(u)) for u in us)
        target = slash(p) + m * IDENTITY4
        compl = max(compl, float(np.max(np.abs(s - target)) / np.max(np.abs(target))))
    return [
        CheckResult("dirac_equation_residual", float(dirac), 1e-10),
        CheckResult("spinor_normalization", float(norm), 1e-12),
        CheckResult("spinor_completeness", compl, 1e-11),
    ]


def check_ward(rng, n, const) -> CheckResult:
    worst = 0.0
    for _ in range(n):
        p, fs = random_kinematics(rng, const)
        worst = max(worst, ward_ratio(p, fs, const))
    return CheckResult("ward_identity", worst, 1e-10)


def check_trace_oracle(rng, n, const) -> CheckResult:
    worst = 0.0
    for _ in range(n):
        p, fs = random_kinematics(rng, const)
        amp, _ = amplitude_table(p, fs.k[0], fs.k[1:] / fs.k[0], fs.r[1:] / np.linalg.norm(fs.r[1:]), const)
        spinor_sum = 0.5 * float(np.sum(np.abs(amp) ** 2))
        oracle = trace_summed_square(p, fs, const)
        worst = max(worst, float(abs(spinor_sum - oracle) / oracle))
    return CheckResult("spinor_vs_trace_oracle", worst, 1e-10)


def _reference_config(const, T=200.0):
    return superposition_geometry(T, math.radians(30.0), 0.0, const.m_e)


def check_xi_average(rng, n_points, const, quad) -> CheckResult:
    cfg = _reference_config(const)
    worst = 0.0
    N = 8
    for _ in range(n_points):
        ph = PhotonSpec(rng.uniform(1.0, 150.0), math.acos(rng.uniform(-1, 1)), rng.uniform(0, 2 * math.pi))
        parts = adcs_parts(cfg, ph, quad, const)
        mean = sum(parts.value("coherent", 2 * math.pi * j / N) for j in range(N)) / N
        inc = parts.value("incoherent")
        worst = max(worst, abs(mean - inc) / inc)
    return CheckResult("xi_average_equals_incoherent", worst, 1e-10)


def check_degenerate(const, quad) -> list[CheckResult]:
    e = ElectronState(200.0, np.array([0.0, 0.0, 1.0]), const.m_e)
    cfg = SuperpositionConfig(e, e, math.pi)
    ph = PhotonSpec(50.0, math.radians(25.0), 0.3)
    single = adcs_parts(e, ph, quad, const).value("single")
    parts = adcs_parts(cfg, ph, quad, const)
    return [
        CheckResult("degenerate_xi_pi_cancels", parts.value("coherent", math.pi) / single, 1e-12),
        CheckResult("degenerate_xi_0_doubles", abs(parts.value("coherent", 0.0) / single - 2.0), 1e-12),
    ]


def check_symmetry(rng, n_points, const, quad) -> CheckResult:
    cfg = _reference_config(const)
    worst = 0.0
    for _ in range(n_points):
        w = rng.uniform(5.0, 150.0)
        th = math.acos(rng.uniform(-1, 1))
        phi = rng.uniform(0, math.pi)
        base = adcs_parts(cfg, PhotonSpec(w, th, phi), quad, const)
        # phi -> -phi (y mirror) and phi -> pi - phi (x mirror, swaps the beams)
        for mirrored in (-phi, math.pi - phi):
            other = adcs_parts(cfg, PhotonSpec(w, th, mirrored), quad, const)
            for xi in (0.0, math.pi):
                a, b = base.value("coherent", xi), other.value("coherent", xi)
                worst = max(worst, abs(a - b) / max(abs(a), abs(b)))
    return CheckResult("mirror_symmetry", worst, 1e-9)


def check_convergence(rng, n_points, const, quad) -> CheckResult:
    cfg = _reference_config(const)
    fixed = quad.__class__(quad.n_theta, quad.n_phi, quad.refine_tol, 0, quad.q_min_sq)
    worst = 0.0
    for _ in range(n_points):
        ph = PhotonSpec(10.0, math.acos(rng.uniform(-1, 1)), rng.uniform(0, 2 * math.pi))
        a = adcs_parts(cfg, ph, fixed, const)
        b = adcs_parts(cfg, ph, fixed.doubled(), const)
        for xi in (0.0, math.pi):
            va, vb = a.value("coherent", xi), b.value("coherent", xi)
            worst = max(worst, abs(va - vb) / vb)
    return CheckResult("quadrature_doubling", worst, 1e-5)


def bethe_heitler(T: float, omega: float, const: PhysicalConstants = CONSTANTS) -> float:
    """Unscreened Born-approximation dsigma/domega (Z = 1), in keV^-3.

    Koch & Motz formula 3BN; used as an oracle for the photon-angle integral of
    the single-electron ADCS.
    """
    m = const.m_e
    E0 = (T + m) / m
    k = omega / m
    E = E0 - k
    p0 = math.sqrt(E0 * E0 - 1.0)
    p = math.sqrt(E * E - 1.0)
    eps0 = math.log((E0 + p0) / (E0 - p0))
    eps = math.log((E + p) / (E - p))
    L = 2.0 * math.log((E0 * E + p0 * p - 1.0) / k)
    body = (
        4.0 / 3.0
        - 2.0 * E0 * E * (p * p + p0 * p0) / (p * p * p0 * p0)
        + eps0 * E / p0**3
        + eps * E0 / p**3
        - eps * eps0 / (p0 * p)
        + L
        * (
            8.0 * E0 * E / (3.0 * p0 * p)
            + k * k * (E0**2 * E**2 + p0**2 * p**2) / (p0**3 * p**3)
            + k / (2.0 * p0 * p)
            * (
                (E0 * E + p0**2) / p0**3 * eps0
                - (E0 * E + p**2) / p**3 * eps
                + 2.0 * k * E0 * E / (p**2 * p0**2)
            )
        )
    )
    r0_sq = (const.alpha / m) ** 2
    return const.alpha * r0_sq * (p / p0) * body / omega


def photon_integrated(T: float, omega: float, const=CONSTANTS, quad=DEFAULT_QUAD, n: int = 96) -> float:
    """Integral of the single-electron ADCS over all photon directions."""
    e = ElectronState(T, np.array([0.0, 0.0, 1.0]), const.m_e)
    x, w = np.polynomial.legendre.leggauss(n)
    vals = [adcs_parts(e, PhotonSpec(omega, math.acos(c), 0.0), quad, const).value("single") for c in x]
    return 2.0 * math.pi * float(np.sum(w * np.array(vals)))


def check_bethe_heitler(n_cases, const, quad) -> CheckResult:
    cases = ((200.0, 100.0), (20.0, 10.0), (1000.0, 300.0), (200.0, 10.0))[:n_cases]
    worst = 0.0
    for T, w in cases:
        ref = bethe_heitler(T, w, const)
        worst = max(worst, abs(photon_integrated(T, w, const, quad) / ref - 1.0))
    return CheckResult("bethe_heitler_integral", worst, 1e-8)


def check_golden(const, quad) -> CheckResult:
    worst = 0.0
    for (T, w, th, ph, mode, xi), ref in GOLDEN:
        cfg = superposition_geometry(T, math.radians(30.0), xi, const.m_e)
        parts = adcs_parts(cfg, PhotonSpec(w, math.radians(th), math.radians(ph)), quad, const)
        worst = max(worst, abs(parts.value(mode, xi) / ref - 1.0))
    return CheckResult("golden_spectrum_snapshot", worst, GOLDEN_RTOL)


def validate(level: str = "quick", seed: int = 0, const: PhysicalConstants = CONSTANTS) -> Report:
    if level not in LEVELS:
        raise ValueError(f"level must be one of {sorted(LEVELS)}, got {level!r}")
    cfg = LEVELS[level]
    quad = DEFAULT_QUAD
    rng = np.random.default_rng(seed)
    checks = [check_clifford()]
    checks += check_spinors(rng, cfg["random"] // 10, const)
    checks.append(check_ward(rng, cfg["random"], const))
    checks.append(check_trace_oracle(rng, cfg["random"], const))
    checks.append(check_xi_average(rng, cfg["xi_points"], const, quad))
    checks += check_degenerate(const, quad)
    checks.append(check_symmetry(rng, max(2, cfg["xi_points"] // 3), const, quad))
    checks.append(check_convergence(rng, cfg["conv_points"], const, quad))
    checks.append(check_bethe_heitler(cfg["bh_cases"], const, quad))
    checks.append(check_golden(const, quad))
    return Report(level, seed, tuple(checks))


