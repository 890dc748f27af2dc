"""Tree-level Bremsstrahlung amplitude off a static Coulomb field.

For one momentum branch

    iM = -i e^3 / |q|^2 * ubar_s'(r) Gamma u_s(p)
    Gamma = eps/ (r/ + k/ + m) g0 / (2 r.k) - g0 (p/ - k/ + m) eps/ / (2 p.k)

Two evaluation paths exist. ``matrix_element`` and ``bracket`` build explicit
4x4 matrices and are meant for single configurations and checks. Sweeps go
through ``amplitude_table``, which dispatches to the compiled kernel.
``trace_summed_square`` computes the spin sum from completeness relations and
never touches an explicit spinor.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import _kernels
from .dirac import GAMMA, IDENTITY4, SPIN_LABELS, bar_matrix, dirac_adjoint, minkowski_dot
from .dirac import polarization_pair, slash, spinor_u
from .kinematics import (
    CONSTANTS,
    ElectronState,
    FinalStateKinematics,
    PhysicalConstants,
    SuperpositionConfig,
    build_final_state,
    final_electron_energy,
    final_momentum_magnitude,
)

Q_MIN_SQ = 1e-12  # keV^2
MODES = ("coherent", "incoherent", "single")


class NearSingularTransfer(ArithmeticError):
    """|q|^2 fell below the configured floor; the 1/q^4 weight is unreliable there."""

    def __init__(self, q2: float, q_min_sq: float, branch: int | None = None):
        self.q2 = q2
        self.branch = branch
        where = "" if branch is None else f" on branch {branch + 1}"
        super().__init__(f"|q|^2 = {q2:.3e} keV^2 <= floor {q_min_sq:.3e}{where}")


class SpinChannel(NamedTuple):
    s: str
    s_prime: str
    pol: int


CHANNELS = tuple(
    SpinChannel(s, sp, pol) for s in SPIN_LABELS for sp in SPIN_LABELS for pol in (1, 2)
)


def _index(ch: SpinChannel) -> tuple[int, int, int]:
    return SPIN_LABELS.index(ch.s_prime), SPIN_LABELS.index(ch.s), ch.pol - 1


def bracket(p, r, k, eps, m: float) -> np.ndarray:
    """The Dirac matrix sandwiched between the spinors (no coupling, no 1/q^2)."""
    eps_s = slash(eps)
    g0 = GAMMA[0]
    first = eps_s @ (slash(r + k) + m * IDENTITY4) @ g0 / (2.0 * minkowski_dot(r, k))
    second = g0 @ (slash(p - k) + m * IDENTITY4) @ eps_s / (2.0 * minkowski_dot(p, k))
    return first - second


def _coulomb_prefactor(q, coupling: float, q_min_sq: float, branch=None) -> complex:
    q2 = float(np.dot(q[1:], q[1:]))
    if q2 <= q_min_sq:
        raise NearSingularTransfer(q2, q_min_sq, branch)
    return -1j * coupling / q2


def matrix_element(
    p,
    fs: FinalStateKinematics,
    ch: SpinChannel,
    const: PhysicalConstants = CONSTANTS,
    q_min_sq: float = Q_MIN_SQ,
    eps=None,
    coupling: float | None = None,
) -> complex:
    """``iM`` for one spin/polarization channel, via explicit 4x4 matrices.

    ``eps`` overrides the polarization four-vector (e.g. ``fs.k`` for a Ward
    check); ``coupling`` overrides ``e^3``.
    """
    p = np.asarray(p, dtype=float)
    m = const.m_e
    if eps is None:
        eps = polarization_pair(fs.k[1:] / fs.k[0])[ch.pol - 1]
    if coupling is None:
        coupling = const.e**3
    pref = _coulomb_prefactor(fs.q, coupling, q_min_sq)
    G = bracket(p, fs.r, fs.k, eps, m)
    ubar = dirac_adjoint(spinor_u(fs.r, ch.s_prime, m))
    return complex(pref * (ubar @ G @ spinor_u(p, ch.s, m)))


def trace_summed_square(
    p, fs: FinalStateKinematics, const: PhysicalConstants = CONSTANTS, q_min_sq: float = Q_MIN_SQ
) -> float:
    """Spin-averaged, polarization-summed ``|iM|^2`` from traces.

    ``(1/2) sum_pol Tr[(r/ + m) G (p/ + m) Gbar]`` with ``Gbar = g0 G^dag g0``.
    """
    p = np.asarray(p, dtype=float)
    m = const.m_e
    pref = abs(_coulomb_prefactor(fs.q, const.e**3, q_min_sq)) ** 2
    proj_r = slash(fs.r) + m * IDENTITY4
    proj_p = slash(p) + m * IDENTITY4
    total = 0.0
    for eps in polarization_pair(fs.k[1:] / fs.k[0]):
        G = bracket(p, fs.r, fs.k, eps, m)
        total += np.trace(proj_r @ G @ proj_p @ bar_matrix(G)).real
    return 0.5 * pref * total


def prepare_branches(ps, k, eps, m: float):
    """Per-photon setup for the kernel: ``g0 u_s(p)`` and the second-diagram spinors.

    Returns ``(g0u, tail)`` with shapes ``(nb, 2, 4)`` and ``(nb, npol, 2, 4)``.
    """
    ps = np.atleast_2d(np.asarray(ps, dtype=float))
    eps = np.atleast_2d(np.asarray(eps, dtype=float))
    nb, npol = ps.shape[0], eps.shape[0]
    g0u = np.empty((nb, 2, 4), dtype=np.complex128)
    tail = np.empty((nb, npol, 2, 4), dtype=np.complex128)
    for b, p in enumerate(ps):
        inv = 1.0 / (2.0 * minkowski_dot(p, k))
        numer = GAMMA[0] @ (slash(p - k) + m * IDENTITY4)
        for s in range(2):
            u = spinor_u(p, s, m)
            g0u[b, s] = GAMMA[0] @ u
            for a in range(npol):
                tail[b, a, s] = inv * (numer @ (slash(eps[a]) @ u))
    return g0u, tail


def amplitude_table(
    ps,
    omega: float,
    k_dir,
    r_dirs,
    const: PhysicalConstants = CONSTANTS,
    q_min_sq: float = Q_MIN_SQ,
    eps=None,
    coupling: float | None = None,
    kernel=None,
):
    """Amplitudes for every branch, channel and final-electron direction.

    All branches must share the same total energy. Returns ``(amp, q2)`` with
    ``amp[node, branch, s_final, s_initial, pol]``.
    """
    ps = np.atleast_2d(np.asarray(ps, dtype=float))
    E_p = ps[0, 0]
    if not np.allclose(ps[:, 0], E_p, rtol=1e-12, atol=0.0):
        raise ValueError("all branches must share the same energy")
    m = const.m_e
    E_r = final_electron_energy(E_p, omega, m)
    r_mag = final_momentum_magnitude(E_r, m)
    k_dir = np.asarray(k_dir, dtype=float)
    k = np.concatenate(([omega], omega * k_dir))
    if eps is None:
        eps = np.stack(polarization_pair(k_dir))
    eps = np.atleast_2d(np.asarray(eps, dtype=float))
    if coupling is None:
        coupling = const.e**3
    g0u, tail = prepare_branches(ps, k, eps, m)
    kern = kernel or _kernels.branch_amplitudes
    return kern(
        g0u, tail, eps, k, ps[:, 1:], np.atleast_2d(np.asarray(r_dirs, dtype=float)),
        E_r, r_mag, m, coupling, q_min_sq,
    )


def _raise_if_singular(q2, q_min_sq):
    bad = np.argwhere(q2 <= q_min_sq)
    if bad.size:
        node, branch = bad[0]
        raise NearSingularTransfer(float(q2[node, branch]), q_min_sq, int(branch))


def superposition_element(
    cfg: SuperpositionConfig,
    r_dir,
    omega: float,
    k_dir,
    ch: SpinChannel,
    const: PhysicalConstants = CONSTANTS,
    q_min_sq: float = Q_MIN_SQ,
) -> complex:
    """``(M1 + exp(i xi) M2) / sqrt(2)``; each branch carries its own ``q``."""
    ps = [e.four_momentum for e in cfg.electrons]
    amp, q2 = amplitude_table(ps, omega, k_dir, r_dir, const, q_min_sq)
    _raise_if_singular(q2, q_min_sq)
    sf, s, pol = _index(ch)
    m1, m2 = amp[0, 0, sf, s, pol], amp[0, 1, sf, s, pol]
    return complex((m1 + np.exp(1j * cfg.xi) * m2) / math.sqrt(2.0))


def summed_square(
    source: ElectronState | SuperpositionConfig,
    r_dir,
    omega: float,
    k_dir,
    mode: str = "coherent",
    const: PhysicalConstants = CONSTANTS,
    q_min_sq: float = Q_MIN_SQ,
) -> float:
    """``(1/2) sum_{s, s', pol} |iM|^2`` at one final state.

    ``coherent`` squares the superposed amplitude, ``incoherent`` averages the
    two single-branch results, ``single`` uses an ElectronState (or the first
    component of a superposition). Both branches share the initial spin label.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if isinstance(source, ElectronState):
        if mode != "single":
            raise ValueError("an ElectronState only supports mode='single'")
        electrons = (source,)
    elif mode == "single":
        electrons = (source.electron_1,)
    else:
        electrons = source.electrons
    ps = [e.four_momentum for e in electrons]
    amp, q2 = amplitude_table(ps, omega, k_dir, r_dir, const, q_min_sq)
    _raise_if_singular(q2, q_min_sq)
    amp = amp[0]
    if mode == "coherent":
        sup = (amp[0] + np.exp(1j * source.xi) * amp[1]) / math.sqrt(2.0)
        return 0.5 * float(np.sum(np.abs(sup) ** 2))
    per_branch = 0.5 * np.sum(np.abs(amp) ** 2, axis=(1, 2, 3))
    return float(np.mean(per_branch))


def ward_ratio(p, fs: FinalStateKinematics, const: PhysicalConstants = CONSTANTS) -> float:
    """max |M(eps -> k)| over spins divided by the max physical-channel |M|."""
    p = np.asarray(p, dtype=float)
    k_dir = fs.k[1:] / fs.k[0]
    r_dir = fs.r[1:] / np.linalg.norm(fs.r[1:])
    phys, _ = amplitude_table(p, fs.k[0], k_dir, r_dir, const)
    gauge, _ = amplitude_table(p, fs.k[0], k_dir, r_dir, const, eps=fs.k)
    return float(np.max(np.abs(gauge)) / np.max(np.abs(phys)))
