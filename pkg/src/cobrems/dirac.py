"""Dirac algebra in the Dirac (standard) representation.

Four-vectors are plain ``numpy`` arrays of shape ``(4,)`` holding contravariant
components ``(t, x, y, z)``; the metric is ``diag(+1, -1, -1, -1)``. Energies and
momenta are in keV throughout.
"""

from __future__ import annotations

import numpy as np

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])

SPIN_LABELS = ("up", "down")

_I2 = np.eye(2, dtype=np.complex128)
_Z2 = np.zeros((2, 2), dtype=np.complex128)

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=np.complex128,
)


def _build_gammas() -> np.ndarray:
    g = np.empty((4, 4, 4), dtype=np.complex128)
    g[0] = np.block([[_I2, _Z2], [_Z2, -_I2]])
    for i in range(3):
        g[i + 1] = np.block([[_Z2, PAULI[i]], [-PAULI[i], _Z2]])
    g.setflags(write=False)
    return g


GAMMA = _build_gammas()
IDENTITY4 = np.eye(4, dtype=np.complex128)


def gamma(mu: int) -> np.ndarray:
    """Return the gamma matrix ``gamma^mu`` (read-only, shared)."""
    if mu not in (0, 1, 2, 3):
        raise IndexError(f"gamma index must be in 0..3, got {mu!r}")
    return GAMMA[mu]


def minkowski_dot(a, b):
    """Minkowski product ``a0*b0 - a.b`` over the last axis (broadcasts)."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a[..., 0] * b[..., 0] - np.sum(a[..., 1:] * b[..., 1:], axis=-1)


def four_vector(energy: float, momentum) -> np.ndarray:
    return np.concatenate(([float(energy)], np.asarray(momentum, dtype=float)))


def slash(p) -> np.ndarray:
    """Feynman slash ``gamma^mu p_mu = p0 g0 - p1 g1 - p2 g2 - p3 g3``.

    Complex components are allowed (polarization vectors).
    """
    p = np.asarray(p)
    lowered = p * np.array([1.0, -1.0, -1.0, -1.0])
    return np.tensordot(lowered, GAMMA, axes=(0, 0))


def spinor_u(p, s: str | int, m: float) -> np.ndarray:
    """Positive-energy spinor with spin along the lab z-axis.

    ``u_s(p) = sqrt(E + m) * (chi_s, (sigma.p) chi_s / (E + m))``, normalized so
    that ``ubar u = 2m``.

    Raises:
        ValueError: if ``p`` is off shell or below the rest energy.
    """
    p = np.asarray(p, dtype=float)
    idx = _spin_index(s)
    E = p[0]
    if E < m * (1.0 - 1e-12):
        raise ValueError(f"energy {E} keV is below the rest energy {m} keV")
    if abs(minkowski_dot(p, p) - m * m) > 1e-9 * m * m:
        raise ValueError("momentum is off shell")
    chi = np.zeros(2, dtype=np.complex128)
    chi[idx] = 1.0
    sigma_p = np.tensordot(p[1:], PAULI, axes=(0, 0))
    norm = np.sqrt(E + m)
    return np.concatenate((norm * chi, (sigma_p @ chi) / norm))


def _spin_index(s: str | int) -> int:
    if s in (0, "up", "+"):
        return 0
    if s in (1, "down", "-"):
        return 1
    raise ValueError(f"spin label must be 'up' or 'down', got {s!r}")


def dirac_adjoint(u) -> np.ndarray:
    """``ubar = u^dagger gamma^0`` (returned as a 1-D row)."""
    return np.conj(np.asarray(u, dtype=np.complex128)) @ GAMMA[0]


def bar_matrix(m) -> np.ndarray:
    """Dirac conjugate of a matrix, ``gamma^0 M^dagger gamma^0``."""
    return GAMMA[0] @ np.conj(np.asarray(m)).T @ GAMMA[0]


def polarization_pair(k_dir) -> tuple[np.ndarray, np.ndarray]:
    """Two real transverse polarization four-vectors for a photon along ``k_dir``.

    ``e1 = normalize(z x k)`` (``x``, orthogonalized, when ``k`` is within 1e-8
    of the z axis) and
    ``e2 = k x e1``. Both have zero time component.
    """
    k = np.asarray(k_dir, dtype=float)
    n = np.linalg.norm(k)
    if n == 0.0 or abs(n - 1.0) > 1e-12:
        raise ValueError(f"k_dir must be a unit vector, got norm {n}")
    e1 = np.cross([0.0, 0.0, 1.0], k)
    s = np.linalg.norm(e1)
    if s < 1e-8:
        e1 = np.array([1.0, 0.0, 0.0]) - k[0] * k
        e1 = e1 / np.linalg.norm(e1)
    else:
        e1 = e1 / s
    e2 = np.cross(k, e1)
    return np.concatenate(([0.0], e1)), np.concatenate(([0.0], e2))
