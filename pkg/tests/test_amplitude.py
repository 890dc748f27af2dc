import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cobrems.amplitude import (
    CHANNELS,
    NearSingularTransfer,
    SpinChannel,
    amplitude_table,
    matrix_element,
    summed_square,
    superposition_element,
    trace_summed_square,
    ward_ratio,
)
from cobrems.kinematics import (
    CONSTANTS,
    ElectronState,
    SuperpositionConfig,
    build_final_state,
    direction,
    superposition_geometry,
)

M = CONSTANTS.m_e

# Straight-line evaluator: gammas from Kronecker products, spinors written out,
# no shared code with the package beyond the constants.
_S = [np.array([[0, 1], [1, 0]], complex), np.array([[0, -1j], [1j, 0]]), np.array([[1, 0], [0, -1]], complex)]
_I2 = np.eye(2)
_G = [np.kron(_S[2], _I2)] + [np.kron(1j * _S[1], s) for s in _S]


def _sl(v):
    return v[0] * _G[0] - v[1] * _G[1] - v[2] * _G[2] - v[3] * _G[3]


def _u(p, s):
    chi = np.array([1, 0], complex) if s == "up" else np.array([0, 1], complex)
    sp = p[1] * _S[0] + p[2] * _S[1] + p[3] * _S[2]
    a = math.sqrt(p[0] + M)
    return np.concatenate([a * chi, sp @ chi / a])


def _dot(a, b):
    return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]


def _reference_amplitude(T, omega, theta_k, phi_k, theta_r, phi_r, s, s_prime, pol):
    E = T + M
    pm = math.sqrt(E * E - M * M)
    p = np.array([E, 0.0, 0.0, pm])
    kd = np.array([math.sin(theta_k) * math.cos(phi_k), math.sin(theta_k) * math.sin(phi_k), math.cos(theta_k)])
    k = np.concatenate([[omega], omega * kd])
    Er = E - omega
    rm = math.sqrt(Er * Er - M * M)
    rd = np.array([math.sin(theta_r) * math.cos(phi_r), math.sin(theta_r) * math.sin(phi_r), math.cos(theta_r)])
    r = np.concatenate([[Er], rm * rd])
    q3 = p[1:] - r[1:] - k[1:]
    e1 = np.cross([0.0, 0.0, 1.0], kd)
    e1 /= np.linalg.norm(e1)
    e = e1 if pol == 1 else np.cross(kd, e1)
    eps = np.concatenate([[0.0], e])
    one = np.eye(4)
    first = _sl(eps) @ (_sl(r + k) + M * one) @ _G[0] / (2 * _dot(r, k))
    second = _G[0] @ (_sl(p - k) + M * one) @ _sl(eps) / (2 * _dot(p, k))
    ubar = _u(r, s_prime).conj() @ _G[0]
    return -1j * CONSTANTS.e**3 / np.dot(q3, q3) * (ubar @ (first - second) @ _u(p, s))


# one fixed configuration, channel up -> up, polarization 1
ANCHOR_ARGS = (200.0, 10.0, math.radians(20.0), 0.0, math.radians(35.0), math.radians(60.0), "up", "up", 1)


def _package_amplitude(T, omega, theta_k, phi_k, theta_r, phi_r, s, s_prime, pol):
    p = ElectronState(T, np.array([0.0, 0.0, 1.0])).four_momentum
    fs = build_final_state(p, omega, direction(theta_k, phi_k), direction(theta_r, phi_r), M)
    return matrix_element(p, fs, SpinChannel(s, s_prime, pol))


def test_anchor_value_against_straight_line_evaluator():
    ref = _reference_amplitude(*ANCHOR_ARGS)
    got = _package_amplitude(*ANCHOR_ARGS)
    assert abs(got - ref) <= 1e-12 * abs(ref)
    assert abs(ref) > 0


@settings(max_examples=40, deadline=None)
@given(
    st.floats(20.0, 2000.0),
    st.floats(0.05, 0.95),
    st.floats(0.05, 3.0),
    st.floats(0.0, 6.28),
    st.floats(0.0, math.pi),
    st.floats(0.0, 6.28),
    st.sampled_from(CHANNELS),
)
def test_matrix_element_matches_independent_evaluator(T, frac, tk, pk, tr, pr, ch):
    args = (T, frac * T, tk, pk, tr, pr, ch.s, ch.s_prime, ch.pol)
    ref = _reference_amplitude(*args)
    got = _package_amplitude(*args)
    scale = max(abs(_reference_amplitude(*args[:6], "up", "up", 1)), abs(ref), 1e-300)
    assert abs(got - ref) <= 1e-10 * scale


def test_kernel_table_matches_matrix_path(rng):
    for _ in range(20):
        T = rng.uniform(20, 2000)
        p = ElectronState(T, np.array([0.0, 0.0, 1.0])).four_momentum
        kd = direction(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
        rd = direction(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
        omega = rng.uniform(0.05, 0.95) * T
        fs = build_final_state(p, omega, kd, rd, M)
        amp, q2 = amplitude_table(p, omega, kd, rd)
        assert q2[0, 0] == pytest.approx(np.dot(fs.q[1:], fs.q[1:]), rel=1e-12)
        for ch in CHANNELS:
            sf, s, pol = ("up", "down").index(ch.s_prime), ("up", "down").index(ch.s), ch.pol - 1
            ref = matrix_element(p, fs, ch)
            assert abs(amp[0, 0, sf, s, pol] - ref) <= 1e-11 * np.max(np.abs(amp))


def test_trace_oracle_agrees(rng):
    for _ in range(50):
        T = rng.uniform(20, 2000)
        p = ElectronState(T, direction(rng.uniform(0, math.pi), 1.0)).four_momentum
        omega = rng.uniform(0.05, 0.95) * T
        kd = direction(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
        rd = direction(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
        fs = build_final_state(p, omega, kd, rd, M)
        spinor = 0.5 * sum(abs(matrix_element(p, fs, ch)) ** 2 for ch in CHANNELS)
        assert spinor == pytest.approx(trace_summed_square(p, fs), rel=1e-10)


def test_ward_identity(rng):
    for _ in range(50):
        T = rng.uniform(20, 2000)
        p = ElectronState(T, np.array([0.0, 0.0, 1.0])).four_momentum
        fs = build_final_state(
            p, rng.uniform(0.05, 0.95) * T, direction(rng.uniform(0, 3), 0.4), direction(rng.uniform(0, 3), 2.0), M
        )
        assert ward_ratio(p, fs) < 1e-10


def test_coupling_scales_linearly():
    p = ElectronState(300.0, np.array([0.0, 0.0, 1.0])).four_momentum
    fs = build_final_state(p, 50.0, direction(0.3, 0.1), direction(1.0, 2.0), M)
    ch = CHANNELS[3]
    a = matrix_element(p, fs, ch, coupling=1.0)
    b = matrix_element(p, fs, ch, coupling=2.5)
    assert b == pytest.approx(2.5 * a, rel=1e-14)


def test_near_singular_transfer_raises():
    p = ElectronState(200.0, np.array([0.0, 0.0, 1.0])).four_momentum
    omega = 50.0
    # raise the floor above the actual |q|^2 to trigger the guard
    fs = build_final_state(p, omega, direction(0.2, 0.0), direction(0.1, 0.0), M)
    q2 = float(np.dot(fs.q[1:], fs.q[1:]))
    with pytest.raises(NearSingularTransfer):
        matrix_element(p, fs, CHANNELS[0], q_min_sq=2 * q2)


def test_superposition_phase_identities(cfg200):
    kd = direction(0.4, 0.3)
    rd = direction(0.7, 1.1)
    omega = 40.0
    for ch in CHANNELS[:4]:
        m0 = superposition_element(cfg200, rd, omega, kd, ch)
        mpi = superposition_element(cfg200.with_xi(math.pi), rd, omega, kd, ch)
        # |M(0)|^2 + |M(pi)|^2 = |M1|^2 + |M2|^2
        amp, _ = amplitude_table([e.four_momentum for e in cfg200.electrons], omega, kd, rd)
        sf, s, pol = ("up", "down").index(ch.s_prime), ("up", "down").index(ch.s), ch.pol - 1
        both = abs(amp[0, 0, sf, s, pol]) ** 2 + abs(amp[0, 1, sf, s, pol]) ** 2
        assert abs(m0) ** 2 + abs(mpi) ** 2 == pytest.approx(both, rel=1e-12)


def test_summed_square_modes(cfg200):
    kd, rd, w = direction(0.4, 0.3), direction(0.7, 1.1), 40.0
    inc = summed_square(cfg200, rd, w, kd, "incoherent")
    c0 = summed_square(cfg200, rd, w, kd, "coherent")
    cpi = summed_square(cfg200.with_xi(math.pi), rd, w, kd, "coherent")
    assert 0.5 * (c0 + cpi) == pytest.approx(inc, rel=1e-12)
    single = summed_square(cfg200.electron_1, rd, w, kd, "single")
    assert summed_square(cfg200, rd, w, kd, "single") == single
    with pytest.raises(ValueError):
        summed_square(cfg200.electron_1, rd, w, kd, "coherent")


def test_degenerate_superposition_pointwise():
    e = ElectronState(200.0, np.array([0.0, 0.0, 1.0]))
    kd, rd, w = direction(0.4, 0.3), direction(0.7, 1.1), 40.0
    single = summed_square(e, rd, w, kd, "single")
    assert summed_square(SuperpositionConfig(e, e, 0.0), rd, w, kd) == pytest.approx(2 * single, rel=1e-13)
    assert summed_square(SuperpositionConfig(e, e, math.pi), rd, w, kd) <= 1e-13 * single
