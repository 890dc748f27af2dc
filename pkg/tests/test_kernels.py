import math

import numpy as np
import pytest

from cobrems import _kernels
from cobrems._backend import HAVE_NUMBA
from cobrems.amplitude import amplitude_table
from cobrems.cross_section import branch_nodes
from cobrems.kinematics import CONSTANTS, direction, superposition_geometry


def _inputs():
    cfg = superposition_geometry(300.0, math.radians(30.0))
    ps = np.stack([e.four_momentum for e in cfg.electrons])
    kd = direction(0.7, 0.2)
    dirs, _ = branch_nodes(ps[0, 1:], 80.0 * kd, 400.0, 16, 32)
    return ps, kd, dirs


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba backend not active")
def test_numba_matches_numpy():
    ps, kd, dirs = _inputs()
    a, qa = amplitude_table(ps, 80.0, kd, dirs, kernel=_kernels.branch_amplitudes)
    b, qb = amplitude_table(ps, 80.0, kd, dirs, kernel=_kernels.branch_amplitudes_np)
    np.testing.assert_allclose(qa, qb, rtol=1e-14)
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(b))


def test_numpy_kernel_zeroes_floor_nodes():
    ps, kd, dirs = _inputs()
    amp, q2 = amplitude_table(ps, 80.0, kd, dirs, q_min_sq=1e30, kernel=_kernels.branch_amplitudes_np)
    assert np.all(amp == 0) and np.all(q2 > 0)


def test_shapes():
    ps, kd, dirs = _inputs()
    amp, q2 = amplitude_table(ps, 80.0, kd, dirs)
    assert amp.shape == (len(dirs), 2, 2, 2, 2)
    assert q2.shape == (len(dirs), 2)
    assert CONSTANTS.m_e > 0
