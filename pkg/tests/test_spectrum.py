import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cobrems.cross_section import QuadratureSpec
from cobrems.kinematics import ElectronState
from cobrems.spectrum import (
    Axis,
    EmissionGrid,
    WidthUndefined,
    adcs_maps,
    adp_maps,
    angular_fwhm,
    peak_curve,
    peak_position,
    signed_to_spherical,
)

FAST = QuadratureSpec(16, 32, 1e-2, 0)


def test_gaussian_fwhm():
    x = np.linspace(-5, 5, 2001)
    sigma = 0.7
    y = np.exp(-0.5 * (x / sigma) ** 2)
    assert angular_fwhm(x, y) == pytest.approx(2 * math.sqrt(2 * math.log(2)) * sigma, rel=1e-5)


def test_fwhm_undefined_cases():
    x = np.linspace(0, 1, 11)
    with pytest.raises(WidthUndefined):
        angular_fwhm(x, np.ones_like(x))
    with pytest.raises(WidthUndefined):
        angular_fwhm(x, x + 1.0)  # maximum at the edge, no crossing below half
    y = np.exp(-((x - 0.5) ** 2) / 0.01)
    y[3] = np.nan
    with pytest.raises(WidthUndefined):
        angular_fwhm(x, y)
    with pytest.raises(ValueError):
        angular_fwhm(x[:2], y[:2])


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(1e-3, 1e3))
def test_fwhm_invariant_under_scaling(width, scale):
    x = np.linspace(-30, 30, 601)
    y = 1.0 / (1.0 + (x / width) ** 2)
    assert angular_fwhm(x, scale * y) == pytest.approx(angular_fwhm(x, y), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(-0.9, 0.9))
def test_quadratic_peak_recovered_exactly(x0):
    x = np.linspace(-1, 1, 21)
    y = 3.0 - 2.0 * (x - x0) ** 2
    assert peak_position(x, y) == pytest.approx(x0, abs=1e-12)


def test_peak_tie_takes_smaller_angle():
    x = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    y = np.array([0.0, 1.0, 0.0, 1.0, 0.0])
    assert peak_position(x, y) == pytest.approx(-1.0)
    assert peak_position(x[::-1], y[::-1]) == pytest.approx(-1.0)
    assert math.isnan(peak_position(x, np.full(5, np.nan)))


def test_signed_angles():
    assert signed_to_spherical(0.3, 0.0) == (0.3, 0.0)
    assert signed_to_spherical(-0.3, 0.0) == (0.3, math.pi)


def test_grid_validation_and_equality():
    a = Axis("a", np.array([1.0, 2.0]), "u")
    b = Axis("b", np.array([0.0, 1.0, 2.0]), "v")
    g = EmissionGrid(a, b, np.array([[1, np.nan, 3], [4, 5, 6]]), {"x": 1})
    assert g == EmissionGrid(a, b, g.values.copy(), {"x": 1})
    assert g.missing.sum() == 1
    with pytest.raises(ValueError):
        EmissionGrid(a, b, np.zeros((3, 2)))


def test_adcs_map_matches_pointwise_and_reverse_order(cfg200):
    thetas = np.radians([10.0, 40.0])
    phis = np.radians([0.0, 90.0, 180.0])
    g = adcs_maps(cfg200, 20.0, thetas, phis, ("coherent", "incoherent"), FAST)
    rev = adcs_maps(cfg200, 20.0, thetas[::-1], phis[::-1], ("coherent",), FAST)["coherent"]
    np.testing.assert_array_equal(rev.values[::-1, ::-1], g["coherent"].values)
    assert g["coherent"].metadata["kind"] == "adcs"
    assert g["coherent"].metadata["omega_kev"] == 20.0


def test_adp_map_missing_cells_and_mirror_symmetry(cfg200):
    omegas = np.array([50.0, 150.0, 250.0])  # 250 keV is above the 200 keV limit
    thetas = np.radians([-60.0, -20.0, 0.0, 20.0, 60.0])
    grids = adp_maps(cfg200, omegas, thetas, 0.0, ("coherent", "incoherent"), FAST)
    coh = grids["coherent"]
    assert np.all(coh.missing[2]) and not coh.missing[:2].any()
    assert coh.metadata["forbidden_points"] == 5
    # the x-z slice is mirror symmetric about the bisector
    np.testing.assert_allclose(coh.values[:2], coh.values[:2, ::-1], rtol=1e-10)
    curve = peak_curve(coh, grids["incoherent"])
    assert math.isnan(curve.coherent[2])
    assert curve.separation.shape == (3,)


def test_single_mode_map_from_electron():
    e = ElectronState(100.0, np.array([0.0, 0.0, 1.0]))
    g = adp_maps(e, [10.0], [-0.5, 0.5], modes=("single",), quad=FAST)["single"]
    assert g.values[0, 0] == pytest.approx(g.values[0, 1], rel=1e-10)
    with pytest.raises(ValueError):
        adp_maps(e, [10.0], [0.1, 0.2], modes=("coherent",), quad=FAST)


def test_non_monotone_axis_rejected(cfg200):
    with pytest.raises(ValueError):
        adcs_maps(cfg200, 10.0, [0.1, 0.1], [0.0], quad=FAST)
