import os
import subprocess
import sys

import pytest

from cobrems.cli import main
from cobrems.kinematics import CONSTANTS, PhysicalConstants
from cobrems.validation import validate


@pytest.fixture(scope="module")
def quick_report():
    return validate("quick", 42)


def test_quick_validation_passes(quick_report):
    assert quick_report.passed, quick_report.text()
    names = [c.name for c in quick_report.checks]
    for needed in ("ward_identity", "spinor_vs_trace_oracle", "xi_average_equals_incoherent",
                   "mirror_symmetry", "quadrature_doubling"):
        assert needed in names


def test_tamper_mass_breaks_only_the_snapshot():
    report = validate("quick", 42, PhysicalConstants(m_e=CONSTANTS.m_e * 1.01))
    failed = {c.name for c in report.checks if not c.passed}
    assert failed == {"golden_spectrum_snapshot"}


def test_unknown_level():
    with pytest.raises(ValueError):
        validate("medium")


def test_validate_cli_writes_report(tmp_path, quick_report):
    out = tmp_path / "r.txt"
    assert main(["validate", "--level", "quick", "--seed", "42", "--out", str(out)]) == 0
    assert out.read_text() == quick_report.text()


def _report_bytes(threads, tmp_path, backend=None):
    env = dict(os.environ, COBREMS_NUM_THREADS=str(threads), NUMBA_NUM_THREADS="4")
    if backend:
        env["COBREMS_BACKEND"] = backend
    out = tmp_path / f"r{threads}{backend or ''}.txt"
    subprocess.run(
        [sys.executable, "-m", "cobrems", "validate", "--level", "quick", "--seed", "7", "--out", str(out)],
        env=env, check=True, capture_output=True,
    )
    return out.read_bytes()


def test_report_independent_of_worker_count(tmp_path):
    assert _report_bytes(1, tmp_path) == _report_bytes(4, tmp_path)
