"""Tree-level Bremsstrahlung of a two-momentum electron superposition off a static Coulomb field."""

__version__ = "0.1.0"

from .amplitude import (  # noqa: E402
    CHANNELS,
    NearSingularTransfer,
    SpinChannel,
    matrix_element,
    summed_square,
    superposition_element,
    trace_summed_square,
)
from .cross_section import (  # noqa: E402
    ConvergenceFailure,
    DifferentialCrossSection,
    QuadratureSpec,
    adcs,
    adcs_parts,
    adp,
)
from .kinematics import (  # noqa: E402
    CONSTANTS,
    ElectronState,
    KinematicallyForbidden,
    PhotonSpec,
    PhysicalConstants,
    SuperpositionConfig,
    build_final_state,
    final_electron_energy,
    superposition_geometry,
)
from .spectrum import (  # noqa: E402
    EmissionGrid,
    PeakCurve,
    WidthUndefined,
    adcs_map,
    adp_map,
    angular_fwhm,
    peak_curve,
)
