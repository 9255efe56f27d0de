"""Heralded hybrid and CV entanglement from squeezed vacuum and a delocalized photon."""

from .analytic import closed_hybrid_state, closed_summary, factors, parity_of, success_probability_closed
from .cascade import cascade_closed, cascade_numeric, factor_cv_state
from .entanglement import negativity_closed, schmidt_negativity
from .errors import (
    CutoffOverflow,
    DegenerateDelocalization,
    HeraldedError,
    InvalidParameter,
    NoRootInBracket,
    NormViolation,
    NumericalError,
    OutcomeBeyondCutoff,
    ValidationError,
    ZeroProbabilityOutcome,
)
from .fock import DelocalizedPhoton, FockAmplitudes, TwoModeAmplitudes, ThreeModeAmplitudes, smsv_amplitudes
from .herald import HeraldRecord, HybridState, herald_distribution, herald_hybrid_numeric
from .interferometer import BeamSplitter, apply_bs
from .search import OperatingPoint, ScanTable, scan_grid, solve_max_negativity, verify_reference_points

__version__ = "0.1.0"
