"""Phase retrieval of complex polynomials from 4N-4 intensity measurements."""
from .measurement import (
    AutocorrelationSpectrum,
    MeasurementSet,
    NodeSet,
    TrigPolynomial,
    autocorrelation_from_coefficients,
    autocorrelation_from_measurements,
    measure,
    measure_at_nodes,
    measure_general,
    roots_of_unity,
    to_uniform,
    trig_interpolate,
)
from .oracle import brute_force_reconstruct, injectivity_probe
from .poly import (
    Polynomial,
    canonical_phase,
    derivative,
    evaluate,
    global_phase_distance,
    random_polynomial,
)
from .reconstruct import (
    DeltaTable,
    ReconstructionError,
    SupportInfo,
    delta_recursion,
    detect_support,
    extract_coefficients,
    reconstruct,
)

__version__ = "0.1.0"
