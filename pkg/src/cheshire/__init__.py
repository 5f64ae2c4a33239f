"""Pre- and post-selected single-photon experiments with pointer readouts.

A four-dimensional (arm x circular polarisation) photon crosses a balanced
interferometer whose detection chain post-selects one state at detector D1.
The package computes weak values, conditional outcome distributions for
strong intermediate measurements, exact Gaussian pointer statistics for
weakly-through-strongly coupled probes, and reproducible Monte Carlo CCD
shot records, with a CLI on top.
"""

from .montecarlo import (
    Experiment,
    ExperimentAnalysis,
    InsufficientData,
    ShotRecord,
    SummaryStats,
    analyze,
    estimate,
    sample_shots,
    shot_generator,
)
from .optics import (
    Circuit,
    DetectionResult,
    Detector,
    ElementKind,
    OpticalElement,
    OutputMode,
    detector_projectors,
    element_unitary,
    postselected_state,
    run_interferometer,
    standard_circuit,
)
from .pointer import (
    Axis,
    CoupledState,
    DuplicateAxis,
    GaussianPointer,
    Moments,
    NullPostSelection,
    PointerMixture,
    couple,
    mixture_density,
    mixture_moments,
    postselect_pointer,
)
from .postselect import (
    ConditionalDistribution,
    ImpossibleOutcome,
    NoValidHistory,
    OrthogonalSelection,
    abl_distribution,
    collapse,
    sequential_distribution,
    weak_value,
)
from .qstate import (
    ATOL,
    BASIS,
    DIM,
    BasisLabel,
    Ket,
    SpectralObservable,
    SpectralViolation,
    apply,
    basis_index,
    basis_ket,
    canonical_observables,
    canonical_states,
    identity,
    inner,
    is_hermitian,
    is_projector,
    is_unitary,
    ket,
    normalize,
    observable_operator,
    validate_spectral,
)

__all__ = [
    "ATOL",
    "BASIS",
    "DIM",
    "Axis",
    "BasisLabel",
    "Circuit",
    "ConditionalDistribution",
    "CoupledState",
    "DetectionResult",
    "Detector",
    "DuplicateAxis",
    "ElementKind",
    "Experiment",
    "ExperimentAnalysis",
    "GaussianPointer",
    "ImpossibleOutcome",
    "InsufficientData",
    "Ket",
    "Moments",
    "NoValidHistory",
    "NullPostSelection",
    "OpticalElement",
    "OrthogonalSelection",
    "OutputMode",
    "PointerMixture",
    "ShotRecord",
    "SpectralObservable",
    "SpectralViolation",
    "SummaryStats",
    "abl_distribution",
    "analyze",
    "apply",
    "basis_index",
    "basis_ket",
    "canonical_observables",
    "canonical_states",
    "collapse",
    "couple",
    "detector_projectors",
    "element_unitary",
    "estimate",
    "identity",
    "inner",
    "is_hermitian",
    "is_projector",
    "is_unitary",
    "ket",
    "mixture_density",
    "mixture_moments",
    "normalize",
    "observable_operator",
    "postselect_pointer",
    "postselected_state",
    "run_interferometer",
    "sample_shots",
    "sequential_distribution",
    "shot_generator",
    "standard_circuit",
    "validate_spectral",
    "weak_value",
]
