"""GLRT target detection for passive MIMO radar with known signal formats.

A passive receiver listens to broadcast illuminators (single-carrier or
OFDM transmitters) through a surveillance channel and, optionally, a
reference channel per transmitter.  This package implements a family of
generalized likelihood ratio detectors that exploit increasing amounts
of waveform knowledge, the channel simulation needed to exercise them,
and Monte Carlo threshold calibration with deterministic parallelism.
"""

from ._version import __version__
from .channel import (
    Observations,
    ScenarioConfig,
    TransmitterObservation,
    draw_noise,
    draw_scaled_coeffs,
    load_observations,
    save_observations,
    simulate_observation,
)
from .detectors import (
    DEFAULT_ENUMERATION_CAP,
    DetectorContext,
    DetectorKind,
    FormatContext,
    evaluate_detector,
    mle_b_relaxed,
    mle_mu,
    mle_sigma2,
)
from .estimator import GlrtDetector
from .linalg import GenEigResult, cholesky, gen_eig_max, hermitian_eig_max, rayleigh_quotient
from .montecarlo import (
    ExperimentConfig,
    ExperimentResult,
    PdCurve,
    PdPoint,
    calibrate_threshold,
    curves_to_csv,
    estimate_pd,
    manifest_dict,
    run_experiment,
    threshold_from_statistics,
    trial_rng,
    verify_pf,
)
from .waveform import (
    BPSK,
    CONSTELLATIONS,
    QPSK,
    LinearModFormat,
    OfdmFormat,
    TransmitRealization,
    build_linear_g,
    build_ofdm_g,
    draw_symbols,
    raised_cosine_pulse,
    synthesize_u,
    transmit_matrix,
)

__all__ = [
    "__version__",
    "Observations",
    "ScenarioConfig",
    "TransmitterObservation",
    "draw_noise",
    "draw_scaled_coeffs",
    "load_observations",
    "save_observations",
    "simulate_observation",
    "DEFAULT_ENUMERATION_CAP",
    "DetectorContext",
    "DetectorKind",
    "FormatContext",
    "evaluate_detector",
    "mle_b_relaxed",
    "mle_mu",
    "mle_sigma2",
    "GlrtDetector",
    "GenEigResult",
    "cholesky",
    "gen_eig_max",
    "hermitian_eig_max",
    "rayleigh_quotient",
    "ExperimentConfig",
    "ExperimentResult",
    "PdCurve",
    "PdPoint",
    "calibrate_threshold",
    "curves_to_csv",
    "estimate_pd",
    "manifest_dict",
    "run_experiment",
    "threshold_from_statistics",
    "trial_rng",
    "verify_pf",
    "BPSK",
    "CONSTELLATIONS",
    "QPSK",
    "LinearModFormat",
    "OfdmFormat",
    "TransmitRealization",
    "build_linear_g",
    "build_ofdm_g",
    "draw_symbols",
    "raised_cosine_pulse",
    "synthesize_u",
    "transmit_matrix",
]
