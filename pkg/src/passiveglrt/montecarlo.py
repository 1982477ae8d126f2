"""Monte Carlo calibration and detection-probability estimation.

Thresholds are set empirically: run the detector on target-absent
trials, take the k-th largest statistic for a target false-alarm rate.
Detection probability is then the exceedance fraction on target-present
trials at each SNR grid point.

Determinism contract: the randomness of every trial is a pure function
of ``(seed, detector, phase, subphase, trial index)`` through a
counter-based generator, so results are byte-identical regardless of
worker count or execution order.  Distinct phases keep calibration,
false-alarm verification, and detection trials on disjoint streams.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._version import __version__
from .channel import ScenarioConfig, simulate_observation
from .detectors import (
    DEFAULT_ENUMERATION_CAP,
    DetectorContext,
    DetectorKind,
    evaluate_detector,
)
from .errors import PassiveGlrtError
from .waveform import SignalFormat

__all__ = [
    "PHASE_CALIBRATION",
    "PHASE_PF_CHECK",
    "PHASE_DETECTION",
    "ExperimentConfig",
    "PdPoint",
    "PdCurve",
    "ExperimentResult",
    "TrialEngine",
    "trial_rng",
    "threshold_from_statistics",
    "calibrate_threshold",
    "estimate_pd",
    "verify_pf",
    "run_experiment",
    "curves_to_csv",
    "manifest_dict",
]

PHASE_CALIBRATION = 0
PHASE_PF_CHECK = 1
PHASE_DETECTION = 2

RNG_IDENTITY = "philox4x64 via SeedSequence(seed, spawn_key=(detector, phase, subphase, trial))"

_DETECTOR_IDS = {kind: i for i, kind in enumerate(DetectorKind)}

_CHUNK = 256


def trial_rng(
    seed: int, detector_id: int, phase: int, subphase: int, trial_index: int
) -> np.random.Generator:
    """Independent generator for one trial, stable across runs and workers."""
    ss = np.random.SeedSequence(seed, spawn_key=(detector_id, phase, subphase, trial_index))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Full description of one detection-probability experiment."""

    scenario: ScenarioConfig
    formats: tuple[SignalFormat, ...]
    detectors: tuple[DetectorKind, ...]
    snr_grid_db: tuple[float, ...]
    pf_target: float
    trials_h0: int
    trials_h1: int
    seed: int
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP

    def __post_init__(self):
        object.__setattr__(self, "formats", tuple(self.formats))
        object.__setattr__(
            self,
            "detectors",
            tuple(d if isinstance(d, DetectorKind) else DetectorKind(d) for d in self.detectors),
        )
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))
        if len(self.formats) != self.scenario.n_tx:
            raise ValueError("one format per transmitter is required")
        if len(self.snr_grid_db) == 0:
            raise ValueError("snr_grid_db must be nonempty")
        if not 0.0 < self.pf_target < 1.0:
            raise ValueError("pf_target must be in (0, 1)")
        if self.trials_h0 < 1 or self.trials_h1 < 1:
            raise ValueError("trial counts must be >= 1")
        if int(self.pf_target * self.trials_h0) < 1:
            raise ValueError("pf_target * trials_h0 must be >= 1 for the threshold to exist")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


@dataclass(frozen=True)
class PdPoint:
    snr_db: float
    pd: float
    stderr: float

    def __post_init__(self):
        if not 0.0 <= self.pd <= 1.0:
            raise ValueError("pd must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class PdCurve:
    detector: DetectorKind
    threshold: float
    points: tuple[PdPoint, ...]
    trials_h0: int
    trials_h1: int
    seed: int
    dnr_db: float


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    curves: tuple[PdCurve, ...]
    failures: dict[str, str]
    elapsed_seconds: float
    config: ExperimentConfig

    @property
    def thresholds(self) -> dict[str, float]:
        return {c.detector.value: c.threshold for c in self.curves}


class TrialEngine:
    """Maps trial coordinates to one statistic value.

    Holds the per-transmitter precomputation (synthesis matrices and
    their factorizations) so repeated trials only pay for simulation
    and the small-side eigenvalue work.  Picklable, so worker processes
    receive a ready-made copy.
    """

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.detector_ctx = DetectorContext.from_formats(
            config.formats, config.scenario.sigma2, config.enumeration_cap
        )
        self.matrices = tuple(c.g for c in self.detector_ctx.contexts)

    def statistic(
        self,
        detector: DetectorKind,
        phase: int,
        subphase: int,
        trial_index: int,
        hypothesis: str,
        snr_db: float,
    ) -> float:
        rng = trial_rng(
            self.config.seed, _DETECTOR_IDS[detector], phase, subphase, trial_index
        )
        scen = replace(
            self.config.scenario,
            hypothesis=hypothesis,
            snr_db=snr_db,
            include_reference=detector.needs_reference,
        )
        obs = simulate_observation(
            scen, self.config.formats, rng, transmit_matrices=self.matrices
        )
        return evaluate_detector(detector, obs, self.detector_ctx)


def _chunk_worker(args):
    engine, detector_value, phase, subphase, hypothesis, snr_db, lo, hi = args
    detector = DetectorKind(detector_value)
    return [
        engine.statistic(detector, phase, subphase, t, hypothesis, snr_db)
        for t in range(lo, hi)
    ]


def _collect_statistics(
    engine: TrialEngine,
    detector: DetectorKind,
    phase: int,
    subphase: int,
    hypothesis: str,
    snr_db: float,
    n_trials: int,
    workers: int,
) -> np.ndarray:
    """All trial statistics for one (detector, phase, subphase) block.

    The trial set is split into fixed-size chunks independent of the
    worker count and reassembled in index order, so the returned array
    is identical for any ``workers`` value.
    """
    if workers <= 1:
        return np.array(
            [
                engine.statistic(detector, phase, subphase, t, hypothesis, snr_db)
                for t in range(n_trials)
            ]
        )
    spans = [(lo, min(lo + _CHUNK, n_trials)) for lo in range(0, n_trials, _CHUNK)]
    args = [
        (engine, detector.value, phase, subphase, hypothesis, snr_db, lo, hi)
        for lo, hi in spans
    ]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_chunk_worker, args))
    return np.array([v for part in parts for v in part])


def threshold_from_statistics(stats, pf_target: float) -> float:
    """k-th largest statistic with ``k = floor(pf_target * len(stats))``."""
    stats = np.asarray(stats, dtype=np.float64)
    if not 0.0 < pf_target <= 1.0:
        raise ValueError("pf_target must be in (0, 1]")
    k = int(pf_target * stats.shape[0])
    if k < 1:
        raise ValueError("pf_target * len(stats) must be >= 1")
    ordered = np.sort(stats)[::-1]
    return float(ordered[k - 1])


def calibrate_threshold(
    detector: DetectorKind, config: ExperimentConfig, workers: int = 1
) -> float:
    """Empirical threshold from ``trials_h0`` target-absent trials."""
    engine = TrialEngine(config)
    return _calibrate(engine, detector, workers)


def _calibrate(engine: TrialEngine, detector: DetectorKind, workers: int) -> float:
    config = engine.config
    stats = _collect_statistics(
        engine,
        detector,
        PHASE_CALIBRATION,
        0,
        "H0",
        config.snr_grid_db[0],
        config.trials_h0,
        workers,
    )
    return threshold_from_statistics(stats, config.pf_target)


def estimate_pd(
    detector: DetectorKind,
    threshold: float,
    config: ExperimentConfig,
    snr_index: int,
    workers: int = 1,
) -> PdPoint:
    """Exceedance fraction over ``trials_h1`` target-present trials."""
    engine = TrialEngine(config)
    return _estimate(engine, detector, threshold, snr_index, workers)


def _estimate(
    engine: TrialEngine,
    detector: DetectorKind,
    threshold: float,
    snr_index: int,
    workers: int,
) -> PdPoint:
    config = engine.config
    snr_db = config.snr_grid_db[snr_index]
    stats = _collect_statistics(
        engine,
        detector,
        PHASE_DETECTION,
        snr_index,
        "H1",
        snr_db,
        config.trials_h1,
        workers,
    )
    pd = float(np.mean(stats > threshold))
    stderr = float(np.sqrt(pd * (1.0 - pd) / config.trials_h1))
    return PdPoint(snr_db=snr_db, pd=pd, stderr=stderr)


def verify_pf(
    detector: DetectorKind,
    threshold: float,
    config: ExperimentConfig,
    workers: int = 1,
) -> float:
    """Empirical false-alarm rate on an H0 batch disjoint from calibration."""
    engine = TrialEngine(config)
    stats = _collect_statistics(
        engine,
        detector,
        PHASE_PF_CHECK,
        0,
        "H0",
        config.snr_grid_db[0],
        config.trials_h0,
        workers,
    )
    return float(np.mean(stats > threshold))


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Calibrate each detector once, then sweep the SNR grid.

    A detector that fails (rank-deficient format, oversize enumeration,
    degenerate draw) is recorded in ``failures`` and the remaining
    detectors still run.
    """
    start = time.perf_counter()
    engine = TrialEngine(config)
    curves = []
    failures: dict[str, str] = {}
    for detector in config.detectors:
        try:
            threshold = _calibrate(engine, detector, workers)
            points = tuple(
                _estimate(engine, detector, threshold, i, workers)
                for i in range(len(config.snr_grid_db))
            )
        except (PassiveGlrtError, ValueError) as exc:
            failures[detector.value] = f"{type(exc).__name__}: {exc}"
            continue
        curves.append(
            PdCurve(
                detector=detector,
                threshold=threshold,
                points=points,
                trials_h0=config.trials_h0,
                trials_h1=config.trials_h1,
                seed=config.seed,
                dnr_db=config.scenario.dnr_db,
            )
        )
    elapsed = time.perf_counter() - start
    return ExperimentResult(
        curves=tuple(curves), failures=failures, elapsed_seconds=elapsed, config=config
    )


def curves_to_csv(curves) -> str:
    """Render curves with full-precision floats, stable byte for byte."""
    lines = ["detector,snr_db,pd,stderr"]
    for curve in curves:
        for pt in curve.points:
            lines.append(
                f"{curve.detector.value},{pt.snr_db!r},{pt.pd!r},{pt.stderr!r}"
            )
    return "\n".join(lines) + "\n"


def _format_echo(fmt: SignalFormat) -> dict:
    from .waveform import LinearModFormat, OfdmFormat

    constellation = [[z.real, z.imag] for z in fmt.constellation.tolist()]
    if isinstance(fmt, LinearModFormat):
        return {
            "type": "linear",
            "span_symbols": fmt.span_symbols,
            "samples_per_symbol": fmt.samples_per_symbol,
            "symbols": fmt.symbols,
            "pulse": [[z.real, z.imag] for z in fmt.pulse.tolist()],
            "constellation": constellation,
        }
    if isinstance(fmt, OfdmFormat):
        return {
            "type": "ofdm",
            "subcarriers": fmt.subcarriers,
            "samples_per_symbol": fmt.samples_per_symbol,
            "symbols": fmt.symbols,
            "guard": fmt.guard,
            "useful": fmt.useful,
            "constellation": constellation,
        }
    raise TypeError(f"unsupported format type {type(fmt).__name__}")


def manifest_dict(result: ExperimentResult, config_echo: dict | None = None) -> dict:
    """Run manifest: everything needed to reproduce the run exactly."""
    config = result.config
    if config_echo is None:
        config_echo = {
            "scenario": {
                "n_tx": config.scenario.n_tx,
                "n_rx": config.scenario.n_rx,
                "sigma2": config.scenario.sigma2,
                "dnr_db": config.scenario.dnr_db,
            },
            "formats": [_format_echo(f) for f in config.formats],
            "detectors": [d.value for d in config.detectors],
            "snr_grid_db": list(config.snr_grid_db),
            "pf_target": config.pf_target,
            "trials_h0": config.trials_h0,
            "trials_h1": config.trials_h1,
            "seed": config.seed,
        }
    return {
        "version": __version__,
        "rng": RNG_IDENTITY,
        "seed": config.seed,
        "thresholds": result.thresholds,
        "wall_time_seconds": result.elapsed_seconds,
        "failures": result.failures,
        "config": config_echo,
    }
