"""Scikit-learn style front end for the detector family.

``fit`` consumes target-absent observation snapshots and calibrates the
decision threshold at the configured false-alarm rate;
``decision_function`` scores snapshots; ``predict`` applies the
threshold.  One sample here is one complete multistatic snapshot
(an :class:`~passiveglrt.channel.Observations`), not a feature vector,
so only the estimator API shape is borrowed, not the array contract.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .channel import Observations
from .detectors import (
    DEFAULT_ENUMERATION_CAP,
    DetectorContext,
    DetectorKind,
    evaluate_detector,
)
from .montecarlo import threshold_from_statistics

__all__ = ["GlrtDetector"]


def _as_snapshot_list(x) -> list[Observations]:
    if isinstance(x, Observations):
        return [x]
    if isinstance(x, (list, tuple)) and all(isinstance(o, Observations) for o in x):
        return list(x)
    raise TypeError(
        "expected an Observations snapshot or a sequence of them, "
        f"got {type(x).__name__}"
    )


class GlrtDetector(BaseEstimator):
    """Threshold detector over multistatic observation snapshots.

    Parameters
    ----------
    kind : str or DetectorKind
        Which statistic to use; one of the DetectorKind names.
    formats : tuple
        Per-transmitter signal formats. Required by the format-aware
        kinds, optional for AMR/PMR/PSL plain variants.
    sigma2 : float
        Noise variance assumed by the statistics.
    pf_target : float
        False-alarm rate used by :meth:`fit` to place the threshold.
    enumeration_cap : int
        Candidate-count ceiling for the exact detector.

    Attributes
    ----------
    threshold_ : float
        Calibrated decision threshold, after :meth:`fit`.
    n_calibration_ : int
        Number of snapshots used for calibration.
    """

    def __init__(
        self,
        kind="PMR_RGLRT_K",
        formats=None,
        sigma2=1.0,
        pf_target=1e-2,
        enumeration_cap=DEFAULT_ENUMERATION_CAP,
    ):
        self.kind = kind
        self.formats = formats
        self.sigma2 = sigma2
        self.pf_target = pf_target
        self.enumeration_cap = enumeration_cap

    def _kind(self) -> DetectorKind:
        return self.kind if isinstance(self.kind, DetectorKind) else DetectorKind(self.kind)

    def _context(self, snapshots: list[Observations]) -> DetectorContext:
        kind = self._kind()
        n_tx = len(snapshots[0])
        if self.formats is not None:
            return DetectorContext.from_formats(
                tuple(self.formats), self.sigma2, self.enumeration_cap
            )
        if kind.needs_format:
            raise ValueError(f"{kind.value} requires formats")
        # plain variants never touch the synthesis matrices; a unit
        # placeholder context keeps the dispatcher signature uniform
        from .detectors import FormatContext

        unit = FormatContext.from_matrix(np.eye(1, dtype=np.complex128))
        return DetectorContext(
            contexts=(unit,) * n_tx,
            sigma2=float(self.sigma2),
            enumeration_cap=self.enumeration_cap,
        )

    def decision_function(self, X) -> np.ndarray:
        """Statistic value for each snapshot."""
        snapshots = _as_snapshot_list(X)
        ctx = self._context(snapshots)
        kind = self._kind()
        return np.array([evaluate_detector(kind, obs, ctx) for obs in snapshots])

    def fit(self, X, y=None):
        """Calibrate the threshold on target-absent snapshots."""
        snapshots = _as_snapshot_list(X)
        stats = self.decision_function(snapshots)
        self.threshold_ = threshold_from_statistics(stats, self.pf_target)
        self.n_calibration_ = len(snapshots)
        self.classes_ = np.array([0, 1])
        return self

    def predict(self, X) -> np.ndarray:
        """1 where the statistic exceeds the calibrated threshold."""
        if not hasattr(self, "threshold_"):
            raise ValueError("this GlrtDetector instance is not fitted yet")
        return (self.decision_function(X) > self.threshold_).astype(int)
