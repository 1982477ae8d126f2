"""Observation synthesis for the two-channel passive receiver.

Each transmitter contributes a surveillance channel block (target echo
plus noise, or noise alone) and, when the receiver has reference
antennas pointed at the transmitter, a reference channel block (direct
path plus noise).  Channel coefficient vectors are drawn isotropically
and rescaled so every trial hits its configured SNR or direct-path
ratio exactly, not just on average.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDraw, InterchangeError
from .waveform import SignalFormat, draw_symbols, synthesize_u, transmit_matrix

__all__ = [
    "ScenarioConfig",
    "TransmitterObservation",
    "Observations",
    "draw_scaled_coeffs",
    "draw_noise",
    "simulate_observation",
    "save_observations",
    "load_observations",
]


@dataclass(frozen=True)
class ScenarioConfig:
    """Geometry-free scenario description.

    Attributes
    ----------
    n_tx : int
        Number of transmitters (independent illuminators).
    n_rx : int
        Receive antennas per channel block.
    sigma2 : float
        Noise variance per complex sample.
    snr_db : float
        Target-path SNR in dB, defined as ``||mu_s||^2 / (n_rx sigma2)``.
    dnr_db : float
        Direct-path ratio in dB, same convention for ``mu_r``.
    hypothesis : str
        ``"H1"`` includes the target echo, ``"H0"`` leaves the
        surveillance channel as pure noise.  The direct path is present
        under both when the scenario has a reference channel.
    include_reference : bool
        Whether reference channel blocks are observed at all.
    """

    n_tx: int
    n_rx: int
    sigma2: float = 1.0
    snr_db: float = 0.0
    dnr_db: float = 0.0
    hypothesis: str = "H1"
    include_reference: bool = True

    def __post_init__(self):
        if self.n_tx < 1 or self.n_rx < 1:
            raise ValueError("n_tx and n_rx must be >= 1")
        if self.sigma2 <= 0.0:
            raise ValueError("sigma2 must be > 0")
        if self.hypothesis not in ("H0", "H1"):
            raise ValueError(f"hypothesis must be 'H0' or 'H1', got {self.hypothesis!r}")


@dataclass(frozen=True, eq=False)
class TransmitterObservation:
    """Channel blocks observed for one transmitter.

    ``surveillance`` and ``reference`` are ``(N, n_rx)`` sample blocks;
    ``tx_samples`` carries the true transmitted waveform for detectors
    that operate with full signal side information.
    """

    surveillance: np.ndarray
    reference: np.ndarray | None = None
    tx_samples: np.ndarray | None = None

    @property
    def stacked(self) -> np.ndarray:
        """Surveillance and reference blocks side by side."""
        if self.reference is None:
            raise ValueError("no reference channel in this observation")
        return np.concatenate([self.surveillance, self.reference], axis=1)

    @property
    def energy(self) -> float:
        """Total observed energy over both channel blocks."""
        e = float(np.linalg.norm(self.surveillance) ** 2)
        if self.reference is not None:
            e += float(np.linalg.norm(self.reference) ** 2)
        return e


@dataclass(frozen=True, eq=False)
class Observations:
    """One multistatic snapshot: per-transmitter channel blocks."""

    transmitters: tuple[TransmitterObservation, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.transmitters) == 0:
            raise ValueError("at least one transmitter observation is required")

    def __len__(self) -> int:
        return len(self.transmitters)

    def __iter__(self):
        return iter(self.transmitters)

    @property
    def has_reference(self) -> bool:
        return all(t.reference is not None for t in self.transmitters)

    @property
    def has_tx_samples(self) -> bool:
        return all(t.tx_samples is not None for t in self.transmitters)


def draw_scaled_coeffs(
    n_rx: int, level_db: float, sigma2: float, rng: np.random.Generator
) -> np.ndarray:
    """Isotropic channel vector rescaled to an exact power level.

    The direction is uniform on the complex sphere; the squared norm is
    forced to ``n_rx * sigma2 * 10^(level_db / 10)`` so the per-trial
    level never fluctuates with the draw.
    """
    for _ in range(8):
        mu = (rng.standard_normal(n_rx) + 1j * rng.standard_normal(n_rx)) / np.sqrt(2.0)
        nrm = float(np.linalg.norm(mu))
        if nrm > 1e-150:
            break
    else:  # pragma: no cover - probability ~0
        raise DegenerateDraw("repeated zero draws for a channel vector")
    target = np.sqrt(n_rx * sigma2 * 10.0 ** (level_db / 10.0))
    return mu * (target / nrm)


def draw_noise(n: int, n_rx: int, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Circular complex white noise block with variance sigma2 per sample."""
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be > 0")
    scale = np.sqrt(sigma2 / 2.0)
    return scale * (
        rng.standard_normal((n, n_rx)) + 1j * rng.standard_normal((n, n_rx))
    )


def simulate_observation(
    scenario: ScenarioConfig,
    formats: tuple[SignalFormat, ...],
    rng: np.random.Generator,
    *,
    transmit_matrices: tuple[np.ndarray, ...] | None = None,
    channel_coefficients=None,
    zero_noise: bool = False,
) -> Observations:
    """Draw one complete observation snapshot.

    Per transmitter, the draw order is fixed: symbols, then the target
    coefficient (under H1), then the direct-path coefficient (when the
    reference channel exists), then surveillance noise, then reference
    noise.  ``channel_coefficients`` and ``zero_noise`` are test hooks
    that substitute known values for the random parts.
    """
    if len(formats) != scenario.n_tx:
        raise ValueError("one signal format is required per transmitter")
    mats = (
        tuple(transmit_matrix(f) for f in formats)
        if transmit_matrices is None
        else transmit_matrices
    )
    out = []
    for i, (fmt, g) in enumerate(zip(formats, mats)):
        b = draw_symbols(fmt.constellation, g.shape[1], rng)
        u = synthesize_u(g, b).samples
        n = u.shape[0]
        if channel_coefficients is not None:
            mu_s, mu_r = channel_coefficients[i]
        else:
            mu_s = (
                draw_scaled_coeffs(scenario.n_rx, scenario.snr_db, scenario.sigma2, rng)
                if scenario.hypothesis == "H1"
                else None
            )
            mu_r = (
                draw_scaled_coeffs(scenario.n_rx, scenario.dnr_db, scenario.sigma2, rng)
                if scenario.include_reference
                else None
            )
        surv = np.zeros((n, scenario.n_rx), dtype=np.complex128)
        if mu_s is not None:
            surv += np.outer(u, mu_s)
        if not zero_noise:
            surv += draw_noise(n, scenario.n_rx, scenario.sigma2, rng)
        ref = None
        if scenario.include_reference:
            ref = np.outer(u, mu_r) if mu_r is not None else np.zeros_like(surv)
            if not zero_noise:
                ref = ref + draw_noise(n, scenario.n_rx, scenario.sigma2, rng)
        out.append(TransmitterObservation(surveillance=surv, reference=ref, tx_samples=u))
    return Observations(transmitters=tuple(out))


_FIELDS = ("surveillance", "reference", "tx")
_HEADER = ["field", "transmitter", "row", "col", "re", "im"]


def save_observations(obs: Observations, path) -> None:
    """Write an observation snapshot as a flat CSV of complex entries."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_HEADER)
        for i, tr in enumerate(obs):
            blocks = [("surveillance", tr.surveillance)]
            if tr.reference is not None:
                blocks.append(("reference", tr.reference))
            if tr.tx_samples is not None:
                blocks.append(("tx", tr.tx_samples.reshape(-1, 1)))
            for name, block in blocks:
                for r in range(block.shape[0]):
                    for c in range(block.shape[1]):
                        z = complex(block[r, c])
                        writer.writerow([name, i, r, c, repr(z.real), repr(z.imag)])


def load_observations(path) -> Observations:
    """Read a snapshot written by :func:`save_observations`.

    Raises
    ------
    InterchangeError
        On unknown fields, bad numbers, missing entries, or ragged
        blocks.
    """
    cells: dict[tuple[str, int], dict[tuple[int, int], complex]] = {}
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != _HEADER:
                raise InterchangeError(f"bad header {header!r}")
            for lineno, row in enumerate(reader, start=2):
                if len(row) != 6:
                    raise InterchangeError(f"line {lineno}: expected 6 columns")
                name, tx_s, r_s, c_s, re_s, im_s = row
                if name not in _FIELDS:
                    raise InterchangeError(f"line {lineno}: unknown field {name!r}")
                try:
                    tx, r, c = int(tx_s), int(r_s), int(c_s)
                    value = complex(float(re_s), float(im_s))
                except ValueError as exc:
                    raise InterchangeError(f"line {lineno}: {exc}") from exc
                cells.setdefault((name, tx), {})[(r, c)] = value
    except OSError as exc:
        raise InterchangeError(str(exc)) from exc

    def to_matrix(entries, what):
        rows = 1 + max(k[0] for k in entries)
        cols = 1 + max(k[1] for k in entries)
        if len(entries) != rows * cols:
            raise InterchangeError(f"{what}: missing entries")
        m = np.zeros((rows, cols), dtype=np.complex128)
        for (r, c), v in entries.items():
            m[r, c] = v
        return m

    n_tx = 1 + max((k[1] for k in cells), default=-1)
    if n_tx < 1:
        raise InterchangeError("file holds no observation entries")
    transmitters = []
    for i in range(n_tx):
        if ("surveillance", i) not in cells:
            raise InterchangeError(f"transmitter {i}: surveillance block missing")
        surv = to_matrix(cells[("surveillance", i)], f"transmitter {i} surveillance")
        ref = None
        if ("reference", i) in cells:
            ref = to_matrix(cells[("reference", i)], f"transmitter {i} reference")
            if ref.shape != surv.shape:
                raise InterchangeError(f"transmitter {i}: channel block shapes differ")
        tx = None
        if ("tx", i) in cells:
            tx = to_matrix(cells[("tx", i)], f"transmitter {i} tx").reshape(-1)
            if tx.shape[0] != surv.shape[0]:
                raise InterchangeError(f"transmitter {i}: tx length mismatch")
        transmitters.append(
            TransmitterObservation(surveillance=surv, reference=ref, tx_samples=tx)
        )
    return Observations(transmitters=tuple(transmitters))
