"""Transmit waveform synthesis.

Two signal families are supported, both expressed as a linear map
``u_raw = G b`` from a symbol vector onto time samples:

* linearly modulated single-carrier signals, where ``G`` is a banded
  block-Toeplitz matrix of shifted pulse samples, and
* OFDM, where ``G`` is block diagonal with one inverse-DFT-like block
  per OFDM symbol.

The symbol period is the time unit throughout, so all durations are
expressed in symbol periods.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidRolloff, ZeroSignal

__all__ = [
    "BPSK",
    "QPSK",
    "CONSTELLATIONS",
    "LinearModFormat",
    "OfdmFormat",
    "TransmitRealization",
    "raised_cosine_pulse",
    "build_linear_g",
    "build_ofdm_g",
    "transmit_matrix",
    "draw_symbols",
    "synthesize_u",
]

BPSK = np.array([1.0 + 0.0j, -1.0 + 0.0j])
QPSK = np.array([1.0 + 1.0j, 1.0 - 1.0j, -1.0 + 1.0j, -1.0 - 1.0j]) / np.sqrt(2.0)

CONSTELLATIONS = {"bpsk": BPSK, "qpsk": QPSK}


def raised_cosine_pulse(rolloff: float, span_symbols: int, samples_per_symbol: int) -> np.ndarray:
    """Sample a raised cosine pulse on a symmetric grid.

    Parameters
    ----------
    rolloff : float
        Excess-bandwidth factor in [0, 1]. Zero gives a pure sinc.
    span_symbols : int
        Pulse duration in symbol periods.
    samples_per_symbol : int
        Samples per symbol period.

    Returns
    -------
    numpy.ndarray
        ``span_symbols * samples_per_symbol`` real samples taken at
        ``t_k = k / samples_per_symbol - span_symbols / 2``, so the peak
        sits at the center sample when the span is even.
    """
    if not 0.0 <= rolloff <= 1.0:
        raise InvalidRolloff(f"rolloff must be in [0, 1], got {rolloff}")
    if span_symbols < 1 or samples_per_symbol < 1:
        raise ValueError("span_symbols and samples_per_symbol must be >= 1")
    n = span_symbols * samples_per_symbol
    t = np.arange(n) / samples_per_symbol - span_symbols / 2.0
    num = np.sinc(t) * np.cos(np.pi * rolloff * t)
    den = 1.0 - (2.0 * rolloff * t) ** 2
    near = np.abs(den) <= 1e-8
    safe = np.where(near, 1.0, den)
    h = num / safe
    if rolloff > 0.0 and near.any():
        # removable singularity at t = +-1/(2 rolloff)
        h[near] = (np.pi / 4.0) * np.sinc(1.0 / (2.0 * rolloff))
    return h


@dataclass(frozen=True, eq=False)
class LinearModFormat:
    """Linearly modulated signal: a pulse train driven by symbols.

    Attributes
    ----------
    pulse : numpy.ndarray
        ``span_symbols * samples_per_symbol`` pulse samples.
    span_symbols : int
        Pulse duration in symbol periods.
    samples_per_symbol : int
        Samples per symbol period.
    symbols : int
        Number of symbol periods in one observation window.
    constellation : numpy.ndarray
        Finite symbol alphabet.
    """

    pulse: np.ndarray
    span_symbols: int
    samples_per_symbol: int
    symbols: int
    constellation: np.ndarray = field(default_factory=lambda: BPSK)

    def __post_init__(self):
        object.__setattr__(self, "pulse", np.asarray(self.pulse, dtype=np.complex128))
        object.__setattr__(
            self, "constellation", np.asarray(self.constellation, dtype=np.complex128)
        )
        if self.span_symbols < 1 or self.samples_per_symbol < 1 or self.symbols < 1:
            raise ValueError("span_symbols, samples_per_symbol and symbols must be >= 1")
        if self.pulse.shape != (self.span_symbols * self.samples_per_symbol,):
            raise ValueError("pulse length must equal span_symbols * samples_per_symbol")
        if self.constellation.size == 0:
            raise ValueError("constellation must be nonempty")

    @property
    def sample_count(self) -> int:
        return self.symbols * self.samples_per_symbol

    @property
    def symbol_count(self) -> int:
        # trailing pulses spill past the window, so the window sees
        # symbols + span_symbols - 1 of them
        return self.symbols + self.span_symbols - 1


@dataclass(frozen=True, eq=False)
class OfdmFormat:
    """OFDM signal: per-symbol multicarrier blocks with a guard offset.

    Attributes
    ----------
    subcarriers : int
        Subcarriers per OFDM symbol.
    samples_per_symbol : int
        Time samples per subcarrier slot; the OFDM symbol spans
        ``subcarriers * samples_per_symbol`` samples.
    symbols : int
        Number of OFDM symbols in one observation window.
    guard : float
        Guard duration as a fraction of the symbol period.
    useful : float
        Useful (data-carrying) duration; ``guard + useful`` is the
        symbol period, fixed to 1 by default.
    constellation : numpy.ndarray
        Finite symbol alphabet.
    """

    subcarriers: int
    samples_per_symbol: int
    symbols: int
    guard: float = 0.0
    useful: float = 1.0
    constellation: np.ndarray = field(default_factory=lambda: BPSK)

    def __post_init__(self):
        object.__setattr__(
            self, "constellation", np.asarray(self.constellation, dtype=np.complex128)
        )
        if self.subcarriers < 1 or self.samples_per_symbol < 1 or self.symbols < 1:
            raise ValueError("subcarriers, samples_per_symbol and symbols must be >= 1")
        if self.guard < 0.0 or self.useful <= 0.0:
            raise ValueError("guard must be >= 0 and useful > 0")
        if self.constellation.size == 0:
            raise ValueError("constellation must be nonempty")

    @property
    def sample_count(self) -> int:
        return self.symbols * self.subcarriers * self.samples_per_symbol

    @property
    def symbol_count(self) -> int:
        return self.symbols * self.subcarriers


SignalFormat = LinearModFormat | OfdmFormat


def build_linear_g(fmt: LinearModFormat) -> np.ndarray:
    """Banded block-Toeplitz synthesis matrix for a linear modulation.

    Row block ``r`` (one symbol period of samples) and column ``c`` hold
    pulse block ``c - r`` whenever ``0 <= c - r < span_symbols``; column
    ``c`` therefore carries the pulse launched ``c`` symbol periods
    before the window start.
    """
    p = fmt.samples_per_symbol
    blocks = fmt.pulse.reshape(fmt.span_symbols, p)
    g = np.zeros((fmt.sample_count, fmt.symbol_count), dtype=np.complex128)
    for r in range(fmt.symbols):
        for k in range(fmt.span_symbols):
            g[r * p : (r + 1) * p, r + k] = blocks[k]
    return g


def build_ofdm_g(fmt: OfdmFormat) -> np.ndarray:
    """Block diagonal synthesis matrix for OFDM.

    Each diagonal block maps the subcarrier symbols of one OFDM symbol
    onto its time samples; subcarrier ``l`` contributes
    ``exp(2j pi l (m Ts - guard) / useful)`` at sample ``m``.
    """
    ns, p = fmt.subcarriers, fmt.samples_per_symbol
    ts = (fmt.useful + fmt.guard) / (ns * p)
    m = np.arange(ns * p)[:, None]
    sub = np.arange(ns)[None, :]
    h = np.exp(2j * np.pi * sub * (m * ts - fmt.guard) / fmt.useful)
    return np.kron(np.eye(fmt.symbols), h)


def transmit_matrix(fmt: SignalFormat) -> np.ndarray:
    if isinstance(fmt, LinearModFormat):
        return build_linear_g(fmt)
    if isinstance(fmt, OfdmFormat):
        return build_ofdm_g(fmt)
    raise TypeError(f"unsupported format type {type(fmt).__name__}")


def draw_symbols(constellation: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` symbols uniformly from the alphabet."""
    if count < 0:
        raise ValueError("count must be >= 0")
    return constellation[rng.integers(0, len(constellation), size=count)]


@dataclass(frozen=True, eq=False)
class TransmitRealization:
    """One realized transmit waveform and the symbols that produced it."""

    symbols: np.ndarray
    samples: np.ndarray

    @property
    def sample_count(self) -> int:
        return self.samples.shape[0]


def synthesize_u(g: np.ndarray, b: np.ndarray) -> TransmitRealization:
    """Modulate symbols and rescale so the waveform energy equals its length.

    The returned samples satisfy ``||u||^2 = N`` exactly (up to float
    rounding), which pins the average per-sample power to 1 regardless
    of pulse overlap or symbol draw.
    """
    raw = g @ b
    nrm = float(np.linalg.norm(raw))
    if nrm <= 1e-300:
        raise ZeroSignal("symbol vector maps to a zero waveform")
    u = raw * (np.sqrt(g.shape[0]) / nrm)
    return TransmitRealization(symbols=np.asarray(b), samples=u)
