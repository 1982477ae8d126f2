"""Detection statistics for multistatic passive receivers.

All detectors decide between target-absent and target-present from the
same two-channel observations, but differ in how much they know about
the transmitted waveforms:

* ``AMR_GLRT`` knows each transmitted sample exactly (active-radar style
  side information) and matched-filters against it.
* ``PMR_GLRT`` / ``PSL_GLRT`` know nothing beyond "the waveform is some
  rank-one direction" and score the top eigenvalue of the data Gram,
  with (PMR) or without (PSL) a reference channel.
* ``PMR_RGLRT_K`` / ``PSL_RGLRT_K`` / ``PMR_RGLRT_UK`` know the signal
  format (pulse or OFDM structure, i.e. the synthesis matrix G) but not
  the symbols; the finite alphabet is relaxed to arbitrary complex
  vectors, turning the symbol fit into a generalized eigenvalue problem
  over the pencil (G^H phi phi^H G, G^H G).  The UK variant additionally
  treats the noise level as unknown and becomes a ratio of residual
  energies.
* ``PMR_GLRT_K_EXACT`` keeps the finite alphabet and enumerates it.

Statistics are additive over transmitters.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import solve_triangular

from .channel import Observations
from .errors import (
    DegenerateDenominator,
    NegativeResidual,
    SearchSpaceTooLarge,
    ZeroSignal,
)
from .linalg import cholesky, gen_eig_max
from .waveform import SignalFormat, transmit_matrix

__all__ = [
    "DetectorKind",
    "FormatContext",
    "DetectorContext",
    "DEFAULT_ENUMERATION_CAP",
    "mle_mu",
    "mle_b_relaxed",
    "mle_sigma2",
    "amr_glrt",
    "pmr_glrt",
    "psl_glrt",
    "pmr_rglrt_k",
    "psl_rglrt_k",
    "pmr_rglrt_uk",
    "pmr_glrt_k_exact",
    "symbol_candidates",
    "evaluate_detector",
]

DEFAULT_ENUMERATION_CAP = 1 << 16


class DetectorKind(enum.Enum):
    """Identifiers for the implemented detection statistics."""

    AMR_GLRT = "AMR_GLRT"
    PMR_GLRT = "PMR_GLRT"
    PSL_GLRT = "PSL_GLRT"
    PMR_RGLRT_K = "PMR_RGLRT_K"
    PSL_RGLRT_K = "PSL_RGLRT_K"
    PMR_RGLRT_UK = "PMR_RGLRT_UK"
    PMR_GLRT_K_EXACT = "PMR_GLRT_K_EXACT"

    @property
    def needs_reference(self) -> bool:
        """Whether the statistic reads the reference channel blocks."""
        return self in (
            DetectorKind.PMR_GLRT,
            DetectorKind.PMR_RGLRT_K,
            DetectorKind.PMR_RGLRT_UK,
            DetectorKind.PMR_GLRT_K_EXACT,
        )

    @property
    def needs_format(self) -> bool:
        """Whether the statistic uses the signal synthesis matrix."""
        return self in (
            DetectorKind.PMR_RGLRT_K,
            DetectorKind.PSL_RGLRT_K,
            DetectorKind.PMR_RGLRT_UK,
            DetectorKind.PMR_GLRT_K_EXACT,
        )

    @property
    def needs_tx_samples(self) -> bool:
        """Whether the statistic needs the true transmitted waveform."""
        return self is DetectorKind.AMR_GLRT


def _top_gram_eig(x: np.ndarray) -> float:
    """Largest eigenvalue of ``x^H x``, computed on the smaller Gram side."""
    n, r = x.shape
    m = x.conj().T @ x if r <= n else x @ x.conj().T
    m = 0.5 * (m + m.conj().T)
    if m.shape[0] == 0:
        return 0.0
    return float(np.linalg.eigvalsh(m)[-1])


@dataclass(frozen=True, eq=False)
class FormatContext:
    """Per-transmitter precomputation for format-aware detectors.

    Holds the synthesis matrix ``g``, its Gram ``g^H g``, the Gram's
    lower Cholesky factor and that factor's inverse.  With
    ``X = L^{-1} g^H phi``, the top eigenvalue of the detector pencil
    ``(g^H phi phi^H g, g^H g)`` equals the top eigenvalue of ``X^H X``,
    which lives on the small receive-channel side.
    """

    g: np.ndarray
    gram: np.ndarray
    chol_lower: np.ndarray
    whitener: np.ndarray
    constellation: np.ndarray | None = None

    @classmethod
    def from_matrix(cls, g: np.ndarray, constellation: np.ndarray | None = None):
        g = np.asarray(g, dtype=np.complex128)
        gram = g.conj().T @ g
        gram = 0.5 * (gram + gram.conj().T)
        low = cholesky(gram)  # NotPositiveDefinite for rank-deficient formats
        whitener = solve_triangular(low, np.eye(low.shape[0], dtype=np.complex128), lower=True)
        return cls(g=g, gram=gram, chol_lower=low, whitener=whitener, constellation=constellation)

    @classmethod
    def from_format(cls, fmt: SignalFormat):
        return cls.from_matrix(transmit_matrix(fmt), fmt.constellation)

    @cached_property
    def gh(self) -> np.ndarray:
        return self.g.conj().T

    def whiten(self, phi: np.ndarray) -> np.ndarray:
        return self.whitener @ (self.gh @ phi)

    def pencil_top(self, phi: np.ndarray) -> float:
        """Top eigenvalue of the pencil ``(g^H phi phi^H g, g^H g)``."""
        return _top_gram_eig(self.whiten(phi))


@dataclass(frozen=True, eq=False)
class DetectorContext:
    """Everything detectors need beyond the observation itself."""

    contexts: tuple[FormatContext, ...]
    sigma2: float
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP

    def __post_init__(self):
        if self.sigma2 <= 0.0:
            raise ValueError("sigma2 must be > 0")

    @classmethod
    def from_formats(
        cls,
        formats: tuple[SignalFormat, ...],
        sigma2: float,
        enumeration_cap: int = DEFAULT_ENUMERATION_CAP,
    ):
        return cls(
            contexts=tuple(FormatContext.from_format(f) for f in formats),
            sigma2=float(sigma2),
            enumeration_cap=enumeration_cap,
        )


def mle_mu(g: np.ndarray, b: np.ndarray, s: np.ndarray) -> complex:
    """Closed-form channel coefficient fit for one receive channel.

    For the model ``s = mu g b + noise`` with known symbols, the
    likelihood is maximized by ``mu = (g b)^H s / ||g b||^2``.
    """
    gb = g @ b
    energy = float(np.real(np.vdot(gb, gb)))
    if energy <= 1e-300:
        raise ZeroSignal("g b has zero energy, mu is unidentifiable")
    return complex(np.vdot(gb, s) / energy)


def mle_b_relaxed(g: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Relaxed symbol fit: the top generalized eigenvector.

    Dropping the finite-alphabet constraint, the concentrated likelihood
    over all receive channels is the generalized Rayleigh quotient
    ``||phi^H g b||^2 / ||g b||^2``, maximized by the top eigenvector of
    the pencil ``(g^H phi phi^H g, g^H g)``.
    """
    gh = np.asarray(g).conj().T
    m = gh @ phi
    a = m @ m.conj().T
    a = 0.5 * (a + a.conj().T)
    gram = gh @ g
    gram = 0.5 * (gram + gram.conj().T)
    return gen_eig_max(a, gram).vector


def mle_sigma2(residual_terms, normalizer: float) -> float:
    """Noise variance fit from per-transmitter residual energies."""
    terms = np.asarray(residual_terms, dtype=np.float64)
    if normalizer <= 0.0:
        raise ValueError("normalizer must be > 0")
    if terms.size and float(terms.min()) < -1e-9:
        raise NegativeResidual(f"residual term {terms.min():.3e} is negative")
    return float(terms.sum() / normalizer)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


def amr_glrt(obs: Observations, sigma2: float) -> float:
    """Matched-filter statistic with fully known transmit waveforms.

    ``sum_ij |u_i^H s_ij|^2 / sigma2`` over transmitters i and receive
    channels j of the surveillance block.
    """
    _require(obs.has_tx_samples, "AMR_GLRT needs the transmitted waveforms")
    total = 0.0
    for tr in obs:
        total += float(np.sum(np.abs(tr.surveillance.conj().T @ tr.tx_samples) ** 2))
    return total / sigma2


def pmr_glrt(obs: Observations, sigma2: float) -> float:
    """Unstructured-waveform statistic with a reference channel.

    Difference of top data-Gram eigenvalues between the stacked
    (surveillance plus reference) blocks and the reference blocks alone:
    the reference term removes the score the direct path would earn
    under target-absent.
    """
    _require(obs.has_reference, "PMR_GLRT needs reference channel blocks")
    total = 0.0
    for tr in obs:
        total += _top_gram_eig(tr.stacked) - _top_gram_eig(tr.reference)
    return total / sigma2


def psl_glrt(obs: Observations, sigma2: float) -> float:
    """Unstructured-waveform statistic without a reference channel."""
    total = 0.0
    for tr in obs:
        total += _top_gram_eig(tr.surveillance)
    return total / sigma2


def pmr_rglrt_k(obs: Observations, contexts: tuple[FormatContext, ...], sigma2: float) -> float:
    """Format-aware relaxed statistic with a reference channel.

    Like :func:`pmr_glrt` but the candidate waveforms are constrained to
    the format's column space: top pencil eigenvalues replace top Gram
    eigenvalues.
    """
    _require(obs.has_reference, "PMR_RGLRT_K needs reference channel blocks")
    total = 0.0
    for tr, ctx in zip(obs, contexts):
        x = ctx.whiten(tr.stacked)
        n_rx = tr.reference.shape[1]
        total += _top_gram_eig(x) - _top_gram_eig(x[:, -n_rx:])
    return total / sigma2


def psl_rglrt_k(obs: Observations, contexts: tuple[FormatContext, ...], sigma2: float) -> float:
    """Format-aware relaxed statistic without a reference channel."""
    total = 0.0
    for tr, ctx in zip(obs, contexts):
        total += ctx.pencil_top(tr.surveillance)
    return total / sigma2


def pmr_rglrt_uk(obs: Observations, contexts: tuple[FormatContext, ...]) -> float:
    """Format-aware relaxed statistic with unknown noise level.

    Ratio of the residual energies left after the best rank-one format
    fit to the reference blocks alone (numerator) versus to the stacked
    blocks (denominator).  Scale-invariant, so no sigma2 enters; always
    at least 1 because the stacked fit can only absorb more energy.
    """
    _require(obs.has_reference, "PMR_RGLRT_UK needs reference channel blocks")
    num = 0.0
    den = 0.0
    total_energy = 0.0
    for tr, ctx in zip(obs, contexts):
        energy = tr.energy
        total_energy += energy
        x = ctx.whiten(tr.stacked)
        n_rx = tr.reference.shape[1]
        num += energy - _top_gram_eig(x[:, -n_rx:])
        den += energy - _top_gram_eig(x)
    if den <= 1e-12 * total_energy:
        raise DegenerateDenominator(
            "stacked-fit residual is numerically zero; the ratio statistic is undefined"
        )
    return num / den


_CANDIDATE_CACHE: dict[tuple[bytes, int], np.ndarray] = {}


def symbol_candidates(constellation: np.ndarray, count: int, cap: int) -> np.ndarray:
    """All symbol vectors of the given length, one per column.

    Raises
    ------
    SearchSpaceTooLarge
        If the alphabet size to the power ``count`` exceeds ``cap``.
    """
    total = len(constellation) ** count
    if total > cap:
        raise SearchSpaceTooLarge(
            f"{len(constellation)}^{count} = {total} candidate vectors exceed the cap {cap}"
        )
    key = (constellation.tobytes(), count)
    cached = _CANDIDATE_CACHE.get(key)
    if cached is None:
        cached = np.array(
            list(itertools.product(constellation, repeat=count)), dtype=np.complex128
        ).T.reshape(count, total)
        _CANDIDATE_CACHE[key] = cached
    return cached


def pmr_glrt_k_exact(
    obs: Observations,
    contexts: tuple[FormatContext, ...],
    sigma2: float,
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP,
) -> float:
    """Exhaustive finite-alphabet statistic with a reference channel.

    The relaxation-free counterpart of :func:`pmr_rglrt_k`: for each
    transmitter the best projection score
    ``max_b ||phi^H g b||^2 / ||g b||^2`` is found by enumerating every
    symbol vector in the alphabet, independently for the stacked and the
    reference blocks.
    """
    _require(obs.has_reference, "PMR_GLRT_K_EXACT needs reference channel blocks")
    total = 0.0
    for tr, ctx in zip(obs, contexts):
        _require(ctx.constellation is not None, "exact search needs the format alphabet")
        cand = symbol_candidates(ctx.constellation, ctx.g.shape[1], enumeration_cap)
        den = np.einsum("kt,kl,lt->t", cand.conj(), ctx.gram, cand).real
        w = tr.stacked.conj().T @ ctx.g
        scores = np.abs(w @ cand) ** 2
        n_rx = tr.reference.shape[1]
        total += float(np.max(scores.sum(axis=0) / den))
        total -= float(np.max(scores[-n_rx:].sum(axis=0) / den))
    return total / sigma2


def evaluate_detector(kind: DetectorKind, obs: Observations, ctx: DetectorContext) -> float:
    """Dispatch one observation snapshot to the requested statistic."""
    _require(
        len(obs) == len(ctx.contexts),
        "observation and context disagree on the transmitter count",
    )
    if kind is DetectorKind.AMR_GLRT:
        return amr_glrt(obs, ctx.sigma2)
    if kind is DetectorKind.PMR_GLRT:
        return pmr_glrt(obs, ctx.sigma2)
    if kind is DetectorKind.PSL_GLRT:
        return psl_glrt(obs, ctx.sigma2)
    if kind is DetectorKind.PMR_RGLRT_K:
        return pmr_rglrt_k(obs, ctx.contexts, ctx.sigma2)
    if kind is DetectorKind.PSL_RGLRT_K:
        return psl_rglrt_k(obs, ctx.contexts, ctx.sigma2)
    if kind is DetectorKind.PMR_RGLRT_UK:
        return pmr_rglrt_uk(obs, ctx.contexts)
    if kind is DetectorKind.PMR_GLRT_K_EXACT:
        return pmr_glrt_k_exact(obs, ctx.contexts, ctx.sigma2, ctx.enumeration_cap)
    raise ValueError(f"unknown detector {kind!r}")
