"""Hermitian eigenvalue utilities for detector statistics.

Everything here operates on complex matrices.  The central operation is
the largest eigenpair of the pencil (A, B) with A Hermitian PSD and B
Hermitian positive definite, which is reduced to an ordinary Hermitian
problem through the Cholesky factor of B.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConvergenceFailure, NotPositiveDefinite, ZeroVector

__all__ = [
    "GenEigResult",
    "cholesky",
    "hermitian_eig_max",
    "gen_eig_max",
    "rayleigh_quotient",
]

#: Relative asymmetry allowed before a matrix is rejected as non-Hermitian.
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class GenEigResult:
    """Largest eigenpair of a Hermitian pencil.

    Attributes
    ----------
    eigenvalue : float
        The largest generalized eigenvalue.  Real by construction.
    vector : numpy.ndarray
        The associated eigenvector, normalized so that ``v^H B v = 1``
        (``B = I`` for the ordinary problem) and phase-fixed so that its
        largest-magnitude entry is real and positive.
    """

    eigenvalue: float
    vector: np.ndarray


def _as_complex_matrix(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def _check_hermitian(a: np.ndarray, name: str) -> None:
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 0.0)
    if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL * scale:
        raise ValueError(f"{name} is not Hermitian within tolerance")


def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its largest-magnitude entry is real and positive.

    Makes eigenvectors deterministic across LAPACK builds; the rotation
    is a unit scalar, so norms are preserved.
    """
    i = int(np.argmax(np.abs(v)))
    pivot = v[i]
    mag = abs(pivot)
    if mag == 0.0:
        raise ZeroVector("cannot phase-fix the zero vector")
    out = v * (pivot.conjugate() / mag)
    out[i] = mag  # exact; the rotation only leaves roundoff here
    return out


def cholesky(b) -> np.ndarray:
    """Lower Cholesky factor of a Hermitian positive definite matrix.

    Parameters
    ----------
    b : array_like
        Hermitian matrix, shape ``(n, n)``.

    Returns
    -------
    numpy.ndarray
        Lower triangular ``L`` with ``b = L L^H`` and a real positive
        diagonal.

    Raises
    ------
    NotPositiveDefinite
        If any pivot falls at or below ``1e-12 * trace(b) / n``.  The
        trace-relative floor rejects matrices that are positive definite
        only up to roundoff.

    Examples
    --------
    >>> L = cholesky([[2.0, 1.0], [1.0, 2.0]])
    >>> np.allclose(L, [[2.0 ** 0.5, 0.0], [0.5 ** 0.5, 1.5 ** 0.5]])
    True
    """
    b = _as_complex_matrix(b, "b")
    _check_hermitian(b, "b")
    n = b.shape[0]
    pivot_floor = 1e-12 * float(np.trace(b).real) / n if n else 0.0
    low = np.zeros_like(b)
    for k in range(n):
        d = b[k, k].real - np.sum((low[k, :k] * low[k, :k].conj()).real)
        if d <= pivot_floor:
            raise NotPositiveDefinite(
                f"pivot {d:.3e} at index {k} is below the tolerance {pivot_floor:.3e}"
            )
        low[k, k] = np.sqrt(d)
        if k + 1 < n:
            low[k + 1 :, k] = (
                b[k + 1 :, k] - low[k + 1 :, :k] @ low[k, :k].conj()
            ) / low[k, k]
    return low


def hermitian_eig_max(a) -> GenEigResult:
    """Largest eigenpair of a Hermitian matrix.

    Parameters
    ----------
    a : array_like
        Hermitian matrix, shape ``(n, n)``.

    Returns
    -------
    GenEigResult
        Largest eigenvalue and unit-norm, phase-fixed eigenvector.
    """
    a = _as_complex_matrix(a, "a")
    _check_hermitian(a, "a")
    try:
        values, vectors = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise ConvergenceFailure(str(exc)) from exc
    return GenEigResult(float(values[-1]), _fix_phase(vectors[:, -1]))


def gen_eig_max(a, b) -> GenEigResult:
    """Largest eigenpair of the Hermitian pencil ``(a, b)``.

    Solves ``a v = lambda b v`` for the largest ``lambda`` by reducing to
    an ordinary Hermitian problem: with ``b = L L^H``, the matrix
    ``C = L^{-1} a L^{-H}`` has the same eigenvalues, and eigenvectors
    map back through ``v = L^{-H} w``.

    Parameters
    ----------
    a : array_like
        Hermitian matrix, shape ``(n, n)``.  PSD in all uses here, which
        makes the returned eigenvalue nonnegative up to roundoff.
    b : array_like
        Hermitian positive definite matrix, shape ``(n, n)``.

    Returns
    -------
    GenEigResult
        Largest generalized eigenvalue and eigenvector with
        ``v^H b v = 1``, phase-fixed.

    Raises
    ------
    NotPositiveDefinite
        If ``b`` fails the Cholesky pivot test.

    Examples
    --------
    >>> r = gen_eig_max([[2.0, 1.0], [1.0, 2.0]], [[1.0, 0.0], [0.0, 2.0]])
    >>> abs(r.eigenvalue - (3.0 + 3.0 ** 0.5) / 2.0) < 1e-12
    True
    """
    a = _as_complex_matrix(a, "a")
    b = _as_complex_matrix(b, "b")
    if a.shape != b.shape:
        raise ValueError("a and b must have the same shape")
    _check_hermitian(a, "a")
    low = cholesky(b)
    y = solve_triangular(low, a, lower=True)
    c = solve_triangular(low, y.conj().T, lower=True).conj().T
    c = 0.5 * (c + c.conj().T)
    top = hermitian_eig_max(c)
    vector = solve_triangular(low.conj().T, top.vector, lower=False)
    return GenEigResult(top.eigenvalue, _fix_phase(vector))


def rayleigh_quotient(a, b, w) -> float:
    """Generalized Rayleigh quotient ``(w^H a w) / (w^H b w)``.

    Raises
    ------
    ZeroVector
        If ``w`` is numerically zero.
    ValueError
        If the quadratic forms come out with an imaginary part larger
        than ``1e-10`` times the denominator, which indicates the inputs
        were not Hermitian.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128).reshape(-1)
    if float(np.linalg.norm(w)) <= 1e-300:
        raise ZeroVector("rayleigh_quotient needs a nonzero vector")
    num = complex(np.vdot(w, a @ w))
    den = complex(np.vdot(w, b @ w))
    if abs(num.imag) > 1e-10 * abs(den.real) or abs(den.imag) > 1e-10 * abs(den.real):
        raise ValueError("quadratic forms are not real; inputs must be Hermitian")
    return num.real / den.real
