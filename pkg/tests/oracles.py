"""Independent reference computations used by unit and acceptance tests.

These deliberately avoid the code paths under test: the characteristic
polynomial oracle goes through Leibniz expansion and companion-matrix
root finding, and the dense oracle goes through the QZ decomposition.
"""

import itertools

import numpy as np
import scipy.linalg


def _parity(perm):
    inversions = 0
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                inversions += 1
    return -1.0 if inversions % 2 else 1.0


def charpoly_max_eig(a, b):
    """Largest root of det(a - x b) = 0 via Leibniz expansion.

    Only sensible for small sizes (factorial cost). Roots of a Hermitian
    definite pencil are real; the imaginary parts are asserted small.
    """
    n = a.shape[0]
    total = np.zeros(n + 1, dtype=complex)
    for perm in itertools.permutations(range(n)):
        term = np.array([_parity(perm)], dtype=complex)
        for i, j in enumerate(perm):
            term = np.polymul(term, np.array([-b[i, j], a[i, j]]))
        total[n + 1 - len(term) :] += term
    roots = np.roots(total)
    assert np.max(np.abs(roots.imag)) <= 1e-6 * max(1.0, np.max(np.abs(roots)))
    return float(np.max(roots.real))


def qz_max_eig(a, b):
    """Largest generalized eigenvalue via the dense QZ decomposition."""
    values = scipy.linalg.eig(a, b, right=False)
    assert np.max(np.abs(values.imag)) <= 1e-6 * max(1.0, np.max(np.abs(values)))
    return float(np.max(values.real))


def random_pencil(rng, n, rank=None):
    """A random Hermitian PSD / PD pair of size n."""
    r = n if rank is None else rank
    x = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
    a = x @ x.conj().T
    y = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    b = y @ y.conj().T + n * np.eye(n)
    return a, b
