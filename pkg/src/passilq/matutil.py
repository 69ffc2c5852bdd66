"""Small dense linear-algebra helpers shared across the package.

Everything here is a thin wrapper over numpy/scipy with two concerns the
callers should not have to repeat: empty blocks (zero rows or columns occur
for systems with no input or no output) and Hermitian symmetrization.
"""

import numpy as np

from .errors import DimensionMismatch

__all__ = [
    "as_matrix",
    "herm",
    "herm_defect",
    "fro",
    "spec_norm",
    "min_eig_herm",
    "max_eig_herm",
    "pos_part",
    "require_shape",
]


def as_matrix(a, name="matrix"):
    """Coerce to a 2-d complex ndarray; raise DimensionMismatch otherwise."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-d, got ndim={arr.ndim}")
    return arr


def require_shape(a, shape, name="matrix"):
    if a.shape != tuple(shape):
        raise DimensionMismatch(f"{name} has shape {a.shape}, expected {tuple(shape)}")
    return a


def herm(a):
    """Hermitian part (A + A*)/2."""
    return 0.5 * (a + a.conj().T)


def herm_defect(a):
    """Frobenius norm of the skew part, zero iff A Hermitian."""
    return float(np.linalg.norm(a - a.conj().T))


def fro(a):
    return float(np.linalg.norm(a))


def spec_norm(a):
    """Spectral (2-) norm; empty blocks have norm zero."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def min_eig_herm(a):
    """Smallest eigenvalue of the Hermitian part; 0 for empty blocks."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(herm(a)).min())


def max_eig_herm(a):
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(herm(a)).max())


def pos_part(a):
    """Positive semidefinite part of a Hermitian matrix (negative eigenvalues clipped)."""
    a = np.asarray(a)
    if a.size == 0:
        return a.copy()
    w, v = np.linalg.eigh(herm(a))
    w = np.clip(w, 0.0, None)
    return (v * w) @ v.conj().T
