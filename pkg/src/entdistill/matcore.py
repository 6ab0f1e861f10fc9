"""Small dense complex matrix primitives.

Matrices are plain ``numpy`` complex128 arrays.  Everything here is meant for
2x2 and 4x4 operators; nothing is tuned for large dimensions.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9
JACOBI_TOL = 1e-14
EIG_FLOOR = 1e-15
MAX_SWEEPS = 100
MAX_DIM = 16


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise ValueError(f"matrix dimension {a.shape[0]} exceeds {MAX_DIM}")
    return a


def dag(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def asymmetry(m: np.ndarray) -> float:
    """Largest ``|M[i, j] - conj(M[j, i])|``."""
    return float(np.max(np.abs(m - dag(m)))) if m.size else 0.0


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    return asymmetry(as_matrix(m)) <= tol


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + dag(m))


def trace(m) -> complex:
    return complex(np.trace(as_matrix(m)))


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def frobenius(m) -> float:
    return float(np.linalg.norm(np.asarray(m), "fro"))


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def herm_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with ``w`` real and sorted in descending order and the
    eigenvectors as the columns of the unitary ``V``, so that
    ``M = V @ diag(w) @ V^dagger``.
    """
    a = as_matrix(m).copy()
    asym = asymmetry(a)
    if asym > HERMITIAN_TOL:
        raise ValueError(f"matrix is not Hermitian (max asymmetry {asym:.3e})")
    a = hermitize(a)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, frobenius(a))

    for _ in range(MAX_SWEEPS):
        if _off_norm(a) < JACOBI_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                # phase-strip the pivot, then a real plane rotation zeroes it
                theta = 0.5 * np.arctan2(2.0 * r, (a[q, q] - a[p, p]).real)
                c, s = np.cos(theta), np.sin(theta)
                w = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ w
                a[idx, :] = dag(w) @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ w
    else:
        raise RuntimeError("Jacobi eigensolver did not converge")

    evals = np.real(np.diag(a))
    order = np.argsort(-evals, kind="stable")
    return evals[order], v[:, order]


def eigvalsh_desc(m) -> np.ndarray:
    return herm_eig(m)[0]


def psd_project(m) -> tuple[np.ndarray, float]:
    """Zero the negative eigenvalues of a Hermitian matrix.

    Returns the projected matrix and the removed negative mass.
    """
    w, v = herm_eig(m)
    neg = float(-np.sum(w[w < 0]))
    w = np.clip(w, 0.0, None)
    return hermitize((v * w) @ dag(v)), neg


def psd_sqrt(m) -> np.ndarray:
    w, v = herm_eig(m)
    if w[-1] < -PSD_TOL:
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {w[-1]:.3e})")
    # eigenvalues at round-off level are zeros; their square roots would not be
    w = np.where(w > EIG_FLOOR * max(1.0, w[0]), w, 0.0)
    return (v * np.sqrt(w)) @ dag(v)
