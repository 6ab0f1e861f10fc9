"""Polarization states of one and two photons.

Basis ordering is fixed here and used everywhere else: ``(H, V)`` for one
qubit and ``(HH, HV, VH, VV)`` for two, with H the first basis vector.
"""

from __future__ import annotations

import numpy as np

from .matcore import PSD_TOL, asymmetry, herm_eig

ONE_QUBIT_BASIS = ("H", "V")
TWO_QUBIT_BASIS = ("HH", "HV", "VH", "VV")
PAULI_BASIS = ("I", "X", "Y", "Z")

FAMILIES = ("phi", "psi")

_SQ2 = np.sqrt(2.0)
_SINGLE_KETS = {
    "H": np.array([1.0, 0.0], dtype=complex),
    "V": np.array([0.0, 1.0], dtype=complex),
    "D": np.array([1.0, 1.0], dtype=complex) / _SQ2,
    "A": np.array([1.0, -1.0], dtype=complex) / _SQ2,
    "R": np.array([1.0, 1.0j], dtype=complex) / _SQ2,
    "L": np.array([1.0, -1.0j], dtype=complex) / _SQ2,
}

# bit flip on the second photon maps HH->HV and VV->VH
FLIP_SECOND = np.kron(np.eye(2), np.array([[0, 1], [1, 0]], dtype=complex))


def ket(label: str) -> np.ndarray:
    """Product ket from a string of single-photon labels, e.g. ``"HV"`` or ``"DR"``."""
    try:
        out = _SINGLE_KETS[label[0]]
        for ch in label[1:]:
            out = np.kron(out, _SINGLE_KETS[ch])
    except (KeyError, IndexError):
        raise ValueError(f"unknown polarization label {label!r}") from None
    return out


def _check_family(family: str) -> None:
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}, got {family!r}")


def _check_epsilon(epsilon: float) -> None:
    if not np.isfinite(epsilon) or epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")


def _check_lambda(lam: float) -> None:
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")


def make_phi(epsilon: float) -> np.ndarray:
    """(eps|HH> + |VV>) / sqrt(1 + eps^2)."""
    _check_epsilon(epsilon)
    return np.array([epsilon, 0, 0, 1], dtype=complex) / np.sqrt(1 + epsilon**2)


def make_psi(epsilon: float) -> np.ndarray:
    """(eps|HV> + |VH>) / sqrt(1 + eps^2)."""
    _check_epsilon(epsilon)
    return np.array([0, epsilon, 1, 0], dtype=complex) / np.sqrt(1 + epsilon**2)


def make_pure(epsilon: float, family: str = "phi") -> np.ndarray:
    _check_family(family)
    return make_phi(epsilon) if family == "phi" else make_psi(epsilon)


def bell(family: str = "phi") -> np.ndarray:
    return make_pure(1.0, family)


def density_from_ket(k) -> np.ndarray:
    k = np.asarray(k, dtype=complex)
    norm = np.vdot(k, k).real
    if abs(norm - 1) > 1e-12:
        raise ValueError(f"ket is not normalized (norm^2 = {norm:.15g})")
    return np.outer(k, np.conj(k))


def validate_density(rho, tol: float = 1e-10) -> np.ndarray:
    """Check the density-matrix invariants and return ``rho`` as an array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape not in ((2, 2), (4, 4)):
        raise ValueError(f"density matrix must be 2x2 or 4x4, got {rho.shape}")
    asym = asymmetry(rho)
    if asym > tol:
        raise ValueError(f"density matrix not Hermitian (max asymmetry {asym:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1) > tol:
        raise ValueError(f"density matrix trace is {tr:.12g}, expected 1")
    wmin = herm_eig(rho)[0][-1]
    if wmin < -PSD_TOL:
        raise ValueError(f"density matrix has negative eigenvalue {wmin:.3e}")
    return rho


def relabel(rho: np.ndarray, family: str) -> np.ndarray:
    """Map a phi-form two-photon operator to its psi-form counterpart."""
    _check_family(family)
    if family == "phi":
        return rho
    return FLIP_SECOND @ rho @ FLIP_SECOND


def exact_elements(epsilon: float, lam: float, theta: float) -> list[float]:
    """The ten independent entries a1..a10 of the dephased phi-form state (unnormalized)."""
    s = 1 - np.sqrt(1 - lam)
    cs = np.cos(theta) ** 2 * np.sin(theta) ** 2
    s4 = np.sin(4 * theta)
    e = epsilon
    return [
        e**2 * (1 - 2 * cs * s),
        e / 4 * s4 * s,
        2 * cs * s,
        e**2 / 4 * s4 * s,
        2 * e * cs * s,
        e**2 / 2 * np.sin(2 * theta) ** 2 * s,
        e / 4 * (1 + 3 * np.sqrt(1 - lam) - s * np.cos(4 * theta)),
        -s4 * s / 4,
        -e / 4 * s4 * s,
        1 - 2 * cs * s,
    ]


def make_mixed_exact(epsilon: float, lam: float, theta: float = 0.0, family: str = "phi") -> np.ndarray:
    """State produced by the rotated phase-damping stage acting on the first photon.

    Built from the closed-form element layout; ``theta`` is the angle of the
    half-wave plates around the dephasing crystal.
    """
    _check_epsilon(epsilon)
    _check_lambda(lam)
    a1, a2, a3, a4, a5, a6, a7, a8, a9, a10 = exact_elements(epsilon, lam, theta)
    m = np.array(
        [
            [a1, a2, a4, a7],
            [a2, a3, a5, a8],
            [a4, a5, a6, a9],
            [a7, a8, a9, a10],
        ],
        dtype=complex,
    ) / (1 + epsilon**2)
    return relabel(m, family)


def make_mixed_approx(epsilon: float, lam: float, family: str = "phi") -> np.ndarray:
    """Low-order X-state approximation of the dephased state.

    Populations eps^2 and 1 on HH and VV (HV and VH for the psi family) and
    coherence eps*(1 - lam/2), all over 1 + eps^2.
    """
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    _check_lambda(lam)
    rho = _x_state(epsilon, epsilon * (1 - lam / 2))
    rho = relabel(rho, family)
    assert herm_eig(rho)[0][-1] >= -PSD_TOL
    return rho


def _x_state(epsilon: float, coherence: float) -> np.ndarray:
    n = 1 + epsilon**2
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = epsilon**2 / n
    rho[3, 3] = 1 / n
    rho[0, 3] = rho[3, 0] = coherence / n
    return rho


def depolarize(rho, weight: float) -> np.ndarray:
    """Mix ``rho`` with the maximally mixed state: ``(1 - w) rho + w I/d``."""
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"depolarizing weight must lie in [0, 1], got {weight}")
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    return (1 - weight) * rho + weight * np.eye(d) / d


def maximally_mixed(d: int = 4) -> np.ndarray:
    return np.eye(d, dtype=complex) / d


__all__ = [
    "ONE_QUBIT_BASIS",
    "TWO_QUBIT_BASIS",
    "PAULI_BASIS",
    "ket",
    "make_phi",
    "make_psi",
    "make_pure",
    "bell",
    "density_from_ket",
    "validate_density",
    "relabel",
    "make_mixed_exact",
    "make_mixed_approx",
    "depolarize",
    "maximally_mixed",
]
