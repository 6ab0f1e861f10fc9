"""Single-photon Kraus channels: the partial polarizer filter and the
rotated phase-damping preparation stage, plus their Pauli-basis chi matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matcore import HERMITIAN_TOL, asymmetry, dag, herm_eig
from .states import _check_family, _check_lambda, relabel

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, X, Y, Z)

TP_TOL = 1e-10
FILTERED_TOL = 1e-12


@dataclass(frozen=True)
class KrausChannel:
    operators: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        if not ops:
            raise ValueError("a Kraus channel needs at least one operator")
        shape = ops[0].shape
        if any(k.shape != shape or k.shape[0] != k.shape[1] for k in ops):
            raise ValueError("Kraus operators must be square and of equal shape")
        gap = np.eye(shape[0]) - self.completeness(ops)
        wmin = herm_eig(gap)[0][-1]
        if wmin < -TP_TOL:
            raise ValueError(f"sum of K^dagger K exceeds identity (min eigenvalue of I - sum {wmin:.3e})")
        object.__setattr__(self, "operators", ops)

    @staticmethod
    def completeness(ops) -> np.ndarray:
        return sum(dag(k) @ k for k in ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @property
    def trace_preserving(self) -> bool:
        s = self.completeness(self.operators)
        return np.linalg.norm(s - np.eye(self.dim)) <= TP_TOL

    def __call__(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return sum(k @ rho @ dag(k) for k in self.operators)


def identity_channel() -> KrausChannel:
    return KrausChannel((I2,))


def unitary_channel(u) -> KrausChannel:
    return KrausChannel((np.asarray(u, dtype=complex),))


def _check_transmission(name: str, t: float) -> None:
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {t}")


def partial_polarizer(t_v: float, t_h: float = 1.0) -> KrausChannel:
    """Polarization-dependent attenuator, single Kraus operator diag(sqrt(t_h), sqrt(t_v))."""
    _check_transmission("t_v", t_v)
    _check_transmission("t_h", t_h)
    return KrausChannel((np.diag([np.sqrt(t_h), np.sqrt(t_v)]).astype(complex),))


def hwp(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [s, -c]], dtype=complex)


def phase_damping(theta: float, lam: float) -> KrausChannel:
    """Dephasing crystal between two half-wave plates at angle ``theta``.

    Dephasing of strength ``lam`` happens in the basis selected by the plate;
    the channel is trace preserving.
    """
    _check_lambda(lam)
    u = hwp(theta)
    u_inv = np.linalg.inv(u)
    e1 = u_inv @ np.diag([1.0, np.sqrt(1 - lam)]) @ u
    e2 = u_inv @ np.diag([0.0, np.sqrt(lam)]) @ u
    return KrausChannel((e1, e2))


def lift(op: np.ndarray, arm: str) -> np.ndarray:
    if arm == "first":
        return np.kron(op, I2)
    if arm == "second":
        return np.kron(I2, op)
    raise ValueError(f"arm must be 'first' or 'second', got {arm!r}")


def apply_local(ch: KrausChannel, rho, arm: str = "first") -> tuple[np.ndarray, float]:
    """Apply a one-photon channel to one arm of a two-photon state.

    Returns the renormalized output and the heralding (success) probability,
    i.e. the trace before renormalization.
    """
    if ch.dim != 2:
        raise ValueError("apply_local expects a single-qubit channel")
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"apply_local expects a two-qubit state, got shape {rho.shape}")
    out = sum(lift(k, arm) @ rho @ dag(lift(k, arm)) for k in ch.operators)
    p = float(np.trace(out).real)
    if p <= FILTERED_TOL:
        raise ValueError(f"state fully filtered by channel (transmission probability {p:.3e})")
    return out / p, p


def distilled_analytic(epsilon: float, lam: float, t_v: float, t_h: float = 1.0, family: str = "phi") -> np.ndarray:
    """Closed-form output of the partial polarizer acting on the approximate dephased state."""
    _check_family(family)
    _check_transmission("t_v", t_v)
    _check_transmission("t_h", t_h)
    denom = t_v + t_h * epsilon**2
    if denom <= 0:
        raise ValueError("t_v + t_h * epsilon^2 vanishes: state fully filtered")
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = epsilon**2 * t_h / denom
    rho[3, 3] = t_v / denom
    rho[0, 3] = rho[3, 0] = epsilon * np.sqrt(t_h * t_v) * (1 - lam / 2) / denom
    return relabel(rho, family)


def validate_chi(chi, tol: float = HERMITIAN_TOL) -> np.ndarray:
    chi = np.asarray(chi, dtype=complex)
    if chi.shape != (4, 4):
        raise ValueError(f"chi matrix must be 4x4, got {chi.shape}")
    asym = asymmetry(chi)
    if asym > tol:
        raise ValueError(f"chi matrix not Hermitian (max asymmetry {asym:.3e})")
    tr = np.trace(chi).real
    if not 0 < tr <= 1 + tol:
        raise ValueError(f"chi matrix trace {tr:.6g} outside (0, 1]")
    return chi


def chi_ideal(t_v: float) -> np.ndarray:
    """Pauli-basis process matrix of the ideal partial polarizer (t_h = 1)."""
    _check_transmission("t_v", t_v)
    r = np.sqrt(t_v)
    chi = np.zeros((4, 4), dtype=complex)
    chi[0, 0] = (1 + 2 * r + t_v) / 4
    chi[0, 3] = chi[3, 0] = (1 - t_v) / 4
    chi[3, 3] = (1 - 2 * r + t_v) / 4
    return chi


def pauli_coefficients(op) -> np.ndarray:
    """Expansion coefficients c with op = sum_i c_i E_i over (I, X, Y, Z)."""
    op = np.asarray(op, dtype=complex)
    return np.array([np.trace(dag(e) @ op) / 2 for e in PAULIS])


def channel_to_chi(ch: KrausChannel) -> np.ndarray:
    if ch.dim != 2:
        raise ValueError("chi matrices are defined here for single-qubit channels only")
    chi = np.zeros((4, 4), dtype=complex)
    for k in ch.operators:
        c = pauli_coefficients(k)
        chi += np.outer(c, np.conj(c))
    return chi


def apply_chi(chi, rho) -> np.ndarray:
    """rho -> sum_ij chi_ij E_i rho E_j^dagger."""
    chi = np.asarray(chi, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros((2, 2), dtype=complex)
    for i, ei in enumerate(PAULIS):
        for j, ej in enumerate(PAULIS):
            if chi[i, j] != 0:
                out += chi[i, j] * ei @ rho @ dag(ej)
    return out
