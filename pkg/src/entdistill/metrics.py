"""Figures of merit for reconstructed states and processes."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .matcore import herm_eig, psd_sqrt
from .states import _check_family, bell

_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))
_DENOM_TOL = 1e-12

# (population numerator, population denominator) indices per family
_POPS = {"phi": (0, 3), "psi": (1, 2)}


def purity(rho) -> float:
    rho = np.asarray(rho, dtype=complex)
    return float(np.real(np.trace(rho @ rho)))


def fidelity_pure(rho, target) -> float:
    """<target| rho |target>."""
    rho = np.asarray(rho, dtype=complex)
    target = np.asarray(target, dtype=complex)
    if rho.shape[0] != target.shape[0]:
        raise ValueError(f"dimension mismatch: state {rho.shape[0]}, target {target.shape[0]}")
    return float(np.real(np.vdot(target, rho @ target)))


def process_fidelity(chi, chi_ref) -> float:
    """Trace-normalized Uhlmann fidelity between two process matrices.

    Small negative eigenvalues (above -1e-9) are clipped; anything more
    negative is rejected.
    """
    chi = np.asarray(chi, dtype=complex)
    chi_ref = np.asarray(chi_ref, dtype=complex)
    tr, tr_ref = np.trace(chi).real, np.trace(chi_ref).real
    if tr <= 0 or tr_ref <= 0:
        raise ValueError("process matrices must have positive trace")
    s = psd_sqrt(chi)
    # Tr sqrt(s chi_ref s) is the sum of singular values of s sqrt(chi_ref)
    b = s @ psd_sqrt(chi_ref)
    n = b.shape[0]
    w = herm_eig(np.block([[np.zeros((n, n)), b], [b.conj().T, np.zeros((n, n))]]))[0]
    root_trace = float(np.sum(w[:n].clip(0.0)))
    return root_trace**2 / (tr * tr_ref)


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("concurrence needs a two-qubit state")
    sq = psd_sqrt(rho)
    # sqrt(rho) rho~ sqrt(rho) = A A^dagger, so the w_i are the singular values of A;
    # reading them off the Hermitian dilation avoids square-rooting round-off
    a = sq @ _YY @ sq.conj()
    dil = np.block([[np.zeros((4, 4)), a], [a.conj().T, np.zeros((4, 4))]])
    w = herm_eig(dil)[0][:4]
    return float(max(0.0, w[0] - w[1] - w[2] - w[3]))


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def eof_from_concurrence(c: float) -> float:
    c = min(max(c, 0.0), 1.0)
    return binary_entropy((1 + math.sqrt(1 - c * c)) / 2)


def eof(rho) -> float:
    """Entanglement of formation (ebits) of a two-qubit state."""
    return eof_from_concurrence(concurrence(rho))


def estimate_epsilon(rho, family: str = "phi") -> float:
    """Amplitude ratio from the two populated diagonal entries."""
    _check_family(family)
    rho = np.asarray(rho, dtype=complex)
    i, j = _POPS[family]
    num, den = rho[i, i].real, rho[j, j].real
    if den <= _DENOM_TOL:
        raise ValueError(f"population of {'VV' if family == 'phi' else 'VH'} vanishes; epsilon undefined")
    return math.sqrt(max(num, 0.0) / den)


def estimate_lambda(rho, family: str = "phi") -> float:
    """Dephasing degree from the coherence-to-population ratio."""
    _check_family(family)
    rho = np.asarray(rho, dtype=complex)
    i, j = _POPS[family]
    pop = rho[i, i].real
    if pop <= _DENOM_TOL:
        raise ValueError(f"population of {'HH' if family == 'phi' else 'HV'} vanishes; lambda undefined")
    eps = estimate_epsilon(rho, family)
    return float(2 * (1 - rho[i, j].real / pop * eps))


@dataclass(frozen=True)
class MetricsReport:
    purity: float
    fidelity_bell: float
    eof: float
    concurrence: float
    epsilon_exp: float
    lambda_exp: float

    def as_dict(self) -> dict:
        return asdict(self)


def _or_nan(f, *args) -> float:
    try:
        return f(*args)
    except ValueError:
        return float("nan")


def metrics_report(rho, family: str = "phi") -> MetricsReport:
    c = concurrence(rho)
    return MetricsReport(
        purity=purity(rho),
        fidelity_bell=fidelity_pure(rho, bell(family)),
        eof=eof_from_concurrence(c),
        concurrence=c,
        epsilon_exp=_or_nan(estimate_epsilon, rho, family),
        lambda_exp=_or_nan(estimate_lambda, rho, family),
    )


METRICS = {
    "purity": purity,
    "eof": eof,
    "concurrence": concurrence,
    "fidelity_bell": lambda rho: fidelity_pure(rho, bell("phi")),
    "fidelity_bell_psi": lambda rho: fidelity_pure(rho, bell("psi")),
    "epsilon": estimate_epsilon,
    "lambda": estimate_lambda,
    "epsilon_psi": lambda rho: estimate_epsilon(rho, "psi"),
    "lambda_psi": lambda rho: estimate_lambda(rho, "psi"),
}
