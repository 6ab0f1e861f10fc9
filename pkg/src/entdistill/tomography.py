"""Measurement model, count simulation, state tomography (linear inversion and
maximum likelihood) and single-photon process tomography."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .channels import PAULIS, KrausChannel, chi_ideal
from .matcore import dag, hermitize, psd_project
from .metrics import process_fidelity
from .states import ket

ANALYZER_LABELS = ("H", "V", "D", "R")
PROBE_LABELS = ("H", "V", "D", "R")
SINGLE_SETTINGS = tuple((a,) for a in ANALYZER_LABELS)
PAIR_SETTINGS = tuple(itertools.product(ANALYZER_LABELS, ANALYZER_LABELS))

DEFAULT_SCALE = 10000.0
MLE_MAX_ITER = 5000
MLE_TOL = 1e-10


def projector(setting) -> np.ndarray:
    k = ket("".join(setting))
    return np.outer(k, np.conj(k))


def born_probability(rho, setting) -> float:
    p = float(np.real(np.trace(np.asarray(rho) @ projector(setting))))
    return min(max(p, 0.0), 1.0)


@dataclass
class CountTable:
    """Coincidence counts keyed by analyzer setting, e.g. ``("H", "D")``.

    ``acquisition_scale`` is the expected number of counts for a setting
    with unit probability.
    """

    entries: dict
    acquisition_scale: float = DEFAULT_SCALE

    def __post_init__(self):
        self.entries = {tuple(k): float(v) for k, v in self.entries.items()}
        if any(v < 0 for v in self.entries.values()):
            raise ValueError("counts must be nonnegative")
        if not self.acquisition_scale > 0:
            raise ValueError("acquisition_scale must be positive")
        arity = {len(k) for k in self.entries}
        if len(arity) > 1:
            raise ValueError("count table mixes single and pair settings")

    @property
    def settings(self) -> list:
        return list(self.entries)

    @property
    def n_qubits(self) -> int:
        return len(next(iter(self.entries))) if self.entries else 0

    def counts(self) -> np.ndarray:
        return np.array(list(self.entries.values()))

    def with_counts(self, values) -> "CountTable":
        return CountTable(dict(zip(self.entries, values)), self.acquisition_scale)

    def hv_total(self) -> float:
        """Total over the settings that use only H/V analyzers."""
        return sum(v for k, v in self.entries.items() if set(k) <= {"H", "V"})

    def total(self) -> float:
        return float(sum(self.entries.values()))


def simulate_counts(
    rho,
    settings=None,
    acquisition_scale: float = DEFAULT_SCALE,
    noise: str = "none",
    seed=None,
    rounded: bool = False,
) -> CountTable:
    """Expected or Poisson-sampled coincidence counts.

    ``rho`` may be sub-normalized (trace = transmission probability).  With
    ``noise="none"`` the expected counts are returned unrounded unless
    ``rounded`` is set.
    """
    rho = np.asarray(rho, dtype=complex)
    if settings is None:
        settings = PAIR_SETTINGS if rho.shape[0] == 4 else SINGLE_SETTINGS
    if not acquisition_scale > 0:
        raise ValueError("acquisition_scale must be positive")
    mu = np.array([acquisition_scale * born_probability(rho, s) for s in settings])
    if noise == "none":
        values = np.rint(mu) if rounded else mu
    elif noise == "poisson":
        values = np.random.default_rng(seed).poisson(mu).astype(float)
    else:
        raise ValueError(f"noise must be 'none' or 'poisson', got {noise!r}")
    return CountTable(dict(zip(settings, values)), acquisition_scale)


@dataclass
class TomoResult:
    rho: np.ndarray
    method: str
    log_likelihood: float | None = None
    iterations: int = 0
    clipped_mass: float = 0.0
    converged: bool = True


def _pauli_basis(n_qubits: int) -> list:
    if n_qubits == 1:
        return list(PAULIS)
    return [np.kron(a, b) for a in PAULIS for b in PAULIS]


def _check_table(counts: CountTable) -> int:
    n = counts.n_qubits
    if n not in (1, 2):
        raise ValueError("count table must hold single or pair settings")
    needed = SINGLE_SETTINGS if n == 1 else PAIR_SETTINGS
    missing = [s for s in needed if s not in counts.entries]
    if missing:
        raise ValueError(f"count table missing settings {missing[:4]}")
    if counts.hv_total() <= 0:
        raise ValueError("no counts in the H/V analyzer settings")
    return n


def linear_inversion(counts: CountTable) -> np.ndarray:
    """Unconstrained least-squares solution of the Born-rule system (Hermitian, unit trace)."""
    n = _check_table(counts)
    basis = _pauli_basis(n)
    projs = [projector(s) for s in counts.settings]
    a = np.array([[np.trace(p @ b).real for b in basis] for p in projs])
    freqs = counts.counts() / counts.hv_total()
    coef, _, rank, sv = np.linalg.lstsq(a, freqs, rcond=None)
    if rank < len(basis) or sv[-1] / sv[0] < 1e-12:
        raise ValueError("reconstruction system is singular for these settings")
    rho = sum(c * b for c, b in zip(coef, basis))
    return hermitize(rho)


def qst_linear(counts: CountTable) -> TomoResult:
    raw = linear_inversion(counts)
    rho, neg = psd_project(raw)
    rho = rho / np.trace(rho).real
    return TomoResult(rho=hermitize(rho), method="linear", clipped_mass=neg)


def log_likelihood(rho, counts: CountTable) -> float:
    """Poisson log-likelihood sum(n log mu - mu), intensity profiled out.

    The expected counts are ``mu_s = N * Tr(rho P_s)`` with ``N`` set to its
    maximum-likelihood value for the given ``rho``.
    """
    rho = np.asarray(rho, dtype=complex)
    n = counts.counts()
    p = np.array([np.real(np.trace(rho @ projector(s))) for s in counts.settings])
    if np.any((p <= 0) & (n > 0)):
        return -math.inf
    scale = n.sum() / p.sum()
    mu = scale * p
    mask = n > 0
    return float(np.sum(n[mask] * np.log(mu[mask])) - mu.sum())


def _tri_indices(d: int):
    return np.tril_indices(d)


def _pack(t: np.ndarray) -> np.ndarray:
    il = _tri_indices(t.shape[0])
    vals = t[il]
    return np.concatenate([vals.real, vals.imag])


def _unpack(x: np.ndarray, d: int) -> np.ndarray:
    il = _tri_indices(d)
    k = len(il[0])
    t = np.zeros((d, d), dtype=complex)
    t[il] = x[:k] + 1j * x[k:]
    return t


def qst_mle(counts: CountTable, start: np.ndarray | None = None) -> TomoResult:
    """Maximum-likelihood state under Poisson statistics.

    The state is parametrized as ``rho = T T^dagger / Tr(T T^dagger)`` with
    lower-triangular ``T``, so every iterate is positive semidefinite.  The
    unnormalized ``T T^dagger`` also carries the count intensity.
    """
    n_q = _check_table(counts)
    d = 2**n_q
    n = counts.counts()
    kets = np.array([ket("".join(s)) for s in counts.settings])
    scale = counts.hv_total()

    if start is None:
        start = qst_linear(counts).rho
    seed_rho = 0.999 * np.asarray(start) + 0.001 * np.eye(d) / d
    t0 = np.linalg.cholesky(hermitize(seed_rho))

    def objective(x):
        t = _unpack(x, d)
        amp = kets.conj() @ t  # rows: <k_s| T
        mu = scale * np.sum(np.abs(amp) ** 2, axis=1)
        mu_safe = np.maximum(mu, 1e-300)
        f = mu.sum() - np.sum(n * np.log(mu_safe))
        g = scale * (1 - n / mu_safe)
        gmat = (kets.T * g) @ kets.conj()  # sum_s g_s |k_s><k_s|
        grad_t = 2 * gmat @ t
        il = _tri_indices(d)
        gv = grad_t[il]
        return f, np.concatenate([gv.real, gv.imag])

    x0 = _pack(t0)
    # L-BFGS-B's ftol is relative; rescale so it stops on an absolute gain below MLE_TOL
    ftol = MLE_TOL / max(abs(objective(x0)[0]), 1.0)
    res = minimize(
        objective,
        x0,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": MLE_MAX_ITER, "ftol": ftol, "gtol": 1e-10, "maxcor": 30},
    )
    t = _unpack(res.x, d)
    a = t @ dag(t)
    rho = hermitize(a / np.trace(a).real)
    # line-search stalls at rounding-level progress count as converged
    converged = res.nit < MLE_MAX_ITER
    return TomoResult(
        rho=rho,
        method="mle",
        log_likelihood=log_likelihood(rho, counts),
        iterations=int(res.nit),
        converged=converged,
    )


def reconstruct(counts: CountTable, method: str = "linear") -> TomoResult:
    if method == "linear":
        return qst_linear(counts)
    if method == "mle":
        return qst_mle(counts)
    raise ValueError(f"method must be 'linear' or 'mle', got {method!r}")


# --- process tomography -----------------------------------------------------


@dataclass
class QptInput:
    probe_tables: dict
    reference_tables: dict

    def __post_init__(self):
        for label in PROBE_LABELS:
            if label not in self.probe_tables or label not in self.reference_tables:
                raise ValueError(f"missing tables for probe {label!r}")
            if set(self.probe_tables[label].entries) != set(self.reference_tables[label].entries):
                raise ValueError(f"probe and reference tables for {label!r} cover different settings")


@dataclass
class QptResult:
    chi: np.ndarray
    chi_raw: np.ndarray
    weights: dict
    outputs: dict = field(repr=False)
    clipped_mass: float = 0.0


def _probe_rho(label: str) -> np.ndarray:
    k = ket(label)
    return np.outer(k, np.conj(k))


def simulate_qpt_input(
    channel: KrausChannel,
    acquisition_scale: float = DEFAULT_SCALE,
    noise: str = "none",
    seed=None,
) -> QptInput:
    """Probe tables for ``channel`` and reference tables for the bare substrate."""
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(2 * len(PROBE_LABELS))
    probes, refs = {}, {}
    for i, label in enumerate(PROBE_LABELS):
        rho_in = _probe_rho(label)
        probes[label] = simulate_counts(channel(rho_in), SINGLE_SETTINGS, acquisition_scale, noise, children[2 * i])
        refs[label] = simulate_counts(rho_in, SINGLE_SETTINGS, acquisition_scale, noise, children[2 * i + 1])
    return QptInput(probes, refs)


def choi_to_chi(choi: np.ndarray) -> np.ndarray:
    """Pauli-basis process matrix from J = sum_mn |m><n| (x) E(|m><n|)."""
    vecs = [e.T.reshape(-1) for e in PAULIS]
    return np.array([[np.vdot(a, choi @ b) / 4 for b in vecs] for a in vecs])


def qpt_single_qubit(data: QptInput) -> QptResult:
    """Reconstruct the chi matrix of a possibly lossy single-photon channel.

    Each probe output is reconstructed by linear tomography and weighted by
    its transmission relative to the substrate-only reference, counted in
    the H/V analyzer settings.
    """
    outputs, weights = {}, {}
    for label in PROBE_LABELS:
        ref_total = data.reference_tables[label].hv_total()
        if ref_total <= 0:
            raise ValueError(f"reference counts for probe {label!r} are zero")
        table = data.probe_tables[label]
        weights[label] = table.hv_total() / ref_total
        if table.hv_total() > 0:
            outputs[label] = weights[label] * qst_linear(table).rho
        else:
            outputs[label] = np.zeros((2, 2), dtype=complex)

    e_hh, e_vv, e_dd, e_rr = (outputs[k] for k in ("H", "V", "D", "R"))
    e_hv = e_dd + 1j * e_rr - 0.5 * (1 + 1j) * (e_hh + e_vv)
    e_vh = e_dd - 1j * e_rr - 0.5 * (1 - 1j) * (e_hh + e_vv)
    blocks = [[e_hh, e_hv], [e_vh, e_vv]]
    choi = np.zeros((4, 4), dtype=complex)
    for m in range(2):
        for n in range(2):
            choi[2 * m : 2 * m + 2, 2 * n : 2 * n + 2] = blocks[m][n]
    chi_raw = hermitize(choi_to_chi(choi))
    chi, neg = psd_project(chi_raw)
    return QptResult(chi=chi, chi_raw=chi_raw, weights=weights, outputs=outputs, clipped_mass=neg)


def fit_tv(chi, xatol: float = 1e-6) -> tuple[float, float]:
    """Transmission of the ideal partial polarizer closest to ``chi`` in process fidelity."""

    def neg_fp(t):
        return -process_fidelity(chi, chi_ideal(float(t)))

    res = minimize_scalar(neg_fp, bounds=(0.0, 1.0), method="bounded", options={"xatol": xatol})
    best_t, best_f = float(res.x), -float(res.fun)
    for edge in (0.0, 1.0):
        f = -neg_fp(edge)
        if f > best_f:
            best_t, best_f = edge, f
    return best_t, best_f
