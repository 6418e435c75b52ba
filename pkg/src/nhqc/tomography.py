"""State preparation, work-qubit state tomography and chi-matrix process tomography.

States are NMR deviation matrices (traceless Hermitian). Processes are
characterised in the operator basis {I, X, -iY, Z}.
"""
from __future__ import annotations

import math
from typing import Callable, NamedTuple, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .core import PAULI, LeakageError, NumericalError, unitarity_residual
from .holonomy import GateSpec, exact_gate, logical_block

__all__ = [
    "CHI_BASIS",
    "FidelityPair",
    "ProcessTomography",
    "TomographyError",
    "ZeroSignalError",
    "apply_gate",
    "attenuate",
    "characterize_gate",
    "chi_fidelities",
    "chi_of_unitary",
    "chi_to_dict",
    "prepare_input",
    "qpt_chi",
    "qst_work_qubit",
    "state_fidelities",
]

CHI_BASIS = (PAULI["I"], PAULI["X"], -1j * PAULI["Y"], PAULI["Z"])
PROBES = (PAULI["X"], PAULI["Y"], PAULI["Z"])
HELD_OUT_PROBE = (PAULI["X"] + PAULI["Z"]) / math.sqrt(2)
_ANCILLA_ONE = np.diag([0.0, 1.0]).astype(complex)
_LOGICAL = [2, 3]


class TomographyError(NumericalError):
    pass


class ZeroSignalError(ZeroDivisionError):
    """An unattenuated fidelity was requested for a vanishing output signal."""


class FidelityPair(NamedTuple):
    attenuated: float
    unattenuated: float


def _deviation(rho, dim: int | None = None, tol: float = 1e-12) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or (dim and rho.shape[0] != dim):
        raise ValueError(f"expected a {dim}x{dim} deviation matrix, got shape {rho.shape}")
    scale = max(1.0, float(np.linalg.norm(rho)))
    if np.linalg.norm(rho - rho.conj().T) > tol * scale:
        raise ValueError("deviation matrix is not Hermitian")
    if abs(np.trace(rho)) > tol * scale:
        raise ValueError(f"deviation matrix is not traceless (trace {np.trace(rho):.3e})")
    return rho


def prepare_input(rho_in) -> np.ndarray:
    """|1><1| (ancilla) ⊗ rho_in (work qubit)."""
    return np.kron(_ANCILLA_ONE, _deviation(rho_in, 2))


def apply_gate(gate, rho) -> np.ndarray:
    gate = np.asarray(gate, dtype=complex)
    res = unitarity_residual(gate)
    if res > 1e-10:
        raise NumericalError(f"gate is not unitary (residual {res:.3e})")
    out = gate @ np.asarray(rho, dtype=complex) @ gate.conj().T
    return (out + out.conj().T) / 2


def logical_leakage(rho) -> float:
    """Fraction of the deviation-matrix norm outside the ancilla-|1> block."""
    rho = np.asarray(rho, dtype=complex)
    total = np.linalg.norm(rho)
    if total == 0:
        return 0.0
    inside = np.linalg.norm(rho[np.ix_(_LOGICAL, _LOGICAL)])
    return float(math.sqrt(max(0.0, total**2 - inside**2)) / total)


def qst_work_qubit(rho, leakage_tol: float | None = 1e-6) -> np.ndarray:
    """Work-qubit deviation matrix from Pauli expectations conditioned on ancilla |1>.

    ``leakage_tol=None`` disables the support check.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 deviation matrix, got shape {rho.shape}")
    if leakage_tol is not None:
        leak = logical_leakage(rho)
        if leak > leakage_tol:
            raise LeakageError(f"state leaks out of the logical subspace ({leak:.3e})")
    out = np.zeros((2, 2), dtype=complex)
    for sigma in PROBES:
        expectation = np.trace(rho @ np.kron(_ANCILLA_ONE, sigma)).real
        out += 0.5 * expectation * sigma
    return out


def attenuate(rho, s: float) -> np.ndarray:
    if not 0 < s <= 1:
        raise ValueError(f"attenuation must lie in (0, 1], got {s}")
    return s * np.asarray(rho, dtype=complex)


def _overlap(a, b) -> float:
    return float(np.trace(np.asarray(a) @ np.asarray(b)).real)


def state_fidelities(rho_out, rho_th, rho_in) -> FidelityPair:
    """Attenuated (normalised by the input) and unattenuated (by the output) state fidelities."""
    nth, nin, nout = _overlap(rho_th, rho_th), _overlap(rho_in, rho_in), _overlap(rho_out, rho_out)
    if nth <= 0 or nin <= 0:
        raise ValueError("theoretical and input states must be non-zero")
    if nout <= 0:
        raise ZeroSignalError("output signal is zero; unattenuated fidelity undefined")
    ov = _overlap(rho_out, rho_th)
    return FidelityPair(ov / math.sqrt(nth * nin), ov / math.sqrt(nth * nout))


def chi_of_unitary(v) -> np.ndarray:
    """Rank-one chi of rho -> V rho V^dag for a 2x2 unitary V."""
    v = np.asarray(v, dtype=complex)
    c = np.array([np.trace(e.conj().T @ v) / 2 for e in CHI_BASIS])
    return np.outer(c, c.conj())


def _design_row(rho) -> np.ndarray:
    return np.stack([(em @ rho @ en.conj().T).ravel() for em in CHI_BASIS for en in CHI_BASIS],
                    axis=1)


def apply_chi(chi, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return (_design_row(rho) @ np.asarray(chi).ravel()).reshape(2, 2)


class ProcessTomography(BaseEstimator):
    """Linear-inversion chi estimator.

    ``fit`` takes input deviation matrices ``X`` (n, 2, 2) and the measured
    outputs ``y``. With ``unital=True`` the pair (I, identity_image) is added
    as an extra probe, since traceless probes alone leave the I row free.

    Attributes
    ----------
    chi_ : ndarray (4, 4)
    residual_ : float
        Largest absolute misfit over the fitted probe data.
    """

    def __init__(self, unital: bool = True, identity_image=None):
        self.unital = unital
        self.identity_image = identity_image

    def _stack(self, X, y):
        X = [np.asarray(x, dtype=complex) for x in X]
        y = [np.asarray(t, dtype=complex) for t in y]
        if len(X) != len(y):
            raise ValueError("X and y have different numbers of probes")
        if self.unital:
            img = PAULI["I"] if self.identity_image is None else self.identity_image
            X.append(PAULI["I"])
            y.append(np.asarray(img, dtype=complex))
        for m in X + y:
            if m.shape != (2, 2):
                raise ValueError(f"probes must be 2x2, got {m.shape}")
        return X, y

    def fit(self, X, y):
        X, y = self._stack(X, y)
        a = np.concatenate([_design_row(x) for x in X])
        b = np.concatenate([t.ravel() for t in y])
        if a.shape[0] < 16:
            raise TomographyError(f"{a.shape[0]} equations cannot fix 16 chi entries")
        sol, *_ = np.linalg.lstsq(a, b, rcond=None)
        self.chi_ = sol.reshape(4, 4)
        self.residual_ = float(np.abs(a @ sol - b).max())
        self.n_probes_ = len(X)
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "chi_")
        return np.stack([apply_chi(self.chi_, x) for x in X])

    def score(self, X, y) -> float:
        """Negative worst-case Frobenius misfit (larger is better)."""
        pred = self.predict(X)
        return -float(max(np.linalg.norm(p - np.asarray(t)) for p, t in zip(pred, y)))


def qpt_chi(process: Callable[[np.ndarray], np.ndarray], identity_image=None,
            tol: float = 1e-9) -> np.ndarray:
    """Chi of a one-qubit deviation-matrix map probed with X, Y, Z.

    The image of I is taken as ``identity_image`` (default I). Linearity is
    checked on a held-out probe along (X + Z)/sqrt(2).
    """
    outputs = [process(p) for p in PROBES]
    est = ProcessTomography(identity_image=identity_image).fit(PROBES, outputs)
    held = process(HELD_OUT_PROBE)
    residual = float(np.linalg.norm(est.predict([HELD_OUT_PROBE])[0] - held))
    if max(residual, est.residual_) > tol:
        raise TomographyError(f"process data is not linear (held-out residual {residual:.3e})")
    return est.chi_


def chi_fidelities(chi_exp, chi_th) -> FidelityPair:
    chi_exp, chi_th = np.asarray(chi_exp), np.asarray(chi_th)
    nth = np.trace(chi_th @ chi_th.conj().T).real
    nexp = np.trace(chi_exp @ chi_exp.conj().T).real
    if nth <= 0:
        raise ValueError("theoretical chi must be non-zero")
    f_att = float(abs(np.trace(chi_exp @ chi_th.conj().T)))
    if nexp <= 0:
        raise ZeroSignalError("experimental chi is zero; unattenuated fidelity undefined")
    return FidelityPair(f_att, f_att / math.sqrt(nth * nexp))


def chi_to_dict(chi, fidelity: FidelityPair) -> dict:
    chi = np.asarray(chi)
    return {
        "chi_re": chi.real.tolist(),
        "chi_im": chi.imag.tolist(),
        "f_att": fidelity.attenuated,
        "f_unatt": fidelity.unattenuated,
    }


def characterize_gate(gate, spec: GateSpec, attenuation: float = 1.0,
                      leakage_tol: float | None = 1e-6, tol: float = 1e-9,
                      probes: Sequence[np.ndarray] = PROBES) -> dict:
    """Prepare -> gate -> attenuate -> QST -> chi, against the ideal rotation for ``spec``.

    Returns the reconstructed and ideal chi, both fidelity pairs for chi, the
    per-probe state fidelities and the worst observed leakage.
    """
    ideal = logical_block(exact_gate(spec), spec.theta)
    leaks: list[float] = []

    def process(rho2):
        rho4 = attenuate(apply_gate(gate, prepare_input(rho2)), attenuation)
        leaks.append(logical_leakage(rho4))
        return qst_work_qubit(rho4, leakage_tol)

    chi = qpt_chi(process, identity_image=attenuation * PAULI["I"], tol=tol)
    chi_th = chi_of_unitary(ideal)
    states = []
    for p in probes:
        out = process(p)
        states.append(state_fidelities(out, ideal @ p @ ideal.conj().T, p))
    return {
        "chi": chi,
        "chi_th": chi_th,
        "chi_fidelity": chi_fidelities(chi, chi_th),
        "state_fidelities": states,
        "leakage": max(leaks),
    }
