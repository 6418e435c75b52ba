"""Dense complex linear algebra and two-qubit Pauli algebra.

Every operator is a plain ``numpy.ndarray`` of dtype complex. Qubit 1 (the
ancilla) is the left tensor factor, so the computational basis order is
|00>, |01>, |10>, |11>.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PAULI",
    "HermiticityError",
    "LeakageError",
    "NumericalError",
    "PauliSum",
    "PauliTerm",
    "SubspaceBasis",
    "LOGICAL_SUBSPACE",
    "basis_state",
    "expm_generator",
    "gate_infidelity",
    "is_hermitian",
    "is_unitary",
    "pauli_sum_to_matrix",
    "phase_invariant_distance",
    "tensor_product",
]

# construction / gate / cross-operation tolerances
TOL_CONSTRUCT = 1e-12
TOL_GATE = 1e-10
TOL_EQUIV = 1e-9

MAX_DIM = 16

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class NumericalError(ValueError):
    """A numerical contract (Hermiticity, unitarity, leakage, ...) was violated."""


class HermiticityError(NumericalError):
    pass


class LeakageError(NumericalError):
    pass


def _as_square(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermiticity_residual(a) -> float:
    a = _as_square(a)
    return float(np.linalg.norm(a - a.conj().T))


def is_hermitian(a, tol: float = TOL_GATE) -> bool:
    return hermiticity_residual(a) <= tol


def unitarity_residual(a) -> float:
    a = _as_square(a)
    return float(np.linalg.norm(a.conj().T @ a - np.eye(a.shape[0])))


def is_unitary(a, tol: float = TOL_GATE) -> bool:
    return unitarity_residual(a) <= tol


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b``; registers beyond four qubits are rejected."""
    a, b = _as_square(a), _as_square(b)
    dim = a.shape[0] * b.shape[0]
    if dim > MAX_DIM:
        raise ValueError(f"tensor product dimension {dim} exceeds {MAX_DIM}")
    return np.kron(a, b)


def basis_state(label: str) -> np.ndarray:
    """Column vector for a computational basis label such as ``"10"``."""
    if not label or set(label) - {"0", "1"}:
        raise ValueError(f"bad basis label {label!r}")
    v = np.zeros(2 ** len(label), dtype=complex)
    v[int(label, 2)] = 1.0
    return v


def expm_generator(h, t: float) -> np.ndarray:
    """Return ``exp(-i h t)`` for Hermitian ``h`` via its eigendecomposition."""
    h = _as_square(h)
    res = hermiticity_residual(h)
    if res > TOL_GATE:
        raise HermiticityError(f"generator is not Hermitian (residual {res:.3e})")
    if t == 0:
        return np.eye(h.shape[0], dtype=complex)
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def phase_invariant_distance(u, v) -> float:
    """min over phi of ||u - e^{i phi} v||_F / ||v||_F for unitaries of equal size.

    Equals sqrt(2 - 2|Tr(u^dag v)|/d). The optimal phase is applied explicitly
    rather than evaluating that square root, which would cancel catastrophically
    near zero.
    """
    u, v = _as_square(u), _as_square(v)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    for name, m in (("u", u), ("v", v)):
        if not is_unitary(m, 1e-8):
            raise NumericalError(f"{name} is not unitary (residual {unitarity_residual(m):.3e})")
    overlap = np.trace(v.conj().T @ u)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    d = u.shape[0]
    return float(min(np.linalg.norm(u - phase * v) / np.sqrt(d), np.sqrt(2.0)))


def gate_infidelity(u, v) -> float:
    """1 - |Tr(u^dag v)/d|^2, the usual phase-insensitive gate infidelity."""
    u, v = _as_square(u), _as_square(v)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    d = u.shape[0]
    return float(1.0 - abs(np.trace(u.conj().T @ v) / d) ** 2)


@dataclass(frozen=True)
class PauliTerm:
    """``coefficient * (sigma_a ⊗ sigma_b)``; ``factors`` is e.g. ``"XZ"``."""

    coefficient: float
    factors: str

    def __post_init__(self):
        if len(self.factors) != 2 or any(f not in PAULI for f in self.factors):
            raise ValueError(f"expected two labels from IXYZ, got {self.factors!r}")

    def to_matrix(self) -> np.ndarray:
        a, b = self.factors
        return self.coefficient * np.kron(PAULI[a], PAULI[b])


@dataclass(frozen=True)
class PauliSum:
    terms: tuple[PauliTerm, ...] = field(default_factory=tuple)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, str]]) -> "PauliSum":
        return cls(tuple(PauliTerm(c, f) for c, f in pairs))

    def __add__(self, other: "PauliSum") -> "PauliSum":
        return PauliSum(self.terms + other.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def to_matrix(self) -> np.ndarray:
        return pauli_sum_to_matrix(self)


def pauli_sum_to_matrix(s: PauliSum) -> np.ndarray:
    out = np.zeros((4, 4), dtype=complex)
    for term in s.terms:
        out += term.to_matrix()
    return out


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """Orthonormal vectors, stored as the columns of ``vectors``."""

    vectors: np.ndarray

    def __post_init__(self):
        vecs = np.asarray(self.vectors, dtype=complex)
        if vecs.ndim != 2 or vecs.shape[1] == 0:
            raise ValueError("subspace needs at least one vector")
        gram = vecs.conj().T @ vecs
        if np.abs(gram - np.eye(vecs.shape[1])).max() > TOL_CONSTRUCT:
            raise ValueError("subspace vectors are not orthonormal")
        object.__setattr__(self, "vectors", vecs)

    @classmethod
    def from_labels(cls, labels: Sequence[str]) -> "SubspaceBasis":
        return cls(np.column_stack([basis_state(lab) for lab in labels]))

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def rank(self) -> int:
        return self.vectors.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.vectors @ self.vectors.conj().T


LOGICAL_SUBSPACE = SubspaceBasis.from_labels(["10", "11"])
