"""Single-shot holonomic gates and numerical checks of the holonomy conditions."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    LOGICAL_SUBSPACE,
    TOL_EQUIV,
    HermiticityError,
    LeakageError,
    SubspaceBasis,
    expm_generator,
    hermiticity_residual,
)
from .hamiltonians import (
    ThreeLevelParams,
    TwoQubitParams,
    bright_dark_change_of_basis,
    build_hx,
    build_hz,
    build_three_level_heff,
)

__all__ = [
    "Axis",
    "GateSpec",
    "HolonomyReport",
    "check_holonomic_conditions",
    "check_piecewise_holonomy",
    "exact_gate",
    "gate_hamiltonian",
    "lambda_of_theta",
    "logical_block",
    "logical_propagator_residual",
    "theta_of_lambda",
    "three_level_propagator_check",
]

_LOGICAL = [2, 3]
_ANCILLA0 = [0, 1]


class Axis(str, enum.Enum):
    X = "X"
    Z = "Z"

    @classmethod
    def parse(cls, text: "str | Axis") -> "Axis":
        return cls(str(text.value if isinstance(text, Axis) else text).upper())


def theta_of_lambda(lam: float) -> float:
    if not -math.pi / 2 - 1e-12 <= lam <= math.pi / 2 + 1e-12:
        raise ValueError(f"lambda {lam} outside [-pi/2, pi/2]")
    return math.pi * (math.sin(lam) + 1)


def lambda_of_theta(theta: float) -> float:
    if not -1e-12 <= theta <= 2 * math.pi + 1e-12:
        raise ValueError(f"theta {theta} outside [0, 2pi]")
    return math.asin(min(1.0, max(-1.0, theta / math.pi - 1)))


@dataclass(frozen=True)
class GateSpec:
    axis: Axis
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis.parse(self.axis))
        if not -1e-12 <= self.theta <= 2 * math.pi + 1e-12:
            raise ValueError(f"theta {self.theta} outside [0, 2pi]")

    @property
    def lam(self) -> float:
        return lambda_of_theta(self.theta)


def gate_hamiltonian(spec: GateSpec, omega: float = 1.0) -> np.ndarray:
    p = TwoQubitParams(spec.lam, omega)
    return build_hx(p) if spec.axis is Axis.X else build_hz(p)


def exact_gate(spec: GateSpec, omega: float = 1.0) -> np.ndarray:
    """Closed-form 4x4 gate, global factor e^{-i theta/2} included.

    ``omega`` only sets the gate time pi/omega; the matrix does not depend on it.
    """
    del omega
    half = spec.theta / 2
    c, s = math.cos(half), math.sin(half)
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = np.exp(1j * half)
    u[1, 1] = np.exp(-1j * half)
    if spec.axis is Axis.X:
        u[2:, 2:] = [[c, -1j * s], [-1j * s, c]]
    else:
        u[2, 2] = np.exp(-1j * half)
        u[3, 3] = np.exp(1j * half)
    return np.exp(-1j * half) * u


def logical_block(gate, theta: float | None = None, tol: float = TOL_EQUIV) -> np.ndarray:
    """Restriction of ``gate`` to span{|10>, |11>}.

    With ``theta`` the factor e^{-i theta/2} is divided out; without it the
    block is normalised to unit determinant.
    """
    gate = np.asarray(gate, dtype=complex)
    off = math.hypot(
        np.linalg.norm(gate[np.ix_(_ANCILLA0, _LOGICAL)]),
        np.linalg.norm(gate[np.ix_(_LOGICAL, _ANCILLA0)]),
    )
    if off > tol:
        raise LeakageError(f"gate couples the logical subspace out (off-block norm {off:.3e})")
    block = gate[np.ix_(_LOGICAL, _LOGICAL)].copy()
    if theta is not None:
        return block * np.exp(1j * theta / 2)
    return block / np.sqrt(np.linalg.det(block))


@dataclass(frozen=True)
class HolonomyReport:
    cyclic_residual: float
    parallel_transport_residual: float
    grid_points: int
    leakage: float

    def passed(self, tol: float) -> bool:
        return self.cyclic_residual < tol and self.parallel_transport_residual < tol

    def to_dict(self) -> dict:
        return {
            "cyclic_residual": self.cyclic_residual,
            "parallel_transport_residual": self.parallel_transport_residual,
            "grid_points": self.grid_points,
            "leakage": self.leakage,
        }


def _evolve_segment(h, times, states):
    """Evolve column ``states`` under constant ``h`` at each time; shape (T, dim, M)."""
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    coeffs = v.conj().T @ states
    phases = np.exp(-1j * np.outer(times, w))
    return np.einsum("ij,tj,jm->tim", v, phases, coeffs)


def _segment_metrics(h, evolved, projector):
    pt = np.abs(np.einsum("tik,ij,tjl->tkl", evolved.conj(), h, evolved)).max()
    inside = np.einsum("tim,ij,tjm->tm", evolved.conj(), projector, evolved).real
    leak = float(np.clip(1.0 - inside, 0.0, None).max())
    return float(pt), leak


def check_holonomic_conditions(h, subspace: SubspaceBasis = LOGICAL_SUBSPACE,
                               tau: float = math.pi, grid: int = 101) -> HolonomyReport:
    """Cyclic (projector return) and parallel-transport residuals on a uniform grid.

    ``leakage`` is the largest population found outside the subspace at any
    grid time, starting from the subspace basis vectors.
    """
    return check_piecewise_holonomy([(h, tau)], subspace, grid)


def check_piecewise_holonomy(segments: Sequence[tuple[np.ndarray, float]],
                             subspace: SubspaceBasis = LOGICAL_SUBSPACE,
                             grid: int = 101) -> HolonomyReport:
    """Same checks for a piecewise-constant Hamiltonian, ``grid`` points per segment."""
    if grid < 2:
        raise ValueError("grid must be >= 2")
    if not segments:
        raise ValueError("no segments")
    p0 = subspace.projector
    states = subspace.vectors
    pt_max = leak_max = 0.0
    for h, duration in segments:
        h = np.asarray(h, dtype=complex)
        res = hermiticity_residual(h)
        if res > 1e-10:
            raise HermiticityError(f"segment generator is not Hermitian (residual {res:.3e})")
        if duration < 0:
            raise ValueError("segment durations must be non-negative")
        times = np.linspace(0.0, duration, grid)
        evolved = _evolve_segment(h, times, states)
        pt, leak = _segment_metrics(h, evolved, p0)
        pt_max, leak_max = max(pt_max, pt), max(leak_max, leak)
        states = evolved[-1]
    p_end = states @ states.conj().T
    cyclic = float(np.linalg.norm(p_end - p0, 2))
    return HolonomyReport(cyclic, pt_max, grid * len(segments), leak_max)


def three_level_propagator_check(p: ThreeLevelParams) -> tuple[float, float]:
    """(phi, max entrywise |U(T) - diag(e^{-i phi}, e^{-i phi}, 1)|) at T = pi/Omega."""
    u = expm_generator(build_three_level_heff(p), math.pi / p.omega)
    phi = math.pi * math.sin(p.gamma) + math.pi
    target = np.diag([np.exp(-1j * phi), np.exp(-1j * phi), 1.0])
    return phi, float(np.abs(u - target).max())


def logical_propagator_residual(p: ThreeLevelParams) -> float:
    """Check e^{-i phi}|b><b| + |d><d| == e^{-i phi/2} exp(-i phi/2 (|b><b| - |d><d|))."""
    phi, _ = three_level_propagator_check(p)
    cob = bright_dark_change_of_basis(p.alpha, p.beta)
    b, d = cob[:, [0]], cob[:, [1]]
    pb, pd = b @ b.conj().T, d @ d.conj().T
    lhs = np.exp(-1j * phi) * pb + pd
    rhs = np.exp(-1j * phi / 2) * expm_generator(pb - pd, phi / 2)
    return float(np.abs(lhs - rhs).max())
