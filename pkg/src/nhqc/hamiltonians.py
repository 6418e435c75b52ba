"""Hamiltonian constructors: three-level reference model, two-qubit pieces, NMR register."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PauliSum, pauli_sum_to_matrix

__all__ = [
    "NmrParams",
    "ThreeLevelParams",
    "TwoQubitParams",
    "bright_dark_change_of_basis",
    "build_h1",
    "build_h2",
    "build_h3",
    "build_hx",
    "build_hz",
    "build_internal_nmr",
    "build_three_level_heff",
]

_HALF_PI = math.pi / 2


@dataclass(frozen=True)
class ThreeLevelParams:
    gamma: float
    omega: float = 1.0
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")


@dataclass(frozen=True)
class TwoQubitParams:
    lam: float
    omega: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not -_HALF_PI - 1e-12 <= self.lam <= _HALF_PI + 1e-12:
            raise ValueError(f"lambda {self.lam} outside [-pi/2, pi/2]")


@dataclass(frozen=True)
class NmrParams:
    """Rotating-frame register: Zeeman offsets (rad/s) and scalar coupling J (Hz)."""

    j_coupling: float
    omega1: float = 0.0
    omega2: float = 0.0

    def __post_init__(self):
        for name in ("j_coupling", "omega1", "omega2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


def build_three_level_heff(p: ThreeLevelParams) -> np.ndarray:
    """Effective Hamiltonian in the ordered basis (|e>, |b>, |d>).

    The two sin(gamma) contributions on |b><b| cancel, leaving
    Omega * [2 sin(gamma) |e><e| + cos(gamma) (|b><e| + |e><b|)].
    """
    s, c = math.sin(p.gamma), math.cos(p.gamma)
    h = np.zeros((3, 3), dtype=complex)
    h[0, 0] = 2 * s
    h[0, 1] = h[1, 0] = c
    return p.omega * h


def bright_dark_change_of_basis(alpha: float, beta: float) -> np.ndarray:
    """Columns are |b> and |d> in the (|0>, |1>) basis."""
    ph = np.exp(1j * beta)
    ca, sa = math.cos(alpha), math.sin(alpha)
    return np.array([[ca, sa], [ph * sa, -ph * ca]], dtype=complex)


def build_h1(p: TwoQubitParams) -> PauliSum:
    k = p.omega * math.sin(p.lam) / 2
    return PauliSum.from_pairs([(k, "II"), (k, "ZI"), (-k, "IZ"), (-k, "ZZ")])


def build_h2(p: TwoQubitParams) -> PauliSum:
    k = p.omega * math.cos(p.lam) / (2 * math.sqrt(2))
    return PauliSum.from_pairs([(k, "XX"), (k, "YY"), (k, "XI"), (-k, "XZ")])


def build_h3(p: TwoQubitParams) -> PauliSum:
    k = p.omega * math.cos(p.lam) / 2
    return PauliSum.from_pairs([(k, "XX"), (k, "YY")])


def build_hx(p: TwoQubitParams) -> np.ndarray:
    return pauli_sum_to_matrix(build_h1(p) + build_h2(p))


def build_hz(p: TwoQubitParams) -> np.ndarray:
    return pauli_sum_to_matrix(build_h1(p) + build_h3(p))


def build_internal_nmr(p: NmrParams) -> np.ndarray:
    z1 = np.array([1, 1, -1, -1], dtype=float)
    z2 = np.array([1, -1, 1, -1], dtype=float)
    diag = p.omega1 * z1 + p.omega2 * z2 + (math.pi / 2) * p.j_coupling * z1 * z2
    return np.diag(diag).astype(complex)
