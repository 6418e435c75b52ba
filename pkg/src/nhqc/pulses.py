"""Pulse programs: one-qubit rotations, two-body evolutions and virtual-Z frame updates.

Angle convention for every physical kind: ``exp(-i (angle/2) G)`` with G the
Pauli-product generator of the op. Ops are stored in time order; the unitary of
a sequence is U_n ... U_2 U_1.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .core import PAULI

__all__ = ["KINDS", "PulseOp", "PulseSequence", "sequence_to_unitary"]

KINDS = ("ROT1", "ZZ", "ZY", "XX", "YY", "VZ")
TWO_BODY = {"ZZ": "ZZ", "ZY": "ZY", "XX": "XX", "YY": "YY"}
_I4 = np.eye(4, dtype=complex)


def _plane(psi: float) -> np.ndarray:
    return math.cos(psi) * PAULI["X"] + math.sin(psi) * PAULI["Y"]


@dataclass(frozen=True)
class PulseOp:
    kind: str
    angle: float = 0.0
    qubit: int | None = None
    axis: str | None = None
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        if self.kind in ("ROT1", "VZ") and self.qubit not in (1, 2):
            raise ValueError(f"{self.kind} needs qubit 1 or 2, got {self.qubit!r}")
        if self.kind == "ROT1" and self.axis not in ("X", "Y", "Z"):
            raise ValueError(f"ROT1 axis must be X, Y or Z, got {self.axis!r}")
        if not (math.isfinite(self.angle) and math.isfinite(self.phase)):
            raise ValueError("pulse angle and phase must be finite")

    # constructors

    @classmethod
    def rot(cls, qubit: int, axis: str, angle: float, phase: float = 0.0) -> "PulseOp":
        return cls("ROT1", float(angle), qubit, axis, float(phase))

    @classmethod
    def vz(cls, qubit: int, phase: float) -> "PulseOp":
        return cls("VZ", 0.0, qubit, None, float(phase))

    @classmethod
    def two_body(cls, kind: str, angle: float) -> "PulseOp":
        if kind not in TWO_BODY:
            raise ValueError(f"{kind!r} is not a two-body kind")
        return cls(kind, float(angle))

    # algebra

    @property
    def is_virtual(self) -> bool:
        return self.kind == "VZ"

    @property
    def rotation_angle(self) -> float:
        """Angle of exp(-i (angle/2) G); for VZ this is the frame phase."""
        return self.phase if self.kind == "VZ" else self.angle

    def factors(self) -> tuple[tuple, tuple]:
        """Per-qubit generator factors: ("I",), ("Z",) or ("P", psi) for cos(psi)X + sin(psi)Y."""
        ident = ("I",)
        if self.kind in ("ROT1", "VZ"):
            if self.kind == "VZ" or self.axis == "Z":
                f = ("Z",)
            else:
                f = ("P", self.phase + (math.pi / 2 if self.axis == "Y" else 0.0))
            return (f, ident) if self.qubit == 1 else (ident, f)
        conv = {"Z": ("Z",), "X": ("P", 0.0), "Y": ("P", math.pi / 2)}
        return conv[self.kind[0]], conv[self.kind[1]]

    def generator(self) -> np.ndarray:
        mats = []
        for f in self.factors():
            if f[0] == "P":
                mats.append(_plane(f[1]))
            else:
                mats.append(PAULI[f[0]])
        return np.kron(mats[0], mats[1])

    def to_unitary(self) -> np.ndarray:
        half = self.rotation_angle / 2
        return math.cos(half) * _I4 - 1j * math.sin(half) * self.generator()

    def inverse(self) -> "PulseOp":
        if self.kind == "VZ":
            return PulseOp.vz(self.qubit, -self.phase)
        return PulseOp(self.kind, -self.angle, self.qubit, self.axis, self.phase)

    # wire format

    def to_dict(self) -> dict[str, Any]:
        if self.kind == "ROT1":
            d = {"kind": "ROT1", "qubit": self.qubit, "axis": self.axis, "angle": self.angle}
            if self.phase:
                d["phase"] = self.phase
            return d
        if self.kind == "VZ":
            return {"kind": "VZ", "qubit": self.qubit, "phase": self.phase}
        return {"kind": self.kind, "angle": self.angle}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PulseOp":
        try:
            kind = d["kind"]
            if kind == "ROT1":
                return cls.rot(int(d["qubit"]), d["axis"], float(d["angle"]), float(d.get("phase", 0.0)))
            if kind == "VZ":
                return cls.vz(int(d["qubit"]), float(d["phase"]))
            return cls.two_body(kind, float(d["angle"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed pulse op {d!r}") from exc


@dataclass(frozen=True)
class PulseSequence:
    ops: tuple[PulseOp, ...] = ()
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __add__(self, other: "PulseSequence") -> "PulseSequence":
        return PulseSequence(self.ops + other.ops, {**self.meta, **other.meta})

    @property
    def physical_count(self) -> int:
        return sum(not op.is_virtual for op in self.ops)

    def with_ops(self, ops: Iterable[PulseOp], **meta) -> "PulseSequence":
        return PulseSequence(tuple(ops), {**self.meta, **meta})

    def to_unitary(self) -> np.ndarray:
        return sequence_to_unitary(self)

    def to_dict(self) -> dict[str, Any]:
        return {"meta": self.meta, "ops": [op.to_dict() for op in self.ops]}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def loads(cls, text: str) -> "PulseSequence":
        obj = json.loads(text)
        if not isinstance(obj, dict) or "ops" not in obj:
            raise ValueError("sequence file needs an 'ops' list")
        return cls(tuple(PulseOp.from_dict(d) for d in obj["ops"]), dict(obj.get("meta", {})))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), newline="\n")

    @classmethod
    def load(cls, path: str | Path) -> "PulseSequence":
        return cls.loads(Path(path).read_text())


def _frame(phases: list[float]) -> np.ndarray:
    z1 = np.exp(-0.5j * phases[0] * np.array([1, 1, -1, -1]))
    z2 = np.exp(-0.5j * phases[1] * np.array([1, -1, 1, -1]))
    return z1 * z2


def sequence_to_unitary(seq: PulseSequence | Iterable[PulseOp]) -> np.ndarray:
    """Simulate a sequence, folding VZ updates into the frame of later pulses.

    A VZ(q, phi) is never applied as a pulse: later ops are conjugated by the
    accumulated frame rotation and the frame itself is applied at the end,
    which reproduces a physical z rotation at the VZ's position.
    """
    frame = [0.0, 0.0]
    total = _I4.copy()
    for op in seq:
        if not isinstance(op, PulseOp):
            raise ValueError(f"malformed op {op!r}")
        if op.is_virtual:
            frame[op.qubit - 1] += op.phase
            continue
        u = op.to_unitary()
        if frame[0] or frame[1]:
            f = _frame(frame)
            u = (f.conj()[:, None] * u) * f[None, :]
        total = u @ total
    return _frame(frame)[:, None] * total
