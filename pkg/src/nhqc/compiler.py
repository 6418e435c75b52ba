"""Gate-to-pulse compilation, peephole optimisation and physical lowering."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .core import expm_generator, phase_invariant_distance
from .hamiltonians import NmrParams, TwoQubitParams, build_h2, build_internal_nmr
from .holonomy import Axis, GateSpec, exact_gate
from .pulses import PulseOp, PulseSequence, sequence_to_unitary

__all__ = [
    "delay_evolution",
    "expand_h2_exact",
    "lower_physical",
    "optimize",
    "sequence_segments",
    "trotter_error_scan",
    "trotter_slice_symmetric",
    "trotterize",
]

_FOUR_PI = 4 * math.pi
_ZERO_TOL = 1e-12
MAX_PASSES = 100


def trotter_slice_symmetric(h1, h2, dt: float) -> np.ndarray:
    """exp(-i dt/2 h1) exp(-i dt h2) exp(-i dt/2 h1)."""
    half = expm_generator(h1, dt / 2)
    return half @ expm_generator(h2, dt) @ half


def _h1_half_step(lam: float, n: int) -> list[PulseOp]:
    a = math.pi * math.sin(lam) / (2 * n)
    return [PulseOp.rot(1, "Z", a), PulseOp.rot(2, "Z", -a), PulseOp.two_body("ZZ", -a)]


def _h2_ops(lam: float, n: int) -> list[PulseOp]:
    b = math.pi * math.cos(lam) / n
    q = math.pi / 4
    # YY + XI group: ZY conjugation of an ancilla x rotation
    group_b = [PulseOp.two_body("ZY", -q), PulseOp.rot(1, "X", b), PulseOp.two_body("ZY", q)]
    # XX - XZ group: work-qubit y conjugation of an XX evolution
    group_a = [PulseOp.rot(2, "Y", -q), PulseOp.two_body("XX", b), PulseOp.rot(2, "Y", q)]
    return group_b + group_a


def expand_h2_exact(lam: float, n: int) -> PulseSequence:
    """Six-op sequence equal to exp(-i (pi/n) H2) for Omega = 1 (an identity, not an approximation)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    TwoQubitParams(lam)
    return PulseSequence(tuple(_h2_ops(lam, n)), {"generator": "expand_h2_exact", "lambda": lam, "n": n})


def trotterize(spec: GateSpec, n: int, omega: float = 1.0) -> PulseSequence:
    """Symmetric n-slice pulse program for the holonomic gate ``spec``.

    Each slice is an H1 half-step (z rotations plus a ZZ evolution), the
    coupling block, and the mirrored H1 half-step. The identity part of H1 is
    a global phase and is not emitted. Pulse angles depend on theta only;
    ``omega`` sets the gate time and is recorded in ``meta``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lam = spec.lam
    half = _h1_half_step(lam, n)
    if spec.axis is Axis.X:
        middle = _h2_ops(lam, n)
    else:
        b = math.pi * math.cos(lam) / n
        middle = [PulseOp.two_body("YY", b), PulseOp.two_body("XX", b)]
    ops = (half + middle + half) * n
    meta = {
        "generator": "trotterize",
        "axis": spec.axis.value,
        "theta": spec.theta,
        "lambda": lam,
        "n": n,
        "omega": omega,
        "gate_time": math.pi / omega,
    }
    return PulseSequence(tuple(ops), meta)


def trotter_error_scan(spec: GateSpec, n_values: Sequence[int]) -> list[tuple[int, float]]:
    if not n_values:
        raise ValueError("n_values is empty")
    target = exact_gate(spec)
    return [(n, phase_invariant_distance(sequence_to_unitary(trotterize(spec, n)), target))
            for n in n_values]


def delay_evolution(p: NmrParams, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError("delay must be non-negative")
    return expm_generator(build_internal_nmr(p), t)


def sequence_segments(seq: PulseSequence) -> list[tuple[np.ndarray, float]]:
    """Piecewise-constant (Hamiltonian, duration) list realising ``seq`` with unit-strength generators."""
    segments = []
    for op in seq:
        a = op.rotation_angle
        h = op.generator() / 2
        segments.append((h if a >= 0 else -h, abs(a)))
    return segments


# peephole optimiser

def _wrap(angle: float) -> float:
    """Map into (-2pi, 2pi]; exp(-i a/2 G) has period 4pi."""
    a = math.fmod(angle, _FOUR_PI)
    if a > 2 * math.pi:
        a -= _FOUR_PI
    elif a <= -2 * math.pi:
        a += _FOUR_PI
    return a


def _slot(op: PulseOp) -> tuple:
    if op.kind == "VZ":
        return ("VZ", op.qubit)
    if op.kind == "ROT1":
        return ("ROT1", op.qubit, op.axis, 0.0 if op.axis == "Z" else op.phase)
    return (op.kind,)


def _combine(a: PulseOp, b: PulseOp) -> PulseOp:
    if a.kind == "VZ":
        return PulseOp.vz(a.qubit, _wrap(a.phase + b.phase))
    return PulseOp(a.kind, _wrap(a.angle + b.angle), a.qubit, a.axis, a.phase)


def _factor_relation(f: tuple, g: tuple) -> int:
    """+1 commute, -1 anticommute, 0 neither."""
    if f[0] == "I" or g[0] == "I":
        return 1
    if f[0] == "Z" and g[0] == "Z":
        return 1
    if f[0] == "Z" or g[0] == "Z":
        return -1
    delta = math.remainder(f[1] - g[1], math.pi)
    if abs(delta) < 1e-12:
        return 1
    if abs(abs(delta) - math.pi / 2) < 1e-12:
        return -1
    return 0


def commutes(a: PulseOp, b: PulseOp) -> bool:
    sign = 1
    for f, g in zip(a.factors(), b.factors()):
        r = _factor_relation(f, g)
        if r == 0:
            return False
        sign *= r
    return sign == 1


def _merge_adjacent(ops: list[PulseOp]) -> list[PulseOp]:
    out: list[PulseOp] = []
    for op in ops:
        if out and _slot(out[-1]) == _slot(op):
            out[-1] = _combine(out[-1], op)
        else:
            out.append(op)
    return out


def _drop_zero(ops: list[PulseOp]) -> list[PulseOp]:
    return [op for op in ops if abs(_wrap(op.rotation_angle)) > _ZERO_TOL]


def _push_virtual_z(ops: list[PulseOp]) -> list[PulseOp]:
    ops = [PulseOp.vz(op.qubit, op.angle) if op.kind == "ROT1" and op.axis == "Z" else op
           for op in ops]
    i = 0
    while i < len(ops) - 1:
        vz, nxt = ops[i], ops[i + 1]
        if not vz.is_virtual:
            i += 1
            continue
        if nxt.is_virtual:
            if nxt.qubit > vz.qubit:
                ops[i], ops[i + 1] = nxt, vz
                i += 1
                continue
            i += 1
            continue
        if nxt.kind == "ROT1" and nxt.qubit == vz.qubit:
            shifted = PulseOp.rot(nxt.qubit, nxt.axis, nxt.angle,
                                  math.remainder(nxt.phase - vz.phase, 2 * math.pi))
            ops[i], ops[i + 1] = shifted, vz
            i += 1
        elif commutes(vz, nxt):
            ops[i], ops[i + 1] = nxt, vz
            i += 1
        else:
            i += 1
    return ops


def _merge_across_commuting(ops: list[PulseOp]) -> list[PulseOp]:
    ops = list(ops)
    i = 0
    while i < len(ops):
        a = ops[i]
        if not a.is_virtual:
            for j in range(i + 1, len(ops)):
                b = ops[j]
                if _slot(b) == _slot(a):
                    ops[i] = _combine(a, b)
                    del ops[j]
                    break
                if not commutes(a, b):
                    break
        i += 1
    return ops


def optimize(seq: PulseSequence) -> PulseSequence:
    """Peephole passes to a fixpoint: merge, drop zero angles, push virtual Z, merge across commuting ops.

    The result has the same unitary up to global phase and never more ops.
    """
    ops = list(seq.ops)
    for _ in range(MAX_PASSES):
        new = _merge_across_commuting(_push_virtual_z(_drop_zero(_merge_adjacent(ops))))
        if new == ops:
            break
        ops = new
    if len(ops) > len(seq.ops):
        # conversions are one-for-one, so this cannot happen
        raise AssertionError("optimizer increased the op count")
    return seq.with_ops(ops, optimized=True)


# physical lowering

def _lower_op(op: PulseOp) -> list[PulseOp]:
    h = math.pi / 2
    zz = PulseOp.two_body("ZZ", op.angle)
    if op.kind == "XX":
        pre = [PulseOp.rot(1, "Y", -h), PulseOp.rot(2, "Y", -h)]
    elif op.kind == "YY":
        pre = [PulseOp.rot(1, "X", h), PulseOp.rot(2, "X", h)]
    elif op.kind == "ZY":
        pre = [PulseOp.rot(2, "X", h)]
    else:
        return [op]
    return pre + [zz] + [p.inverse() for p in pre]


def lower_physical(seq: PulseSequence, j_coupling: float | None = None) -> PulseSequence:
    """Rewrite XX, YY and ZY evolutions as hard pulses around ZZ evolutions.

    With ``j_coupling`` (Hz) each ZZ angle is replaced by the non-negative free
    precession delay that realises it (mod a global phase); the delays are
    recorded in ``meta["delays"]``.
    """
    ops: list[PulseOp] = []
    for op in seq:
        ops.extend(_lower_op(op))
    meta = {"lowered": True}
    if j_coupling is not None:
        if j_coupling == 0:
            raise ValueError("J coupling must be non-zero for delay synthesis")
        period = 2 / abs(j_coupling)
        delays = []
        for k, op in enumerate(ops):
            if op.kind == "ZZ":
                t = (op.angle / (math.pi * j_coupling)) % period
                delays.append(t)
                ops[k] = PulseOp.two_body("ZZ", math.pi * j_coupling * t)
        meta.update(j_coupling=j_coupling, delays=delays, total_delay=math.fsum(delays))
    return seq.with_ops(ops, **meta)


def zz_from_delay(p: NmrParams, t: float) -> PulseOp:
    return PulseOp.two_body("ZZ", math.pi * p.j_coupling * t)


def h2_matrix(lam: float, omega: float = 1.0) -> np.ndarray:
    return build_h2(TwoQubitParams(lam, omega)).to_matrix()

