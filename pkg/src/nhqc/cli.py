"""Command-line front end.

Exit codes: 0 success, 1 numerical-contract violation, 2 usage error,
3 semantic check failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .compiler import lower_physical, optimize, trotter_error_scan, trotterize
from .core import NumericalError, SubspaceBasis, is_unitary, phase_invariant_distance
from .hamiltonians import TwoQubitParams, build_hx, build_hz
from .holonomy import Axis, GateSpec, check_holonomic_conditions, exact_gate
from .pulses import PulseSequence, sequence_to_unitary
from .tomography import characterize_gate, chi_to_dict

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE, EXIT_CHECK = 0, 1, 2, 3
TOL_ENV = "HOLONOMY_TOL_OVERRIDE"
DEFAULT_TOLERANCES = {"holonomy": 1e-8, "unitary": 1e-10, "tomography": 1e-9, "leakage": 1e-6}
MAX_SCAN_N = 4096

_ANGLE_RE = re.compile(r"^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)?\s*(pi)?\s*$")


class UsageError(Exception):
    pass


def parse_angle(text: str) -> float:
    """Radians, or a multiple of pi written like ``0.5pi``; ``pi`` alone is pi."""
    m = _ANGLE_RE.match(text)
    if not m or not (m.group(1) or m.group(2)):
        raise argparse.ArgumentTypeError(f"bad angle {text!r} (use e.g. 1.57 or 0.5pi)")
    value = float(m.group(1)) if m.group(1) else 1.0
    if m.group(2):
        value *= math.pi
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"angle {text!r} is not finite")
    return value


@dataclass
class RunConfig:
    omega: float = 1.0
    j_coupling: float | None = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0

    def __post_init__(self):
        if not self.omega > 0:
            raise UsageError(f"omega must be positive, got {self.omega}")
        merged = dict(DEFAULT_TOLERANCES)
        merged.update(self.tolerances or {})
        if any(not v > 0 for v in merged.values()):
            raise UsageError("tolerances must be positive")
        self.tolerances = merged

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        unknown = set(data) - {"omega", "j_coupling", "tolerances", "seed"}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def _resolve_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    if args.omega is not None:
        cfg.omega = args.omega
        cfg.__post_init__()
    env = os.environ.get(TOL_ENV)
    if env:
        try:
            tol = float(env)
        except ValueError as exc:
            raise UsageError(f"{TOL_ENV}={env!r} is not a number") from exc
        if not tol > 0:
            raise UsageError(f"{TOL_ENV} must be positive")
        cfg.tolerances["holonomy"] = tol
    if getattr(args, "j", None) is not None:
        cfg.j_coupling = args.j
    return cfg


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, newline="\n")


def _unitary_dict(u, meta: dict) -> dict:
    u = np.asarray(u)
    return {"meta": meta, "unitary_re": u.real.tolist(), "unitary_im": u.imag.tolist()}


def _spec(args) -> GateSpec:
    try:
        return GateSpec(Axis.parse(args.axis), args.theta)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _compiled_gate(args, spec: GateSpec, cfg: RunConfig):
    if args.mode == "exact":
        return exact_gate(spec, cfg.omega), None
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    seq = trotterize(spec, args.n, cfg.omega)
    u = sequence_to_unitary(seq)
    if not is_unitary(u, cfg.tolerances["unitary"]):
        raise NumericalError("compiled sequence is not unitary")
    return u, seq


def cmd_gate(args, cfg: RunConfig) -> int:
    spec = _spec(args)
    u, seq = _compiled_gate(args, spec, cfg)
    dist = phase_invariant_distance(u, exact_gate(spec))
    meta = {"axis": spec.axis.value, "theta": spec.theta, "mode": args.mode, "omega": cfg.omega}
    if seq is None:
        if args.out:
            _write(args.out, _dump(_unitary_dict(u, meta)))
    elif args.out:
        seq.save(args.out)
        out = Path(args.out)
        _write(str(out.with_name(out.stem + ".unitary.json")),
               _dump(_unitary_dict(u, {**meta, "n": args.n})))
    print(f"distance {dist!r}")
    return EXIT_OK


def cmd_check(args, cfg: RunConfig) -> int:
    axis = Axis.parse(args.axis)
    try:
        p = TwoQubitParams(args.lam, cfg.omega)
        subspace = SubspaceBasis.from_labels([s.strip() for s in args.subspace.split(",")])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.grid < 2:
        raise UsageError("--grid must be >= 2")
    h = build_hx(p) if axis is Axis.X else build_hz(p)
    tau = math.pi / cfg.omega if args.tau is None else args.tau
    report = check_holonomic_conditions(h, subspace, tau, args.grid)
    tol = cfg.tolerances["holonomy"]
    print(json.dumps({**report.to_dict(), "tolerance": tol, "passed": report.passed(tol)}, indent=2))
    return EXIT_OK if report.passed(tol) else EXIT_CHECK


def _scan_values(args) -> list[int]:
    if not 1 <= args.n_min <= args.n_max <= MAX_SCAN_N:
        raise UsageError(f"need 1 <= n-min <= n-max <= {MAX_SCAN_N}")
    values = range(args.n_min, args.n_max + 1)
    if args.powers_of_two:
        values = [n for n in values if n & (n - 1) == 0]
    return list(values)


def cmd_scan(args, cfg: RunConfig) -> int:
    spec = _spec(args)
    values = _scan_values(args)
    if not values:
        raise UsageError("scan range contains no admissible n")
    lines = ["n,error"] + [f"{n},{err!r}" for n, err in trotter_error_scan(spec, values)]
    _write(args.csv, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_qpt(args, cfg: RunConfig) -> int:
    spec = _spec(args)
    if not 0 < args.attenuation <= 1:
        raise UsageError("--attenuation must lie in (0, 1]")
    u, _ = _compiled_gate(args, spec, cfg)
    leak_tol = cfg.tolerances["leakage"] if args.mode == "exact" else None
    res = characterize_gate(u, spec, args.attenuation, leakage_tol=leak_tol,
                            tol=cfg.tolerances["tomography"])
    fid = res["chi_fidelity"]
    states = res["state_fidelities"]
    payload = chi_to_dict(res["chi"], fid)
    payload["meta"] = {"axis": spec.axis.value, "theta": spec.theta, "mode": args.mode,
                       "n": args.n if args.mode == "trotter" else None,
                       "attenuation": args.attenuation, "leakage": res["leakage"]}
    if args.out:
        _write(args.out, _dump(payload))
    for label, f in zip("XYZ", states):
        print(f"state {label}: f_att {f.attenuated!r} f_unatt {f.unattenuated!r}")
    print(f"chi: f_att {fid.attenuated!r} f_unatt {fid.unattenuated!r}")
    if args.mode == "trotter":
        print(f"leakage {res['leakage']!r}")
    return EXIT_OK


def cmd_compile(args, cfg: RunConfig) -> int:
    if args.input:
        try:
            seq = PulseSequence.load(args.input)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read sequence: {exc}") from exc
    else:
        if args.axis is None or args.theta is None:
            raise UsageError("give --in or both --axis and --theta")
        seq = trotterize(_spec(args), args.n, cfg.omega)
    opt = optimize(seq)
    dist = phase_invariant_distance(sequence_to_unitary(opt), sequence_to_unitary(seq))
    if dist > 1e-9:
        raise NumericalError(f"optimizer changed the unitary (distance {dist:.3e})")
    _write(args.out, opt.dumps())
    print(f"ops {len(seq)} -> {len(opt)} (physical {seq.physical_count} -> {opt.physical_count})",
          file=sys.stderr)
    return EXIT_OK


def cmd_lower(args, cfg: RunConfig) -> int:
    if not args.physical:
        raise UsageError("lower currently supports only --physical")
    try:
        seq = PulseSequence.load(args.input)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read sequence: {exc}") from exc
    if cfg.j_coupling is None:
        raise UsageError("lower --physical needs --j or j_coupling in the config")
    try:
        low = lower_physical(seq, cfg.j_coupling)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    dist = phase_invariant_distance(sequence_to_unitary(low), sequence_to_unitary(seq))
    if dist > 1e-9:
        raise NumericalError(f"lowering changed the unitary (distance {dist:.3e})")
    _write(args.out, low.dumps())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nhqc", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON RunConfig file")
    parser.add_argument("--omega", type=float, help="coupling strength Omega (default 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    def gate_args(p, required=True):
        p.add_argument("--axis", choices=["x", "z", "X", "Z"], required=required)
        p.add_argument("--theta", type=parse_angle, required=required)

    p = sub.add_parser("gate", help="build a holonomic gate exactly or as a Trotter pulse sequence")
    gate_args(p)
    p.add_argument("--mode", choices=["exact", "trotter"], default="exact")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("check", help="verify the holonomy conditions numerically")
    p.add_argument("--axis", choices=["x", "z", "X", "Z"], required=True)
    p.add_argument("--lambda", dest="lam", type=parse_angle, required=True)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--subspace", default="10,11")
    p.add_argument("--tau", type=parse_angle)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("scan", help="Trotter error versus slice count, as CSV")
    gate_args(p)
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=16)
    p.add_argument("--powers-of-two", action="store_true")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("qpt", help="process tomography of a simulated gate")
    gate_args(p)
    p.add_argument("--mode", choices=["exact", "trotter"], default="exact")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--attenuation", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_qpt)

    p = sub.add_parser("compile", help="optimize a pulse sequence")
    p.add_argument("--in", dest="input")
    gate_args(p, required=False)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("lower", help="lower two-body evolutions to pulses and J delays")
    p.add_argument("--physical", action="store_true")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--j", type=float, help="scalar coupling J in Hz")
    p.add_argument("--out")
    p.set_defaults(func=cmd_lower)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
