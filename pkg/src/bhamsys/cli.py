"""Command-line front end emitting deterministic CSV/JSON artifacts.

Usage::

    bhamsys <command> --config run.json [--out DIR] [--seed N]

with commands ``simulate``, ``portrait``, ``classify``, ``oracle-compare``,
``timescale`` and ``liftcheck``.  Configurations are JSON documents; unknown
keys are rejected with their full path.  All artifacts are plain CSV (floats
with 17 significant digits) and JSON with sorted keys, so identical
configurations produce byte-identical outputs.  Exit codes: 0 on success,
1 when some record failed numerically, 2 on configuration errors.

The environment variable ``BHAMSYS_LOG`` (debug/info/warning/error) controls
log verbosity; ``--seed`` is accepted and recorded for future use but no
command currently draws random numbers.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .geometry import PhaseState, PhaseStructure, StructureKind
from .hamiltonians import HamiltonianSpec, PotentialFamily, PotentialSpec
from .integrate import IntegratorConfig, Method, Trajectory, integrate
from .liftcheck import projectability_test, toric_moment_field
from .oracles import (classical_parabola, quadratic_tanh,
                      quadratic_tanh_constants, quadratic_tanh_momentum,
                      stokes_exact)
from .orbits import classify_orbit, phase_portrait
from .timescale import reconstruct_real_time, run_rescaled, run_s_coordinates

__all__ = ["ConfigError", "RunConfig", "parse_config", "run", "main"]

logger = logging.getLogger("bhamsys")

COMMANDS = ("simulate", "portrait", "classify", "oracle-compare", "timescale", "liftcheck")

_STRUCTURE_KEYS = {"kind", "dim", "modular_weight", "singular_index", "angular_mask"}
_POTENTIAL_KEYS = {"family", "lambda", "alpha", "axis"}
_INTEGRATOR_KEYS = {"method", "step", "rel_tol", "abs_tol", "t_max",
                    "z_epsilon", "fp_epsilon", "blowup_bound"}
_AXIS_SPEC_KEYS = {"start", "stop", "count", "values"}

_TOP_KEYS = {
    "simulate": {"command", "structure", "potential", "initial", "integrator", "out_dir"},
    "portrait": {"command", "structure", "potential", "initial", "integrator",
                 "out_dir", "backward"},
    "classify": {"command", "structure", "potential", "initial", "integrator", "out_dir"},
    "oracle-compare": {"command", "structure", "potential", "initial", "integrator", "out_dir"},
    "timescale": {"command", "potential", "friction", "clock", "horizon", "initial",
                  "n", "e0", "integrator", "out_dir"},
    "liftcheck": {"command", "structure", "potential", "toric", "base_points",
                  "fiber_samples", "tol", "out_dir"},
}


class ConfigError(ValueError):
    """Invalid configuration document (CLI exit code 2)."""


@dataclass
class RunConfig:
    """Validated run description; fields unused by a command stay None."""

    command: str
    raw: dict
    warnings: list = field(default_factory=list)
    structure: Optional[PhaseStructure] = None
    hamiltonian: Optional[HamiltonianSpec] = None
    potential: Optional[PotentialSpec] = None
    axis: int = 0
    initials: list = field(default_factory=list)
    integrator: Optional[IntegratorConfig] = None
    out_dir: Optional[str] = None
    backward: bool = True
    # timescale
    friction: Optional[float] = None
    clock: Optional[str] = None
    horizon: Optional[float] = None
    e0: Optional[float] = None
    n: int = 1
    initial_qv: Optional[tuple] = None
    # liftcheck
    base_points: Optional[list] = None
    fiber_samples: Optional[list] = None
    tol: float = 1e-9
    toric_c: Optional[float] = None


def _require_mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{path} must be a JSON object")
    return value


def _reject_unknown(section: dict, allowed: set, path: str) -> None:
    for key in section:
        if key not in allowed:
            where = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown key: {where}")


def _number(section: dict, key: str, path: str, default=None, positive=False):
    if key not in section:
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key} must be a number")
    if positive and not value > 0:
        raise ConfigError(f"{path}.{key} must be > 0")
    return float(value)


def _build_structure(section, warnings) -> PhaseStructure:
    section = _require_mapping(section, "structure")
    _reject_unknown(section, _STRUCTURE_KEYS, "structure")
    kind = section.get("kind")
    try:
        kind = StructureKind(kind)
    except ValueError:
        raise ConfigError(
            f"structure.kind must be one of {[k.value for k in StructureKind]}, got {kind!r}")
    dim = section.get("dim", 2)
    if not isinstance(dim, int):
        raise ConfigError("structure.dim must be an integer")
    mask = section.get("angular_mask", ())
    if mask and not all(isinstance(b, bool) for b in mask):
        raise ConfigError("structure.angular_mask must be a list of booleans")
    try:
        return PhaseStructure(
            kind=kind, dim=dim,
            modular_weight=_number(section, "modular_weight", "structure", 1.0),
            singular_index=section.get("singular_index", 0),
            angular_mask=tuple(mask))
    except ValueError as exc:
        raise ConfigError(f"structure: {exc}")


def _build_potential(section) -> tuple:
    section = _require_mapping(section, "potential")
    _reject_unknown(section, _POTENTIAL_KEYS, "potential")
    family = section.get("family")
    try:
        family = PotentialFamily(family)
    except ValueError:
        raise ConfigError(
            f"potential.family must be one of {[f.value for f in PotentialFamily]}, got {family!r}")
    if family is PotentialFamily.CUSTOM:
        raise ConfigError("potential.family: custom potentials are library-only, "
                          "not addressable from a JSON config")
    lam = _number(section, "lambda", "potential", 1.0)
    if family is not PotentialFamily.ZERO and not lam > 0:
        raise ConfigError("potential.lambda must be > 0")
    alpha = _number(section, "alpha", "potential", 0.0)
    if alpha != 0.0 and family is not PotentialFamily.GENERAL_QUADRATIC:
        raise ConfigError("potential.alpha is only valid for family general_quadratic")
    axis = section.get("axis", 0)
    if not isinstance(axis, int) or axis < 0:
        raise ConfigError("potential.axis must be a nonnegative integer")
    return PotentialSpec(family=family, lam=lam, alpha=alpha), axis


def _build_integrator(section, structure, warnings) -> IntegratorConfig:
    if section is None:
        return IntegratorConfig()
    section = _require_mapping(section, "integrator")
    _reject_unknown(section, _INTEGRATOR_KEYS, "integrator")
    kwargs = {}
    if "method" in section:
        try:
            kwargs["method"] = Method(section["method"])
        except ValueError:
            raise ConfigError(
                f"integrator.method must be one of {[m.value for m in Method]}")
    for key in ("step", "rel_tol", "abs_tol", "t_max", "z_epsilon",
                "fp_epsilon", "blowup_bound"):
        value = _number(section, key, "integrator", None, positive=True)
        if value is not None:
            kwargs[key] = value
    if "z_epsilon" in section and structure is not None and not structure.is_singular:
        warnings.append("integrator.z_epsilon has no effect for canonical "
                        "structures and is ignored")
    try:
        return IntegratorConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"integrator: {exc}")


def _expand_axis_spec(spec, path) -> list:
    spec = _require_mapping(spec, path)
    _reject_unknown(spec, _AXIS_SPEC_KEYS, path)
    if "values" in spec:
        values = spec["values"]
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{path}.values must be a nonempty list")
        return [float(v) for v in values]
    for key in ("start", "stop", "count"):
        if key not in spec:
            raise ConfigError(f"{path}.{key} is required for a range spec")
    count = spec["count"]
    if not isinstance(count, int) or count < 1:
        raise ConfigError(f"{path}.count must be a positive integer")
    return list(np.linspace(float(spec["start"]), float(spec["stop"]), count))


def _build_initials(section, n) -> list:
    if isinstance(section, dict):
        _reject_unknown(section, {"grid"}, "initial")
        grid = _require_mapping(section.get("grid"), "initial.grid")
        _reject_unknown(grid, {"q", "p"}, "initial.grid")
        if n != 1:
            raise ConfigError("initial.grid is only supported for n=1; "
                              "list initial conditions explicitly")
        qs = _expand_axis_spec(grid.get("q", {"values": [0.0]}), "initial.grid.q")
        ps = _expand_axis_spec(grid.get("p", {"values": [0.0]}), "initial.grid.p")
        return [PhaseState(q, p) for q in qs for p in ps]
    if not isinstance(section, list) or not section:
        raise ConfigError("initial must be a nonempty list of states or a grid spec")
    states = []
    for i, row in enumerate(section):
        if not isinstance(row, list) or len(row) != 2 * n:
            raise ConfigError(f"initial[{i}] must be a flat list of length {2 * n} "
                              f"(q1..q{n}, p1..p{n})")
        values = [float(v) for v in row]
        states.append(PhaseState(values[:n], values[n:]))
    return states


def parse_config(document, command: Optional[str] = None) -> RunConfig:
    """Validate a JSON document (text or parsed object) into a RunConfig."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}")
    document = _require_mapping(document, "config")
    declared = document.get("command")
    if command is None:
        command = declared
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {list(COMMANDS)}, got {command!r}")
    if declared is not None and declared != command:
        raise ConfigError(f"config declares command {declared!r} but {command!r} was invoked")
    _reject_unknown(document, _TOP_KEYS[command], "")

    cfg = RunConfig(command=command, raw=document)
    cfg.out_dir = document.get("out_dir")
    if cfg.out_dir is not None and not isinstance(cfg.out_dir, str):
        raise ConfigError("out_dir must be a string")

    if command == "timescale":
        return _parse_timescale(document, cfg)
    if command == "liftcheck":
        return _parse_liftcheck(document, cfg)

    if "structure" not in document:
        raise ConfigError("structure section is required")
    if "potential" not in document:
        raise ConfigError("potential section is required")
    cfg.structure = _build_structure(document["structure"], cfg.warnings)
    if cfg.structure.is_extended:
        raise ConfigError("structure.kind: extended structures run through "
                          "the timescale command")
    cfg.potential, cfg.axis = _build_potential(document["potential"])
    if cfg.axis >= cfg.structure.n:
        raise ConfigError(f"potential.axis {cfg.axis} out of range for n={cfg.structure.n}")
    cfg.hamiltonian = HamiltonianSpec(potential=cfg.potential, n=cfg.structure.n,
                                      axis=cfg.axis)
    if "initial" not in document:
        raise ConfigError("initial section is required")
    cfg.initials = _build_initials(document["initial"], cfg.structure.n)
    cfg.integrator = _build_integrator(document.get("integrator"), cfg.structure,
                                       cfg.warnings)
    if command == "portrait":
        backward = document.get("backward", True)
        if not isinstance(backward, bool):
            raise ConfigError("backward must be a boolean")
        cfg.backward = backward
    if command == "oracle-compare":
        _oracle_for(cfg)  # raises early when no closed form exists
    return cfg


def _parse_timescale(document, cfg: RunConfig) -> RunConfig:
    if "potential" not in document:
        raise ConfigError("potential section is required")
    cfg.potential, cfg.axis = _build_potential(document["potential"])
    cfg.friction = _number(document, "friction", "config", None, positive=True)
    if cfg.friction is None:
        raise ConfigError("friction must be a positive number")
    clock = document.get("clock", "t")
    if clock not in ("t", "s"):
        raise ConfigError("clock must be 't' or 's'")
    cfg.clock = clock
    cfg.horizon = _number(document, "horizon", "config", None, positive=True)
    if cfg.horizon is None:
        raise ConfigError("horizon must be a positive number")
    n = document.get("n", 1)
    if not isinstance(n, int) or n < 1:
        raise ConfigError("n must be a positive integer")
    cfg.n = n
    if cfg.axis >= n:
        raise ConfigError(f"potential.axis {cfg.axis} out of range for n={n}")
    initial = document.get("initial")
    if not isinstance(initial, list) or len(initial) != 2 * n:
        raise ConfigError(f"initial must be a flat list of length {2 * n} "
                          f"(q1..q{n}, v1..v{n})")
    values = [float(v) for v in initial]
    cfg.initial_qv = (np.array(values[:n]), np.array(values[n:]))
    cfg.e0 = _number(document, "e0", "config", None)
    if "integrator" in document:
        cfg.integrator = _build_integrator(document["integrator"], None, cfg.warnings)
    return cfg


def _parse_liftcheck(document, cfg: RunConfig) -> RunConfig:
    if "structure" not in document:
        raise ConfigError("structure section is required")
    cfg.structure = _build_structure(document["structure"], cfg.warnings)
    has_potential = "potential" in document
    has_toric = "toric" in document
    if has_potential == has_toric:
        raise ConfigError("provide exactly one of potential or toric")
    if has_potential:
        cfg.potential, cfg.axis = _build_potential(document["potential"])
        cfg.hamiltonian = HamiltonianSpec(potential=cfg.potential,
                                          n=cfg.structure.n, axis=cfg.axis)
    else:
        toric = _require_mapping(document["toric"], "toric")
        _reject_unknown(toric, {"c"}, "toric")
        cfg.toric_c = _number(toric, "c", "toric", cfg.structure.modular_weight)
    cfg.base_points = document.get("base_points", [0.0])
    cfg.fiber_samples = document.get("fiber_samples", [1.0, 2.0])
    if not isinstance(cfg.base_points, list) or not cfg.base_points:
        raise ConfigError("base_points must be a nonempty list")
    if not isinstance(cfg.fiber_samples, list) or len(cfg.fiber_samples) < 2:
        raise ConfigError("fiber_samples must contain at least two samples")
    tol = _number(document, "tol", "config", 1e-9, positive=True)
    cfg.tol = tol
    return cfg


# ---------------------------------------------------------------------------
# artifact writers

def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _state_payload(state: PhaseState):
    payload = {"q": [float(v) for v in state.q], "p": [float(v) for v in state.p]}
    if state.extra is not None:
        payload["extra"] = [float(v) for v in state.extra]
    return payload


def _config_hash(raw: dict) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _write_extended_csv(path, traj: Trajectory, clock: str) -> None:
    n = traj.n
    cols = (["t"] + [f"q{i+1}" for i in range(n)] + [f"p{i+1}" for i in range(n)]
            + ["t_ext", "E", "clock"])
    lines = [",".join(cols)]
    for t, y in zip(traj.times, traj.ys):
        lines.append(",".join([_fmt(t), *(_fmt(v) for v in y), clock]))
    ev = traj.terminal_event
    lines.append(f"# event: {ev.kind.value} at t={_fmt(ev.time)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_realtime_csv(path, rt) -> None:
    n = rt.q.shape[1]
    cols = ["t"] + [f"q{i+1}" for i in range(n)] + [f"v{i+1}" for i in range(n)]
    lines = [",".join(cols)]
    for i, t in enumerate(rt.times):
        lines.append(",".join(_fmt(v) for v in (t, *rt.q[i], *rt.velocity[i])))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# command runners

def _run_simulate(cfg: RunConfig, out_dir: str) -> list:
    records = []
    for i, initial in enumerate(cfg.initials):
        name = f"traj_{i:03d}.csv"
        record = {"index": i, "initial": _state_payload(initial)}
        try:
            traj = integrate(cfg.structure, cfg.hamiltonian, initial, cfg.integrator)
            traj.write_csv(os.path.join(out_dir, name))
            record.update(status="ok", file=name,
                          event={"kind": traj.terminal_event.kind.value,
                                 "t": float(traj.terminal_event.time)})
        except Exception as exc:
            record.update(status=f"error: {type(exc).__name__}: {exc}")
        records.append(record)
    return records


def _classification_payload(cls):
    payload = {"kind": cls.kind.value}
    if cls.period is not None:
        payload["period"] = float(cls.period)
    if cls.limit_state is not None:
        payload["limit_state"] = _state_payload(cls.limit_state)
    return payload


def _run_portrait(cfg: RunConfig, out_dir: str) -> list:
    results = phase_portrait(cfg.structure, cfg.hamiltonian, cfg.initials,
                             cfg.integrator, include_backward=cfg.backward)
    records = []
    index = []
    for i, rec in enumerate(results):
        record = {"index": i, "initial": _state_payload(rec.initial)}
        files = []
        if rec.error is not None:
            record["status"] = f"error: {rec.error}"
        else:
            fwd = f"traj_{i:03d}_forward.csv"
            rec.trajectory.write_csv(os.path.join(out_dir, fwd))
            files.append(fwd)
            if rec.backward is not None:
                bwd = f"traj_{i:03d}_backward.csv"
                rec.backward.write_csv(os.path.join(out_dir, bwd))
                files.append(bwd)
            record.update(status="ok",
                          event={"kind": rec.trajectory.terminal_event.kind.value,
                                 "t": float(rec.trajectory.terminal_event.time)})
        record["files"] = files
        record["classification"] = _classification_payload(rec.classification)
        records.append(record)
        index.append({"index": i, "initial": _state_payload(rec.initial),
                      "classification": _classification_payload(rec.classification),
                      "files": files})
    _write_json(os.path.join(out_dir, "portrait.json"), index)
    return records


def _run_classify(cfg: RunConfig, out_dir: str) -> list:
    records = []
    for i, initial in enumerate(cfg.initials):
        record = {"index": i, "initial": _state_payload(initial)}
        try:
            traj = integrate(cfg.structure, cfg.hamiltonian, initial, cfg.integrator)
            cls = classify_orbit(traj)
            record.update(status="ok", classification=_classification_payload(cls))
        except Exception as exc:
            record.update(status=f"error: {type(exc).__name__}: {exc}")
        records.append(record)
    _write_json(os.path.join(out_dir, "classifications.json"),
                [{k: r[k] for k in r if k != "index"} for r in records])
    return records


def _oracle_for(cfg: RunConfig):
    kind = cfg.structure.kind
    family = cfg.potential.family
    lam = cfg.potential.lam
    if cfg.structure.n != 1:
        raise ConfigError("oracle-compare supports n=1 systems")
    if kind is StructureKind.TWISTED_B and family is PotentialFamily.LINEAR:
        def oracle(initial, times):
            return stokes_exact(initial.q[0], initial.p[0], lam, times)
        return oracle
    if kind is StructureKind.CANONICAL and family is PotentialFamily.LINEAR:
        def oracle(initial, times):
            return classical_parabola(initial.q[0], initial.p[0], lam, times)
        return oracle
    if kind is StructureKind.TWISTED_B and family is PotentialFamily.PURE_QUADRATIC:
        def oracle(initial, times):
            p0 = initial.p[0]
            if p0 == 0.0:
                return np.full_like(times, initial.q[0]), np.zeros_like(times)
            sign = 1.0 if p0 > 0 else -1.0
            c1, c2 = quadratic_tanh_constants(initial.q[0], abs(p0), lam)
            return (quadratic_tanh(c1, c2, lam, times),
                    sign * quadratic_tanh_momentum(c1, c2, lam, times))
        return oracle
    raise ConfigError(f"no closed-form oracle for structure.kind={kind.value} "
                      f"with potential.family={family.value}")


def _run_oracle_compare(cfg: RunConfig, out_dir: str) -> list:
    oracle = _oracle_for(cfg)
    records = []
    summary = []
    for i, initial in enumerate(cfg.initials):
        record = {"index": i, "initial": _state_payload(initial)}
        try:
            traj = integrate(cfg.structure, cfg.hamiltonian, initial, cfg.integrator)
            q_exact, p_exact = oracle(initial, traj.times)
            name = f"compare_{i:03d}.csv"
            lines = ["t,q_sim,p_sim,q_exact,p_exact"]
            for j, t in enumerate(traj.times):
                lines.append(",".join(_fmt(v) for v in (
                    t, traj.q[j, 0], traj.p[j, 0], q_exact[j], p_exact[j])))
            with open(os.path.join(out_dir, name), "w") as fh:
                fh.write("\n".join(lines) + "\n")
            err_q = float(np.max(np.abs(traj.q[:, 0] - q_exact)))
            err_p = float(np.max(np.abs(traj.p[:, 0] - p_exact)))
            record.update(status="ok", file=name, max_abs_q_error=err_q,
                          max_abs_p_error=err_p)
            summary.append({"initial": _state_payload(initial), "file": name,
                            "max_abs_q_error": err_q, "max_abs_p_error": err_p})
        except Exception as exc:
            record.update(status=f"error: {type(exc).__name__}: {exc}")
        records.append(record)
    _write_json(os.path.join(out_dir, "summary.json"), summary)
    return records


def _run_timescale(cfg: RunConfig, out_dir: str) -> list:
    q0, v0 = cfg.initial_qv
    record = {"index": 0, "initial": {"q": [float(v) for v in q0],
                                      "v": [float(v) for v in v0]}}
    try:
        runner = run_rescaled if cfg.clock == "t" else run_s_coordinates
        ext = runner(cfg.potential, cfg.friction, q0, v0, cfg.horizon,
                     config=cfg.integrator, axis=cfg.axis, e0=cfg.e0)
        _write_extended_csv(os.path.join(out_dir, "extended_000.csv"),
                            ext.trajectory, cfg.clock)
        rt = reconstruct_real_time(ext)
        _write_realtime_csv(os.path.join(out_dir, "realtime_000.csv"), rt)
        record.update(status="ok", files=["extended_000.csv", "realtime_000.csv"],
                      clock=cfg.clock,
                      event={"kind": ext.trajectory.terminal_event.kind.value,
                             "t": float(ext.trajectory.terminal_event.time)})
    except Exception as exc:
        record.update(status=f"error: {type(exc).__name__}: {exc}")
    return [record]


def _run_liftcheck(cfg: RunConfig, out_dir: str) -> list:
    if cfg.toric_c is not None:
        h = toric_moment_field(cfg.structure, cfg.toric_c)
    else:
        h = cfg.hamiltonian
    verdict = projectability_test(cfg.structure, h, cfg.base_points,
                                  cfg.fiber_samples, cfg.tol)
    payload = {"verdict": verdict.verdict.value, "tol": cfg.tol, "witness": None}
    if verdict.witness is not None:
        payload["witness"] = {
            "state_a": _state_payload(verdict.witness.state_a),
            "state_b": _state_payload(verdict.witness.state_b),
            "difference": float(verdict.witness.difference),
        }
    _write_json(os.path.join(out_dir, "verdict.json"), payload)
    print(json.dumps(payload, sort_keys=True, indent=2))
    return [{"index": 0, "status": "ok", "verdict": verdict.verdict.value,
             "file": "verdict.json"}]


_RUNNERS = {
    "simulate": _run_simulate,
    "portrait": _run_portrait,
    "classify": _run_classify,
    "oracle-compare": _run_oracle_compare,
    "timescale": _run_timescale,
    "liftcheck": _run_liftcheck,
}


def run(cfg: RunConfig, out_dir: Optional[str] = None,
        seed: Optional[int] = None) -> int:
    """Execute a validated configuration; returns the process exit status."""
    out_dir = out_dir or cfg.out_dir or "out"
    os.makedirs(out_dir, exist_ok=True)
    logger.info("running %s into %s", cfg.command, out_dir)
    records = _RUNNERS[cfg.command](cfg, out_dir)
    manifest = {
        "command": cfg.command,
        "config_sha256": _config_hash(cfg.raw),
        "version": __version__,
        "seed": seed,
        "warnings": cfg.warnings,
        "records": records,
    }
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)
    failed = [r for r in records if not str(r.get("status", "")).startswith("ok")]
    for r in failed:
        logger.warning("record %s failed: %s", r.get("index"), r.get("status"))
    return 1 if failed else 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bhamsys",
        description="Simulate Hamiltonian dynamics on singular phase spaces.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="path to a JSON run configuration")
        cmd.add_argument("--out", default=None, help="output directory (overrides out_dir)")
        cmd.add_argument("--seed", type=int, default=None,
                         help="reserved; recorded in the manifest")
        if name == "timescale":
            cmd.add_argument("--friction", type=float, default=None)
            cmd.add_argument("--family", default=None)
            cmd.add_argument("--clock", choices=("t", "s"), default=None)
            cmd.add_argument("--horizon", type=float, default=None)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=getattr(logging, os.environ.get("BHAMSYS_LOG", "WARNING").upper(), logging.WARNING),
        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            document = json.load(fh)
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"config error: invalid JSON: {exc}", file=sys.stderr)
        return 2
    if args.command == "timescale":
        if not isinstance(document, dict):
            print("config error: config must be a JSON object", file=sys.stderr)
            return 2
        if args.friction is not None:
            document["friction"] = args.friction
        if args.clock is not None:
            document["clock"] = args.clock
        if args.horizon is not None:
            document["horizon"] = args.horizon
        if args.family is not None:
            document.setdefault("potential", {})["family"] = args.family
    try:
        cfg = parse_config(document, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(cfg, out_dir=args.out, seed=args.seed)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
