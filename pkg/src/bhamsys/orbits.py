"""Qualitative classification of trajectories and phase-portrait sampling.

Under the twisted structure, orbits that would cross the momentum axis in
the classical picture break into escape orbits asymptotic to the critical
set, punctual orbits on the set itself, and (for the pure quadratic
potential) closed curves assembled from two heteroclinic halves joined by
two fixed points.  This module detects those types:

* ``fixed_point``            -- the field vanished at the initial state.
* ``escape_orbit``           -- the run terminated in the Z neighborhood.
* ``periodic``               -- the state returns to its initial value (angles
  compared on the circle) with nonvanishing speed.  Detected by a first
  return through the hyperplane normal to the initial velocity, refined by
  bisection on a cubic Hermite interpolant between accepted steps.
* ``heteroclinic_segment``   -- a two-sided trajectory whose both ends reached
  the Z neighborhood.
* ``unbounded``              -- the run blew up.
* ``undetermined``           -- none of the above within the horizon.  Orbits
  on (or extremely close to) a separatrix land here by construction: they
  neither return nor reach Z in finite time, and no guess is made.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .geometry import PhaseState, PhaseStructure, StructureKind
from .hamiltonians import HamiltonianSpec, PotentialFamily
from .integrate import (EventKind, IntegratorConfig, Trajectory, field_function,
                        integrate, merge_backward_forward)

__all__ = [
    "OrbitKind",
    "OrbitClassification",
    "SingularPeriodicOrbit",
    "PortraitRecord",
    "classify_orbit",
    "phase_portrait",
    "level_set_residual",
    "assemble_singular_periodic",
]

#: Max-norm ball (angles on the circle) for the first-return test.
RETURN_BALL = 1e-6

#: A detected period must exceed this many median steps.
MIN_PERIOD_STEPS = 10


class OrbitKind(str, Enum):
    FIXED_POINT = "fixed_point"
    ESCAPE_ORBIT = "escape_orbit"
    PERIODIC = "periodic"
    UNBOUNDED = "unbounded"
    HETEROCLINIC_SEGMENT = "heteroclinic_segment"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class OrbitClassification:
    kind: OrbitKind
    period: Optional[float] = None
    limit_state: Optional[PhaseState] = None

    def __post_init__(self):
        if (self.kind is OrbitKind.PERIODIC) != (self.period is not None):
            raise ValueError("period must be present exactly for periodic orbits")


@dataclass(frozen=True)
class SingularPeriodicOrbit:
    """Closed invariant set made of two heteroclinic halves plus the two
    fixed points on the critical set joining them."""

    upper_segment: Trajectory
    lower_segment: Trajectory
    endpoints: tuple


@dataclass
class PortraitRecord:
    initial: PhaseState
    trajectory: Optional[Trajectory]
    backward: Optional[Trajectory]
    classification: OrbitClassification
    error: Optional[str] = None


def _angular_delta(ys: np.ndarray, x0: np.ndarray, angular_idx: np.ndarray) -> np.ndarray:
    """Row-wise difference to x0 with angular coordinates wrapped to (-pi, pi]."""
    d = ys - x0
    if angular_idx.size:
        d[..., angular_idx] = np.mod(d[..., angular_idx] + np.pi, 2 * np.pi) - np.pi
    return d


def _hermite(y0, y1, f0, f1, dt, tau):
    u = tau / dt
    h00 = (1 + 2 * u) * (1 - u) ** 2
    h10 = u * (1 - u) ** 2
    h01 = u * u * (3 - 2 * u)
    h11 = u * u * (u - 1)
    return h00 * y0 + h10 * dt * f0 + h01 * y1 + h11 * dt * f1


def _first_return(traj: Trajectory, structure: PhaseStructure, h,
                  ball: float, min_steps: int) -> Optional[float]:
    """Time of first return to the initial state, or None."""
    if len(traj) < 3:
        return None
    x0 = traj.ys[0]
    f = field_function(structure, h)
    v0 = f(x0)
    speed = float(np.linalg.norm(v0))
    if speed < 1e-12:
        return None
    v0n = v0 / speed

    angular_idx = np.array([i for i, a in enumerate(structure.angular_mask) if a], dtype=int)
    deltas = _angular_delta(traj.ys.copy(), x0, angular_idx)
    progress = deltas @ v0n
    dist = np.max(np.abs(deltas), axis=1)
    gate = max(0.05 * (1.0 + float(np.max(np.abs(x0)))), 100.0 * ball)

    med_dt = float(np.median(np.diff(traj.times)))
    t_floor = min_steps * med_dt

    for i in range(1, len(traj)):
        if traj.times[i] < t_floor:
            continue
        if not (progress[i - 1] < 0.0 <= progress[i]):
            continue
        if min(dist[i - 1], dist[i]) > gate:
            continue
        y0, y1 = traj.ys[i - 1], traj.ys[i]
        f0, f1 = f(y0), f(y1)
        dt = traj.times[i] - traj.times[i - 1]

        def prog(tau):
            y = _hermite(y0, y1, f0, f1, dt, tau)
            return float(_angular_delta(y, x0, angular_idx) @ v0n)

        lo, hi = 0.0, dt
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if prog(mid) < 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-14 * max(1.0, dt):
                break
        tau = 0.5 * (lo + hi)
        y_ret = _hermite(y0, y1, f0, f1, dt, tau)
        d_ret = float(np.max(np.abs(_angular_delta(y_ret, x0, angular_idx))))
        t_ret = traj.times[i - 1] + tau
        if d_ret < ball and t_ret >= t_floor and np.max(np.abs(f(y_ret))) > 1e-12:
            return float(t_ret)
    return None


def classify_orbit(traj: Trajectory, structure: Optional[PhaseStructure] = None,
                   h=None, ball: float = RETURN_BALL,
                   min_period_steps: int = MIN_PERIOD_STEPS) -> OrbitClassification:
    """Assign one of the qualitative orbit types to a trajectory."""
    if structure is None:
        structure = traj.structure
    if h is None:
        h = traj.hamiltonian
    terminal = traj.terminal_event

    if terminal.kind is EventKind.FIXED_POINT and len(traj) == 1:
        return OrbitClassification(OrbitKind.FIXED_POINT)
    if terminal.kind is EventKind.REACHED_Z:
        first = traj.events[0]
        if first is not terminal and first.kind is EventKind.REACHED_Z and first.time < 0:
            return OrbitClassification(OrbitKind.HETEROCLINIC_SEGMENT,
                                       limit_state=traj.final_state)
        return OrbitClassification(OrbitKind.ESCAPE_ORBIT, limit_state=traj.final_state)
    period = _first_return(traj, structure, h, ball, min_period_steps)
    if period is not None:
        return OrbitClassification(OrbitKind.PERIODIC, period=period)
    if terminal.kind is EventKind.BLOWUP:
        return OrbitClassification(OrbitKind.UNBOUNDED)
    return OrbitClassification(OrbitKind.UNDETERMINED)


def phase_portrait(structure: PhaseStructure, h, grid, config: IntegratorConfig,
                   include_backward: bool = True) -> list:
    """Integrate and classify every initial condition in ``grid``.

    Backward runs integrate the negated field.  Per-record failures are
    recorded on the record and never abort the batch; the output order
    matches the input order.
    """
    if not grid:
        raise ValueError("grid must contain at least one initial condition")
    records = []
    for initial in grid:
        try:
            forward = integrate(structure, h, initial, config)
            backward = None
            if include_backward:
                backward = integrate(structure, h, initial, config, direction=-1)
            cls = classify_orbit(forward, structure, h)
            records.append(PortraitRecord(initial, forward, backward, cls))
        except Exception as exc:  # per-record isolation
            records.append(PortraitRecord(
                initial, None, None, OrbitClassification(OrbitKind.UNDETERMINED),
                error=f"{type(exc).__name__}: {exc}"))
    return records


def level_set_residual(traj: Trajectory, h=None) -> float:
    """Max deviation of H from its initial value along the trajectory."""
    if h is None:
        h = traj.hamiltonian
    values = np.array([h.value(traj.state(i)) for i in range(len(traj))])
    return float(np.max(np.abs(values - values[0])))


def assemble_singular_periodic(structure: PhaseStructure, h: HamiltonianSpec,
                               energy: float,
                               config: Optional[IntegratorConfig] = None) -> SingularPeriodicOrbit:
    """Assemble the closed orbit of the twisted pure-quadratic system at the
    given energy: two heteroclinic halves launched from the momentum axis,
    each integrated in both time directions until the Z neighborhood, with
    the two limit endpoints on the critical set.

    The endpoints sit at ``q = +/- 2 sqrt(energy/lam)`` and are returned with
    the singular momentum projected to zero.
    """
    if structure.kind is not StructureKind.TWISTED_B:
        raise ValueError("singular periodic orbits live on the twisted structure")
    if h.potential.family is not PotentialFamily.PURE_QUADRATIC:
        raise ValueError("expected the pure_quadratic potential family")
    if not energy > 0.0:
        raise ValueError("energy must be > 0 (the zero-energy orbit degenerates to a point)")

    lam = h.potential.lam
    p0 = math.sqrt(2.0 * energy)
    if config is None:
        z_eps = 1e-6
        rate = math.sqrt(lam * energy)
        t_need = math.log(p0 / z_eps) / rate
        config = IntegratorConfig(step=1e-3, t_max=2.0 * t_need + 5.0, z_epsilon=z_eps)

    k = structure.singular_index

    def half_orbit(sign):
        q_init = np.zeros(structure.n)
        p_init = np.zeros(structure.n)
        p_init[k] = sign * p0
        start = PhaseState(q=q_init, p=p_init)
        fwd = integrate(structure, h, start, config)
        bwd = integrate(structure, h, start, config, direction=-1)
        for run, label in ((fwd, "forward"), (bwd, "backward")):
            if run.terminal_event.kind is not EventKind.REACHED_Z:
                raise RuntimeError(
                    f"{label} segment ended with {run.terminal_event.kind.value}, "
                    "not in the Z neighborhood; increase t_max")
        return merge_backward_forward(bwd, fwd)

    upper = half_orbit(+1)
    lower = half_orbit(-1)

    def on_z(state: PhaseState) -> PhaseState:
        p = state.p.copy()
        p[k] = 0.0
        return PhaseState(q=state.q, p=p)

    endpoints = (on_z(upper.state(0)), on_z(upper.final_state))
    return SingularPeriodicOrbit(upper_segment=upper, lower_segment=lower,
                                 endpoints=endpoints)
