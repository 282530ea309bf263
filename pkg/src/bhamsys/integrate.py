"""Explicit Runge-Kutta integration of the singular Hamiltonian fields.

Two schemes are provided: classic fixed-step RK4 and an adaptive
Dormand-Prince 5(4) embedded pair.  Both are explicit: the fields are smooth
on all of phase space (the bivector degenerates instead of blowing up), and
correctness is checked against closed-form oracles rather than long-time
structure preservation.

Runs terminate on the first of four events:

* ``reached_Z_neighborhood`` -- the defining function of the critical set
  drops below ``z_epsilon`` in absolute value (armed only when the initial
  state starts outside that neighborhood).  The event time is localized by
  bisection on the linear interpolant between accepted steps.
* ``fixed_point``            -- the field magnitude falls below ``fp_epsilon``.
* ``blowup``                 -- a state component exceeds ``blowup_bound`` or a
  field evaluation stops being finite.
* ``t_max_reached``          -- the time horizon is exhausted.

Near the critical set the adaptive controller additionally clamps the step
so the singular coordinate cannot shrink by more than half per step, which
prevents overshooting across Z.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .geometry import (PhaseState, PhaseStructure, StructureKind,
                       hamiltonian_vector_field)

__all__ = [
    "Method",
    "EventKind",
    "Event",
    "IntegratorConfig",
    "Trajectory",
    "BlowupError",
    "field_function",
    "step",
    "integrate",
    "merge_backward_forward",
    "sign_preservation_check",
]

#: Hard limits of the adaptive step controller.
MIN_STEP = 1e-12
STEP_SAFETY = 0.9
STEP_SHRINK = 0.2
STEP_GROW = 5.0

#: Bisection tolerance (in time) for event localization.
EVENT_TIME_TOL = 1e-10


class BlowupError(RuntimeError):
    """A field or state evaluation left the finite range."""


class Method(str, Enum):
    RK4_FIXED = "rk4_fixed"
    RK_ADAPTIVE = "rk_adaptive"


class EventKind(str, Enum):
    REACHED_Z = "reached_Z_neighborhood"
    FIXED_POINT = "fixed_point"
    BLOWUP = "blowup"
    T_MAX = "t_max_reached"


@dataclass(frozen=True)
class Event:
    time: float
    kind: EventKind


@dataclass(frozen=True)
class IntegratorConfig:
    method: Method = Method.RK4_FIXED
    step: float = 1e-3
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    t_max: float = 20.0
    z_epsilon: float = 1e-6
    fp_epsilon: float = 1e-12
    blowup_bound: float = 1e9

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        for name in ("step", "rel_tol", "abs_tol", "t_max", "z_epsilon",
                     "fp_epsilon", "blowup_bound"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be > 0")
        if not self.step < self.t_max:
            raise ValueError("step must be smaller than t_max")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-stamped phase samples with event annotations.

    ``ys`` has one flat phase vector per row in the coordinate order of
    :mod:`bhamsys.geometry`.  ``events`` holds at least one entry and its
    last element is the terminal event of the run.
    """

    times: np.ndarray
    ys: np.ndarray
    events: tuple
    structure: PhaseStructure
    hamiltonian: object

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if times.ndim != 1 or ys.ndim != 2 or ys.shape[0] != times.size:
            raise ValueError("times and ys must have matching leading length")
        if times.size == 0:
            raise ValueError("trajectory must contain at least one sample")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not self.events:
            raise ValueError("trajectory must carry a terminal event")
        times.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "events", tuple(self.events))

    def __len__(self) -> int:
        return self.times.size

    @property
    def n(self) -> int:
        return self.structure.n

    @property
    def extended(self) -> bool:
        return self.structure.is_extended

    @property
    def terminal_event(self) -> Event:
        return self.events[-1]

    @property
    def q(self) -> np.ndarray:
        return self.ys[:, :self.n]

    @property
    def p(self) -> np.ndarray:
        return self.ys[:, self.n:2 * self.n]

    @property
    def extra(self) -> Optional[np.ndarray]:
        return self.ys[:, 2 * self.n:] if self.extended else None

    def state(self, i: int) -> PhaseState:
        return PhaseState.from_array(self.ys[i], self.n, self.extended)

    @property
    def initial_state(self) -> PhaseState:
        return self.state(0)

    @property
    def final_state(self) -> PhaseState:
        return self.state(-1)

    def write_csv(self, path) -> None:
        """Serialize as CSV: header ``t,q1..qn,p1..pn[,t_ext,E]``, floats with
        17 significant digits, and the terminal event as a trailing comment."""
        n = self.n
        cols = ["t"] + [f"q{i+1}" for i in range(n)] + [f"p{i+1}" for i in range(n)]
        if self.extended:
            cols += ["t_ext", "E"]
        lines = [",".join(cols)]
        for t, y in zip(self.times, self.ys):
            lines.append(",".join(f"{v:.17g}" for v in (t, *y)))
        ev = self.terminal_event
        lines.append(f"# event: {ev.kind.value} at t={ev.time:.17g}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# steppers

def field_function(structure: PhaseStructure, h, direction: int = 1) -> Callable:
    """Flat-array view of the Hamiltonian field, for steppers and scans."""
    n = structure.n
    ext = structure.is_extended

    if direction == 1:
        def f(y):
            return hamiltonian_vector_field(structure, h, PhaseState.from_array(y, n, ext))
    else:
        def f(y):
            return -hamiltonian_vector_field(structure, h, PhaseState.from_array(y, n, ext))
    return f


def _rk4_step(f, y, dt, k1):
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# Dormand-Prince 5(4) tableau.
_DP_A = (
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_DP_ERR = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _dp_step(f, y, dt, k1):
    """One Dormand-Prince trial step; returns (y5, error_estimate, f(y5))."""
    ks = [k1]
    for row in _DP_A:
        acc = sum(a * k for a, k in zip(row, ks))
        ks.append(f(y + dt * acc))
    y5 = y + dt * sum(b * k for b, k in zip(_DP_B5, ks))
    k7 = f(y5)
    ks.append(k7)
    err = dt * sum(e * k for e, k in zip(_DP_ERR, ks))
    return y5, err, k7


def step(structure: PhaseStructure, h, state: PhaseState, dt: float) -> PhaseState:
    """One explicit RK4 step of the Hamiltonian field (4th-order accurate)."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    f = field_function(structure, h, 1)
    y = state.to_array()
    y_new = _rk4_step(f, y, dt, f(y))
    if not np.all(np.isfinite(y_new)):
        raise BlowupError("state became non-finite during the step")
    return PhaseState.from_array(y_new, structure.n, structure.is_extended)


# ---------------------------------------------------------------------------
# event helpers

def _defining_index(structure: PhaseStructure) -> int:
    """Flat position of the coordinate cutting out the critical set."""
    if structure.kind is StructureKind.TWISTED_B:
        return structure.n + structure.singular_index
    if structure.kind is StructureKind.NONTWISTED_B:
        return structure.singular_index
    if structure.kind is StructureKind.EXTENDED_B_S:
        return 2 * structure.n
    raise ValueError("structure has no critical set")


def _locate_z_crossing(d0: float, d1: float, z_eps: float, dt: float) -> float:
    """First tau in (0, dt] where |d| <= z_eps on the linear interpolant.

    Assumes |d0| > z_eps and that the step fires the event, i.e. d changes
    sign or |d1| <= z_eps; |d| is then monotone on the bracketing interval.
    """
    lo, hi = 0.0, dt
    if (d0 > 0.0) != (d1 > 0.0):
        hi = dt * d0 / (d0 - d1)
    slope = (d1 - d0) / dt
    while hi - lo > EVENT_TIME_TOL:
        mid = 0.5 * (lo + hi)
        if abs(d0 + slope * mid) <= z_eps:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# main driver

def integrate(structure: PhaseStructure, h, initial: PhaseState,
              config: Optional[IntegratorConfig] = None,
              direction: int = 1) -> Trajectory:
    """Advance the Hamiltonian field from ``initial`` until an event fires.

    ``direction=-1`` integrates the negated field, which realizes
    backward-time orbits as forward runs.  The returned trajectory records
    every accepted step; for singular structures started off the critical
    set, the sign of the defining function is preserved along the whole run
    (the Z event fires before any crossing).
    """
    if config is None:
        config = IntegratorConfig()
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    if not initial.is_finite():
        raise ValueError("initial state must be finite")

    f = field_function(structure, h, direction)
    y = initial.to_array()
    f_cur = f(y)

    times = [0.0]
    samples = [y]
    events = []

    def finish(event):
        events.append(event)
        return Trajectory(times=np.array(times), ys=np.array(samples),
                          events=tuple(events), structure=structure, hamiltonian=h)

    if np.max(np.abs(f_cur)) < config.fp_epsilon:
        return finish(Event(0.0, EventKind.FIXED_POINT))

    z_armed = False
    z_idx = -1
    if structure.is_singular:
        z_idx = _defining_index(structure)
        z_armed = abs(y[z_idx]) >= config.z_epsilon

    adaptive = config.method is Method.RK_ADAPTIVE
    t = 0.0
    dt_next = config.step
    step_count = 0

    while True:
        remaining = config.t_max - t
        if remaining <= config.t_max * 1e-14:
            return finish(Event(config.t_max, EventKind.T_MAX))

        if adaptive:
            accepted = None
            dt = min(max(dt_next, MIN_STEP), config.t_max / 10.0, remaining)
            while accepted is None:
                if z_armed:
                    rate = abs(f_cur[z_idx])
                    if rate > 0.0:
                        dt = min(dt, abs(y[z_idx]) / (2.0 * rate))
                dt = max(dt, MIN_STEP)
                try:
                    y_trial, err, k_end = _dp_step(f, y, dt, f_cur)
                except (BlowupError, OverflowError, FloatingPointError):
                    y_trial = np.array([np.nan])
                if not np.all(np.isfinite(y_trial)):
                    if dt <= 2 * MIN_STEP:
                        return finish(Event(t + dt, EventKind.BLOWUP))
                    dt = max(0.25 * dt, MIN_STEP)
                    continue
                scale = config.abs_tol + config.rel_tol * np.maximum(np.abs(y), np.abs(y_trial))
                err_norm = float(np.max(np.abs(err) / scale))
                if err_norm <= 1.0 or dt <= 2 * MIN_STEP:
                    accepted = (y_trial, k_end)
                    factor = STEP_GROW if err_norm == 0.0 else min(
                        STEP_GROW, max(STEP_SHRINK, STEP_SAFETY * err_norm ** -0.2))
                    dt_next = dt * factor
                else:
                    dt = dt * max(STEP_SHRINK, STEP_SAFETY * err_norm ** -0.2)
            y_new, f_new = accepted
            t_new = t + dt
            if remaining - dt <= config.t_max * 1e-14:
                t_new = config.t_max
        else:
            step_count += 1
            t_new = step_count * config.step
            if t_new >= config.t_max - config.step * 1e-9:
                t_new = config.t_max
            dt = t_new - t
            try:
                y_new = _rk4_step(f, y, dt, f_cur)
                f_new = f(y_new) if np.all(np.isfinite(y_new)) else None
            except (BlowupError, OverflowError, FloatingPointError):
                return finish(Event(t_new, EventKind.BLOWUP))
            if not np.all(np.isfinite(y_new)):
                return finish(Event(t_new, EventKind.BLOWUP))

        if z_armed:
            d0, d1 = y[z_idx], y_new[z_idx]
            if abs(d1) <= config.z_epsilon or (d0 > 0.0) != (d1 > 0.0):
                tau = _locate_z_crossing(d0, d1, config.z_epsilon, dt)
                y_event = y + (y_new - y) * (tau / dt)
                times.append(t + tau)
                samples.append(y_event)
                return finish(Event(t + tau, EventKind.REACHED_Z))

        times.append(t_new)
        samples.append(y_new)

        if np.max(np.abs(y_new)) > config.blowup_bound:
            return finish(Event(t_new, EventKind.BLOWUP))
        if np.max(np.abs(f_new)) < config.fp_epsilon:
            return finish(Event(t_new, EventKind.FIXED_POINT))

        y = y_new
        f_cur = f_new
        t = t_new


def merge_backward_forward(backward: Trajectory, forward: Trajectory) -> Trajectory:
    """Join a backward run (negated field) and a forward run from the same
    initial state into one trajectory parametrized from -t_back to +t_fwd."""
    if backward.structure is not forward.structure and backward.structure != forward.structure:
        raise ValueError("trajectories belong to different structures")
    if not np.allclose(backward.ys[0], forward.ys[0], rtol=0.0, atol=0.0):
        raise ValueError("trajectories must share the initial state")
    times = np.concatenate([-backward.times[::-1][:-1], forward.times])
    ys = np.vstack([backward.ys[::-1][:-1], forward.ys])
    back_events = tuple(Event(-e.time, e.kind) for e in reversed(backward.events))
    return Trajectory(times=times, ys=ys, events=back_events + tuple(forward.events),
                      structure=forward.structure, hamiltonian=forward.hamiltonian)


def sign_preservation_check(traj: Trajectory, structure: Optional[PhaseStructure] = None,
                            z_epsilon: float = 1e-6) -> bool:
    """True when the critical-set coordinate never changes sign along ``traj``.

    The terminal sample is exempt when it sits inside the ``z_epsilon``
    neighborhood (an orbit that just reached Z still preserves sign).  For a
    canonical structure, which has no critical set of its own, the momentum
    at ``singular_index`` is monitored instead so classical runs can be
    compared against their twisted counterparts.
    """
    if structure is None:
        structure = traj.structure
    if structure.is_singular:
        idx = _defining_index(structure)
    else:
        idx = structure.n + structure.singular_index
    d = traj.ys[:, idx]
    if d.size > 1 and abs(d[-1]) < z_epsilon:
        d = d[:-1]
    signs = np.sign(d[np.abs(d) > 0.0])
    return bool(signs.size == 0 or np.all(signs == signs[0]))
