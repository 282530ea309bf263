"""Acceptance suite: one test per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one pass/fail line
per criterion.
"""

import json
import math

import numpy as np
import pytest

from bhamsys.cli import main as cli_main
from bhamsys.geometry import (PhaseState, PhaseStructure, StructureKind,
                              hamiltonian_vector_field)
from bhamsys.hamiltonians import HamiltonianSpec, PotentialSpec
from bhamsys.integrate import IntegratorConfig, integrate
from bhamsys.liftcheck import Verdict, projectability_test, toric_moment_field
from bhamsys.oracles import (classical_parabola, damped_newton_reference,
                             quadratic_tanh, quadratic_tanh_constants,
                             stokes_exact)
from bhamsys.orbits import (OrbitKind, assemble_singular_periodic,
                            level_set_residual, phase_portrait)
from bhamsys.timescale import (friction_ode_residual, reconstruct_real_time,
                               run_rescaled)

TWISTED = PhaseStructure(StructureKind.TWISTED_B)
CANONICAL = PhaseStructure(StructureKind.CANONICAL)
PENDULUM = PhaseStructure(StructureKind.TWISTED_B, angular_mask=(True,))


def _report(num, name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {name} ({detail})")
    assert ok, f"criterion {num}: {name} ({detail})"


def test_criterion_01_stokes_reproduction():
    worst_traj = 0.0
    worst_limit = 0.0
    for lam in (0.5, 1.0, 2.0):
        h = HamiltonianSpec(PotentialSpec("linear", lam=lam))
        traj = integrate(TWISTED, h, PhaseState(0.0, 1.0),
                         IntegratorConfig(step=1e-3, t_max=10.0))
        q_exact, p_exact = stokes_exact(0.0, 1.0, lam, traj.times)
        worst_traj = max(worst_traj,
                         float(np.max(np.abs(traj.q[:, 0] - q_exact))),
                         float(np.max(np.abs(traj.p[:, 0] - p_exact))))
        end = integrate(TWISTED, h, PhaseState(0.0, 1.0),
                        IntegratorConfig(step=1e-3, t_max=20.0 / lam))
        worst_limit = max(worst_limit, abs(end.final_state.q[0] - 1.0 / lam))
    _report(1, "Stokes reproduction", worst_traj < 1e-8 and worst_limit < 1e-6,
            f"max traj err {worst_traj:.2e} < 1e-8, limit err {worst_limit:.2e} < 1e-6")


def test_criterion_02_classical_baseline():
    worst = 0.0
    for lam in (0.5, 1.0, 2.0):
        h = HamiltonianSpec(PotentialSpec("linear", lam=lam))
        traj = integrate(CANONICAL, h, PhaseState(0.0, 1.0),
                         IntegratorConfig(step=1e-3, t_max=5.0))
        q_exact, p_exact = classical_parabola(0.0, 1.0, lam, traj.times)
        worst = max(worst,
                    float(np.max(np.abs(traj.q[:, 0] - q_exact))),
                    float(np.max(np.abs(traj.p[:, 0] - p_exact))))
    _report(2, "classical baseline", worst < 1e-8, f"max err {worst:.2e} < 1e-8")


def test_criterion_03_quadratic_tanh():
    h = HamiltonianSpec(PotentialSpec("pure_quadratic", lam=1.0))

    # initial (0, 1): matching q(0) = 0 and dq/dt(0) = p0^2 = 1 gives
    # c1 = sqrt(2), c2 = 0, so the trajectory is bounded by sqrt(2)
    c1, c2 = quadratic_tanh_constants(0.0, 1.0, 1.0)
    traj = integrate(TWISTED, h, PhaseState(0.0, 1.0),
                     IntegratorConfig(step=1e-3, t_max=10.0))
    fit_err = float(np.max(np.abs(traj.q[:, 0] - quadratic_tanh(c1, c2, 1.0, traj.times))))
    long = integrate(TWISTED, h, PhaseState(0.0, 1.0),
                     IntegratorConfig(step=1e-3, t_max=30.0, z_epsilon=1e-12))
    p_end = abs(long.final_state.p[0])
    q_gap = abs(long.final_state.q[0] - c1)

    # the (c1, c2) = (1, 0) instantiation corresponds to p0 = 1/sqrt(2)
    # and settles at q = 1
    long_unit = integrate(TWISTED, h, PhaseState(0.0, 1.0 / math.sqrt(2.0)),
                          IntegratorConfig(step=1e-3, t_max=30.0, z_epsilon=1e-12))
    unit_fit = float(np.max(np.abs(
        long_unit.q[:, 0] - quadratic_tanh(1.0, 0.0, 1.0, long_unit.times))))
    q_gap_unit = abs(long_unit.final_state.q[0] - 1.0)
    p_end_unit = abs(long_unit.final_state.p[0])

    ok = (fit_err < 1e-7 and p_end < 1e-5 and q_gap < 1e-5
          and unit_fit < 1e-7 and q_gap_unit < 1e-5 and p_end_unit < 1e-5)
    _report(3, "quadratic tanh", ok,
            f"fit {fit_err:.2e} < 1e-7; at t=30: |p| {p_end:.2e}, "
            f"|q - sqrt(2)| {q_gap:.2e}; c1=1 run: |q - 1| {q_gap_unit:.2e}, all < 1e-5")


def test_criterion_04_energy_conservation():
    runs = []
    for lam in (0.5, 1.0, 2.0):
        h = HamiltonianSpec(PotentialSpec("linear", lam=lam))
        runs.append(integrate(TWISTED, h, PhaseState(0.0, 1.0),
                              IntegratorConfig(step=1e-3, t_max=10.0)))
        runs.append(integrate(CANONICAL, h, PhaseState(0.0, 1.0),
                              IntegratorConfig(step=1e-3, t_max=5.0)))
    hq = HamiltonianSpec(PotentialSpec("pure_quadratic", lam=1.0))
    runs.append(integrate(TWISTED, hq, PhaseState(0.0, 1.0),
                          IntegratorConfig(step=1e-3, t_max=10.0)))
    hp = HamiltonianSpec(PotentialSpec("periodic", lam=1.0))
    runs.append(integrate(PENDULUM, hp, PhaseState(0.0, 2.0),
                          IntegratorConfig(step=1e-3, t_max=10.0)))
    worst = max(level_set_residual(traj) for traj in runs)
    _report(4, "energy conservation", worst < 1e-8, f"max |H - H0| {worst:.2e} < 1e-8")


def test_criterion_05_field_rescaling_identity():
    rng = np.random.default_rng(20240817)
    hams = [HamiltonianSpec(PotentialSpec("linear", lam=1.0)),
            HamiltonianSpec(PotentialSpec("pure_quadratic", lam=1.0)),
            HamiltonianSpec(PotentialSpec("periodic", lam=1.0))]
    worst = 0.0
    for i in range(10_000):
        p = rng.uniform(0.01, 3.0) * (1 if i % 2 else -1)
        state = PhaseState(rng.uniform(-3.0, 3.0), p)
        h = hams[i % 3]
        xb = hamiltonian_vector_field(TWISTED, h, state)
        expected = p * hamiltonian_vector_field(CANONICAL, h, state)
        for a, b in zip(xb, expected):
            denom = max(abs(a), abs(b))
            if denom > 0.0:
                worst = max(worst, abs(a - b) / denom)
    _report(5, "field rescaling identity", worst < 1e-12,
            f"max componentwise rel err {worst:.2e} < 1e-12 at 10^4 states")


def test_criterion_06_orbit_classification_suite():
    # constant-force grid: every off-axis start escapes to the critical set
    h_lin = HamiltonianSpec(PotentialSpec("linear", lam=1.0))
    grid2 = [PhaseState(float(q), sign) for q in range(-4, 7) for sign in (1.0, -1.0)]
    rec2 = phase_portrait(TWISTED, h_lin, grid2,
                          IntegratorConfig(step=1e-2, t_max=25.0, z_epsilon=1e-4),
                          include_backward=False)
    kinds2 = [r.classification.kind for r in rec2]
    ok2 = all(k is OrbitKind.ESCAPE_ORBIT for k in kinds2)

    # quadratic-potential grid: fixed points on the axis, escape off it
    h_quad = HamiltonianSpec(PotentialSpec("pure_quadratic", lam=1.0))
    grid4 = [PhaseState(float(q), p) for q in (-2, -1, 0, 1, 2)
             for p in (-1.0, -0.5, 0.0, 0.5, 1.0)]
    rec4 = phase_portrait(TWISTED, h_quad, grid4,
                          IntegratorConfig(step=1e-2, t_max=40.0, z_epsilon=1e-4),
                          include_backward=False)
    ok4 = all(
        r.classification.kind is (OrbitKind.FIXED_POINT if r.initial.p[0] == 0.0
                                  else OrbitKind.ESCAPE_ORBIT)
        for r in rec4)

    # pendulum grid: rotations above the separatrix energy, escape below
    lam = 1.0
    h_pend = HamiltonianSpec(PotentialSpec("periodic", lam=lam))
    escape_grid = [PhaseState(theta, sign * math.sqrt(2 * en - math.cos(theta)))
                   for en in (0.05, 0.2, 0.35, 0.45)
                   for theta in (math.pi, math.pi / 2)
                   for sign in (1.0, -1.0)]
    periodic_grid = [PhaseState(theta, sign * math.sqrt(2 * en - math.cos(theta)))
                     for en in (0.7, 1.0, 1.5, 2.5)
                     for theta in (0.0, math.pi)
                     for sign in (1.0, -1.0)]
    rec_esc = phase_portrait(PENDULUM, h_pend, escape_grid,
                             IntegratorConfig(step=2e-2, t_max=60.0, z_epsilon=1e-4),
                             include_backward=False)
    rec_per = phase_portrait(PENDULUM, h_pend, periodic_grid,
                             IntegratorConfig(step=4e-3, t_max=14.0, z_epsilon=1e-4),
                             include_backward=False)
    kinds6 = [r.classification.kind for r in rec_esc + rec_per]
    n_undet = sum(k is OrbitKind.UNDETERMINED for k in kinds6)
    ok6 = (all(r.classification.kind is OrbitKind.ESCAPE_ORBIT for r in rec_esc)
           and all(r.classification.kind is OrbitKind.PERIODIC for r in rec_per)
           and n_undet <= len(kinds6) // 100)

    _report(6, "orbit classification suite", ok2 and ok4 and ok6,
            f"{len(rec2)} linear escapes, {len(rec4)} quadratic records, "
            f"{len(rec_esc)}+{len(rec_per)} pendulum records, {n_undet} undetermined")


def test_criterion_07_singular_periodic_assembly():
    h = HamiltonianSpec(PotentialSpec("pure_quadratic", lam=1.0))
    orbit = assemble_singular_periodic(TWISTED, h, 1.0)
    left, right = orbit.endpoints
    gap = max(abs(left.q[0] + 2.0), abs(right.q[0] - 2.0))
    h_gap = abs(h.value(orbit.upper_segment.initial_state)
                - h.value(orbit.lower_segment.initial_state))
    _report(7, "singular periodic assembly", gap < 1e-5 and h_gap < 1e-8,
            f"endpoint err {gap:.2e} < 1e-5, segment energy gap {h_gap:.2e} < 1e-8")


def test_criterion_08_lift_nonexistence():
    dissipative = [PotentialSpec("linear", lam=1.0),
                   PotentialSpec("pure_quadratic", lam=1.0),
                   PotentialSpec("general_quadratic", lam=2.0, alpha=0.3),
                   PotentialSpec("periodic", lam=2.0)]
    verdicts = []
    for pot in dissipative:
        h = HamiltonianSpec(pot)
        struct = PENDULUM if pot.family.value == "periodic" else TWISTED
        verdicts.append(projectability_test(struct, h, [0.0, 0.5], [1.0, 2.0],
                                            tol=1e-9).verdict)
    control = projectability_test(TWISTED, toric_moment_field(TWISTED, c=1.0),
                                  [0.0, 1.0], [1.0, 2.0], tol=1e-9).verdict
    ok = (all(v is Verdict.NOT_PROJECTABLE for v in verdicts)
          and control is Verdict.PROJECTABLE)
    _report(8, "lift non-existence", ok,
            f"{len(verdicts)} dissipative systems not projectable, control projectable")


def test_criterion_09_time_rescaling_equivalence():
    cases = [
        (PotentialSpec("zero"), 1.0, 0.0, 1.0),                      # V = 0
        (PotentialSpec("pure_quadratic", lam=2.0), 0.2, 1.0, 0.0),   # V = q^2/2
        (PotentialSpec("linear", lam=4.0), 1.0, 0.0, 1.0),           # V = 2q
    ]
    worst_match = 0.0
    worst_res = 0.0
    for pot, lam, q0, v0 in cases:
        ext = run_rescaled(pot, lam, q0, v0, 10.0)
        rt = reconstruct_real_time(ext)
        ts = np.linspace(0.0, 10.0, 1001)
        ref = damped_newton_reference(pot, lam, q0, v0, ts, step=1e-3)
        q, v = rt.sample(ts)
        worst_match = max(worst_match,
                          float(np.max(np.abs(q[:, 0] - ref.qs[:, 0]))),
                          float(np.max(np.abs(v[:, 0] - ref.ps[:, 0]))))
        worst_res = max(worst_res, friction_ode_residual(rt, dt=0.01))
    # terminal velocity -g/lam = -2 for V = 2q
    ext = run_rescaled(PotentialSpec("linear", lam=4.0), 1.0, 0.0, 1.0, 20.0)
    _, v20 = reconstruct_real_time(ext).sample(20.0)
    terminal_gap = abs(v20[0, 0] + 2.0)
    ok = worst_match < 1e-5 and worst_res < 1e-4 and terminal_gap < 1e-6
    _report(9, "time-rescaling equivalence", ok,
            f"max mismatch {worst_match:.2e} < 1e-5, residual {worst_res:.2e} < 1e-4, "
            f"terminal velocity gap {terminal_gap:.2e} < 1e-6")


def test_criterion_10_convergence_order():
    h = HamiltonianSpec(PotentialSpec("linear", lam=1.0))
    errs = {}
    for step in (1e-2, 5e-3):
        traj = integrate(TWISTED, h, PhaseState(0.0, 1.0),
                         IntegratorConfig(step=step, t_max=5.0))
        q_exact, p_exact = stokes_exact(0.0, 1.0, 1.0, traj.times)
        errs[step] = max(float(np.max(np.abs(traj.q[:, 0] - q_exact))),
                         float(np.max(np.abs(traj.p[:, 0] - p_exact))))
    ratio = errs[1e-2] / errs[5e-3]
    _report(10, "4th-order convergence", ratio >= 14.0,
            f"error ratio {ratio:.1f} >= 14 on halving the step")


def test_criterion_11_cli_determinism(tmp_path):
    config = {
        "structure": {"kind": "twisted_b", "dim": 2},
        "potential": {"family": "linear", "lambda": 1.0},
        "initial": [[0.0, 1.0]],
        "integrator": {"step": 1e-3, "t_max": 20.0, "z_epsilon": 1e-4},
    }
    path = tmp_path / "stokes.json"
    path.write_text(json.dumps(config))
    outs = (tmp_path / "a", tmp_path / "b")
    for out in outs:
        assert cli_main(["simulate", "--config", str(path), "--out", str(out)]) == 0
    names = sorted(p.name for p in outs[0].iterdir())
    identical = all((outs[0] / n).read_bytes() == (outs[1] / n).read_bytes()
                    for n in names)
    _report(11, "CLI determinism", identical and names == ["manifest.json", "traj_000.csv"],
            f"{len(names)} artifacts byte-identical across reruns")
