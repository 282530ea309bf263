"""Stokes drag from a singular symplectic form.

The same Hamiltonian H = p^2/2 + (lam/2) q generates two very different
dynamics.  With the ordinary symplectic pairing it is free fall under a
constant force: q(t) is a parabola and nothing is dissipated.  With the
twisted singular pairing (1/p) dp ^ dq the equations become

    dq/dt = p^2,    dp/dt = -(lam/2) p,

i.e. a particle whose velocity decays exponentially: viscous drag, obtained
without ever modifying Hamilton's equations.  The momentum axis p = 0 turns
into a wall of fixed points that the orbit approaches but never reaches.
"""

import numpy as np

from bhamsys import (HamiltonianSpec, IntegratorConfig, PhaseState,
                     PhaseStructure, PotentialSpec, StructureKind,
                     classical_parabola, integrate, stokes_exact)

LAM = 1.0

h = HamiltonianSpec(PotentialSpec("linear", lam=LAM))
twisted = PhaseStructure(StructureKind.TWISTED_B)
canonical = PhaseStructure(StructureKind.CANONICAL)

config = IntegratorConfig(step=1e-3, t_max=20.0, z_epsilon=1e-4)
drag = integrate(twisted, h, PhaseState(0.0, 1.0), config)
fall = integrate(canonical, h, PhaseState(0.0, 1.0),
                 IntegratorConfig(step=1e-3, t_max=5.0))

print("twisted (drag) vs canonical (free fall), same H = p^2/2 + q/2\n")
print(f"{'t':>5} {'q_drag':>12} {'p_drag':>12} {'q_fall':>12} {'p_fall':>12}")
for t in (0.0, 0.5, 1.0, 2.0, 4.0):
    i = np.searchsorted(drag.times, t)
    j = np.searchsorted(fall.times, t)
    print(f"{t:5.1f} {drag.q[i, 0]:12.6f} {drag.p[i, 0]:12.6f} "
          f"{fall.q[j, 0]:12.6f} {fall.p[j, 0]:12.6f}")

q_exact, p_exact = stokes_exact(0.0, 1.0, LAM, drag.times)
print(f"\ndrag run: terminal event {drag.terminal_event.kind.value} "
      f"at t = {drag.terminal_event.time:.3f}")
print(f"q settles at {drag.final_state.q[0]:.8f} (limit q0 + p0^2/lam = 1)")
print(f"max error against the closed form: "
      f"{max(np.max(np.abs(drag.q[:, 0] - q_exact)), np.max(np.abs(drag.p[:, 0] - p_exact))):.2e}")

qf, pf = classical_parabola(0.0, 1.0, LAM, fall.times)
print(f"free-fall max error against the parabola: "
      f"{np.max(np.abs(fall.q[:, 0] - qf)):.2e}")

drag.write_csv("stokes_drag.csv")
print("\nwrote stokes_drag.csv (plot with: gnuplot> plot 'stokes_drag.csv' "
      "using 1:2 with lines)")
