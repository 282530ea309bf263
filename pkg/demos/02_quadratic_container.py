"""A particle confined by the twisted quadratic potential.

Under the singular pairing, H = p^2/2 + (lam/4) q^2 no longer oscillates:
the position crosses the container once, slowing down near both walls,

    q(t) = (c1/sqrt(lam)) tanh(c1 sqrt(lam) t / 2 + c2),

and the closed invariant curve of the classical oscillator survives only as
a *singular* periodic orbit: two heteroclinic halves glued to two fixed
points on the momentum axis.
"""

import numpy as np

from bhamsys import (HamiltonianSpec, IntegratorConfig, PhaseState,
                     PhaseStructure, PotentialSpec, StructureKind,
                     assemble_singular_periodic, integrate, quadratic_tanh,
                     quadratic_tanh_constants)

LAM = 1.0
twisted = PhaseStructure(StructureKind.TWISTED_B)
h = HamiltonianSpec(PotentialSpec("pure_quadratic", lam=LAM))

traj = integrate(twisted, h, PhaseState(0.0, 1.0),
                 IntegratorConfig(step=1e-3, t_max=12.0))
c1, c2 = quadratic_tanh_constants(0.0, 1.0, LAM)
fit = np.max(np.abs(traj.q[:, 0] - quadratic_tanh(c1, c2, LAM, traj.times)))
print(f"trajectory from (0, 1): q -> {c1:.6f} (= c1/sqrt(lam)), "
      f"tanh fit error {fit:.2e}")
print(f"{'t':>5} {'q':>12} {'p':>12}")
for t in (0.0, 1.0, 2.0, 4.0, 8.0):
    i = np.searchsorted(traj.times, t)
    print(f"{t:5.1f} {traj.q[i, 0]:12.6f} {traj.p[i, 0]:12.6f}")

orbit = assemble_singular_periodic(twisted, h, energy=1.0)
left, right = orbit.endpoints
print("\nsingular periodic orbit at energy 1:")
print(f"  upper half: {len(orbit.upper_segment)} samples, "
      f"q in [{orbit.upper_segment.q[:, 0].min():.4f}, {orbit.upper_segment.q[:, 0].max():.4f}]")
print(f"  endpoints on the momentum axis: q = {left.q[0]:+.6f}, {right.q[0]:+.6f}")
print("  (analytic endpoints: +/- 2 sqrt(energy/lam) = +/- 2)")

orbit.upper_segment.write_csv("container_upper.csv")
orbit.lower_segment.write_csv("container_lower.csv")
print("\nwrote container_upper.csv and container_lower.csv "
      "(columns t, q1, p1; plot q1 vs p1 for the phase portrait)")
