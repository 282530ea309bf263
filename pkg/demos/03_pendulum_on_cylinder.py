"""The twisted pendulum: rotations survive, librations break.

With H = p^2/2 + (lam/2) cos(theta) on the cylinder, the singular pairing
keeps the rotations that circle the cylinder above the separatrix energy
lam/2 (their momentum never vanishes), while every librating orbit below it
crosses p = 0 in the classical picture and therefore breaks into a pair of
escape orbits asymptotic to the critical set.
"""

import math
from collections import Counter

from bhamsys import (HamiltonianSpec, IntegratorConfig, PhaseState,
                     PhaseStructure, PotentialSpec, StructureKind,
                     phase_portrait)

LAM = 1.0
cylinder = PhaseStructure(StructureKind.TWISTED_B, angular_mask=(True,))
h = HamiltonianSpec(PotentialSpec("periodic", lam=LAM))

grid = []
for energy in (0.1, 0.3, 0.45, 0.7, 1.0, 2.0):
    for theta in (0.0, math.pi / 2, math.pi):
        p_sq = 2.0 * energy - math.cos(theta)
        if p_sq <= 0:
            continue
        grid.append(PhaseState(theta, math.sqrt(p_sq)))

config = IntegratorConfig(step=5e-3, t_max=80.0, z_epsilon=1e-4)
records = phase_portrait(cylinder, h, grid, config, include_backward=False)

print(f"separatrix energy lam/2 = {LAM / 2}\n")
print(f"{'theta0':>8} {'p0':>8} {'H':>8}  classification")
for rec in records:
    energy = h.value(rec.initial)
    cls = rec.classification
    extra = f"  period {cls.period:.4f}" if cls.period is not None else ""
    print(f"{rec.initial.q[0]:8.4f} {rec.initial.p[0]:8.4f} {energy:8.4f}  "
          f"{cls.kind.value}{extra}")

counts = Counter(rec.classification.kind.value for rec in records)
print("\ntotals:", dict(counts))
print("every H > 1/2 start rotates forever; every 0 < H < 1/2 start escapes "
      "to the critical set")
