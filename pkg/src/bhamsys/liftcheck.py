"""Test whether a dynamics can arise as a (b-)cotangent lift.

A diffeomorphism of the base lifts to the cotangent bundle so that its
projection to the base forgets the fiber; consequently the base (position)
component of a lifted infinitesimal generator cannot depend on the momenta.
``projectability_test`` probes exactly that: it evaluates the base component
of the Hamiltonian field at several fiber points over each base point and
reports any variation beyond tolerance, together with a witness pair of
states.

The twisted dissipative systems fail the test (their base component is
``p^2``), while the lifted torus generator ``c log|p_1| + p_2 + ...`` passes
it with unit base speed -- the positive control built by
``toric_moment_field``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .geometry import (PhaseState, PhaseStructure, StructureKind,
                       defining_function, hamiltonian_vector_field)
from .hamiltonians import LogMomentumHamiltonian

__all__ = [
    "Verdict",
    "Witness",
    "LiftVerdict",
    "projectability_test",
    "toric_moment_field",
]

DEFAULT_TOL = 1e-9


class Verdict(str, Enum):
    PROJECTABLE = "projectable"
    NOT_PROJECTABLE = "not_projectable"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Witness:
    """Two states over the same base point whose base velocities differ."""

    state_a: PhaseState
    state_b: PhaseState
    difference: float


@dataclass(frozen=True)
class LiftVerdict:
    verdict: Verdict
    witness: Optional[Witness] = None

    def __post_init__(self):
        if self.verdict is Verdict.NOT_PROJECTABLE and self.witness is None:
            raise ValueError("a not_projectable verdict requires a witness")


def _as_vector(value, n: int, what: str) -> np.ndarray:
    v = np.atleast_1d(np.asarray(value, dtype=float))
    if v.size != n:
        raise ValueError(f"{what} must have {n} component(s), got {v.size}")
    return v


def projectability_test(structure: PhaseStructure, h, base_points, fiber_samples,
                        tol: float = DEFAULT_TOL) -> LiftVerdict:
    """Probe fiber-independence of the base component of the field.

    ``base_points`` are position vectors (scalars for n = 1) and
    ``fiber_samples`` momentum vectors; every (base, fiber) combination is
    evaluated.  Returns ``not_projectable`` with a witness as soon as some
    base point shows base-velocity variation above ``tol`` across fibers,
    ``projectable`` when all variations stay within ``tol``, and
    ``inconclusive`` when the sampling is degenerate (all fibers equal).

    For singular structures the fiber samples must stay off the critical
    set.
    """
    n = structure.n
    bases = [_as_vector(b, n, "base point") for b in base_points]
    fibers = [_as_vector(f, n, "fiber sample") for f in fiber_samples]
    if not bases:
        raise ValueError("need at least one base point")
    if len(fibers) < 2:
        raise ValueError("need at least two fiber samples per base point")

    if all(np.array_equal(f, fibers[0]) for f in fibers[1:]):
        return LiftVerdict(Verdict.INCONCLUSIVE)

    worst = None
    for base in bases:
        states = []
        for fiber in fibers:
            state = PhaseState(q=base, p=fiber)
            if structure.is_singular and defining_function(structure, state) == 0.0:
                raise ValueError("fiber sample lies on the critical set")
            states.append(state)
        base_velocities = [hamiltonian_vector_field(structure, h, s)[:n] for s in states]
        for i in range(len(states)):
            for j in range(i + 1, len(states)):
                diff = float(np.max(np.abs(base_velocities[i] - base_velocities[j])))
                if worst is None or diff > worst.difference:
                    worst = Witness(states[i], states[j], diff)
    if worst is not None and worst.difference > tol:
        return LiftVerdict(Verdict.NOT_PROJECTABLE, witness=worst)
    return LiftVerdict(Verdict.PROJECTABLE)


def toric_moment_field(structure: PhaseStructure, c: Optional[float] = None) -> LogMomentumHamiltonian:
    """Hamiltonian of the lifted torus generator for a twisted structure.

    Its field has unit speed in every base direction and keeps all momenta
    fixed, independently of ``c`` and of the fiber point.
    """
    if structure.kind is not StructureKind.TWISTED_B:
        raise ValueError("the lifted torus generator lives on the twisted structure")
    if c is None:
        c = structure.modular_weight
    if c == 0.0:
        raise ValueError("c must be nonzero")
    return LogMomentumHamiltonian(c=c, n=structure.n,
                                  singular_index=structure.singular_index)
