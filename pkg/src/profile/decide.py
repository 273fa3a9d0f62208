from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING

from loguru import logger

from ..formula.core import CoreFormula, VariablePool
from ..formula.heaps import Problem, Sequent
from ..sidfile.printer import render_core
from ..sl_entail.exceptions import PoolExhaustedError, ResourceExceededError
from ..sl_entail.metrics import metrics
from .coretrans import coretrans, coretrans_all
from .engine import ProfileRelation, ProfileSet, compute_profiles, pool_for, prepare

if TYPE_CHECKING:
    from ..oracle.check import Countermodel


class VerdictKind(str, enum.Enum):
    VALID = "valid"
    INVALID = "invalid"
    RESOURCE_EXCEEDED = "resource-exceeded"
    NO_COUNTERMODEL = "no-countermodel"


@dataclass(frozen=True)
class Verdict:
    """the outcome for one sequent, invalid ones carry the abstraction no disjunct meets"""

    kind: VerdictKind
    vacuous: bool = False
    witness: tuple[CoreFormula, ProfileSet] | None = None
    detail: str = ""
    countermodel: Countermodel | None = None

    @property
    def valid(self) -> bool:
        return self.kind is VerdictKind.VALID

    def __str__(self) -> str:
        text = self.kind.value
        if self.vacuous:
            text += " (vacuous)"
        if self.witness is not None:
            phi, profile = self.witness
            formulas = ", ".join(sorted(render_core(psi) for psi in profile))
            text += f": {render_core(phi)} has the abstraction {{{formulas}}}"
        elif self.countermodel is not None:
            text += f": {self.countermodel}"
        elif self.detail:
            text += f": {self.detail}"
        return text


def decide_sequent(sequent: Sequent, problem: Problem, pool: VariablePool, relation: ProfileRelation) -> Verdict:
    """valid iff every abstraction of every left core translation meets a right core translation"""
    sid, constants = problem.sid, problem.constants
    rhs = coretrans_all(sequent.rhs, sid, pool, constants)
    seen = False
    for phi in sorted(coretrans(sequent.lhs, sid, pool, constants), key=render_core):
        for profile in sorted(relation.sets_of(phi), key=lambda s: sorted(map(render_core, s))):
            seen = True
            if not profile & rhs:
                return Verdict(VerdictKind.INVALID, witness=(phi, profile))
    return Verdict(VerdictKind.VALID, vacuous=not seen)


def decide(
    problem: Problem, pool: VariablePool | None = None, max_formulas: int | None = None, max_sets: int | None = None
) -> list[Verdict]:
    """one verdict per sequent of a normalized e-restricted problem"""
    problem = prepare(problem)
    pool = pool or pool_for(problem)
    try:
        relation = compute_profiles(problem, pool, max_formulas, max_sets)
    except (ResourceExceededError, PoolExhaustedError) as e:
        logger.warning(f"Profile computation gave up: {e}")
        verdicts = [Verdict(VerdictKind.RESOURCE_EXCEEDED, detail=str(e)) for _ in problem.sequents]
    else:
        verdicts = [decide_sequent(sequent, problem, pool, relation) for sequent in problem.sequents]
    for i, verdict in enumerate(verdicts):
        logger.debug(f"Sequent {i + 1}: {verdict}")
        metrics.register_verdict(verdict.kind.value, verdict.vacuous)
    return verdicts
