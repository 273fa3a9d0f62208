from __future__ import annotations

import enum
from collections.abc import Iterable
from dataclasses import dataclass
from typing import Any

import yaml
from loguru import logger

from ..formula.heaps import SID, Problem, Sequent
from ..formula.terms import Term, sort_terms
from ..sl_entail.utils import time_execution
from .enumeration import models
from .semantics import sat_symbolic_heap
from .structures import Bounds, Structure


class OracleVerdictKind(str, enum.Enum):
    INVALID = "invalid"
    NO_COUNTERMODEL = "no-countermodel"


@dataclass(frozen=True)
class Countermodel:
    """a normal injective model of the left-hand side that no right-hand disjunct accepts"""

    structure: Structure
    sequent: Sequent

    def as_dict(self) -> dict[str, Any]:
        return {"sequent": str(self.sequent), **self.structure.as_dict()}

    def to_yaml(self) -> str:
        return yaml.dump(self.as_dict(), allow_unicode=True, sort_keys=False)

    def __str__(self) -> str:
        return f"countermodel {self.structure}"


@dataclass(frozen=True)
class OracleVerdict:
    kind: OracleVerdictKind
    bounds: Bounds
    checked: int = 0
    countermodel: Countermodel | None = None

    @property
    def conclusive(self) -> bool:
        return self.kind is OracleVerdictKind.INVALID

    def __str__(self) -> str:
        if self.countermodel is not None:
            return f"{self.kind.value}: {self.countermodel}"
        return f"{self.kind.value} within {self.bounds.heap_cells} cells ({self.checked} models checked)"


def _constants(sequent: Sequent, constants: Iterable[Term]) -> list[Term]:
    return sort_terms({*constants, *(t for heap in sequent.heaps() for t in heap.constants())})


@time_execution
def oracle_check(sequent: Sequent, sid: SID, b: Bounds, constants: Iterable[Term] = ()) -> OracleVerdict:
    """search the normal injective models of the left-hand side for one no disjunct accepts"""
    checked = 0
    for model in models(sequent.lhs, sid, b, _constants(sequent, constants), injective=True):
        if not model.normal:
            continue
        checked += 1
        if not any(sat_symbolic_heap(model.structure, rhs, sid, b) for rhs in sequent.rhs):
            logger.info(f"Sequent {sequent} fails in {model.structure}")
            return OracleVerdict(OracleVerdictKind.INVALID, b, checked, Countermodel(model.structure, sequent))
    logger.debug(f"No countermodel of {sequent} among {checked} models")
    return OracleVerdict(OracleVerdictKind.NO_COUNTERMODEL, b, checked)


def oracle_problem(problem: Problem, b: Bounds) -> list[OracleVerdict]:
    return [oracle_check(sequent, problem.sid, b, problem.constants) for sequent in problem.sequents]
