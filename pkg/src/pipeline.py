from __future__ import annotations

import enum
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from loguru import logger

from .analysis import Violation, check_erestricted, check_established, infer_roots_and_check
from .config import CONFIG
from .formula.heaps import Problem
from .oracle import Bounds, OracleVerdictKind, oracle_problem
from .profile import Verdict, VerdictKind, decide
from .sl_entail.exceptions import ConditionError
from .transform import established_to_erestricted, normalize, split_constant_partitions


class Mode(str, enum.Enum):
    AUTO = "auto"
    DECIDE = "decide"
    ORACLE = "oracle"


@dataclass(frozen=True)
class Classification:
    progressing: bool
    connected: bool
    erestricted: bool
    established: bool
    strongly: bool
    violations: tuple[Violation, ...] = ()

    @property
    def decidable(self) -> bool:
        return self.progressing and self.connected and (self.erestricted or self.established)

    def explain(self) -> str:
        """why the problem is outside the decidable fragments, empty when it is not"""
        if not self.progressing or not self.connected:
            failed = [name for name, ok in (("progressing", self.progressing), ("connected", self.connected)) if not ok]
            return f"the rules are not {' and '.join(failed)}"
        if not self.decidable:
            return "the problem is neither e-restricted nor established"
        return ""

    def as_dict(self) -> dict[str, bool]:
        return {
            "progressing": self.progressing,
            "connected": self.connected,
            "erestricted": self.erestricted,
            "established": self.established,
            "strongly_established": self.strongly,
        }


def classify(problem: Problem) -> Classification:
    roots = infer_roots_and_check(problem.sid)
    restrictions = check_erestricted(problem)
    rooted = problem.with_sid(problem.sid.with_roots(roots.roots))
    establishment = check_established(rooted) if roots.progressing else None
    return Classification(
        progressing=roots.progressing,
        connected=roots.connected,
        erestricted=not restrictions,
        established=bool(establishment),
        strongly=establishment is not None and establishment.strongly,
        violations=(*roots.violations, *restrictions),
    )


def reduce(problem: Problem, classification: Classification | None = None) -> list[Problem]:
    """
    normalized e-restricted problems, one per partition of the constants, whose
    sequent origins point back into problem
    """
    classification = classification or classify(problem)
    if not classification.decidable:
        raise ConditionError(classification.explain(), classification.violations)
    derived: list[Problem] = []
    for part in split_constant_partitions(problem):
        if classification.erestricted:
            derived.append(normalize(part))
        else:
            derived.append(established_to_erestricted(part))
    logger.info(f"Reduced {len(problem.sequents)} sequents to {sum(len(p.sequents) for p in derived)} derived ones")
    return derived


def aggregate(count: int, derived: Sequence[tuple[int, Verdict]]) -> list[Verdict]:
    """
    one verdict per input sequent: an invalid derived sequent makes its origin invalid,
    otherwise a resource-exceeded one makes it resource-exceeded
    """
    verdicts: list[Verdict] = []
    for i in range(count):
        mine = [v for origin, v in derived if origin == i]
        invalid = next((v for v in mine if v.kind is VerdictKind.INVALID), None)
        if invalid is not None:
            verdicts.append(invalid)
            continue
        for kind in (VerdictKind.RESOURCE_EXCEEDED, VerdictKind.NO_COUNTERMODEL):
            found = next((v for v in mine if v.kind is kind), None)
            if found is not None:
                verdicts.append(found)
                break
        else:
            verdicts.append(Verdict(VerdictKind.VALID, vacuous=all(v.vacuous for v in mine)))
    return verdicts


def _oracle_verdicts(problem: Problem, bounds: Bounds) -> list[Verdict]:
    verdicts: list[Verdict] = []
    for outcome in oracle_problem(problem, bounds):
        if outcome.kind is OracleVerdictKind.INVALID:
            verdicts.append(Verdict(VerdictKind.INVALID, countermodel=outcome.countermodel))
        else:
            verdicts.append(Verdict(VerdictKind.NO_COUNTERMODEL, detail=str(outcome)))
    return verdicts


def solve(
    problem: Problem,
    mode: Mode = Mode.AUTO,
    bounds: Bounds | None = None,
    max_formulas: int | None = None,
    workers: int | None = None,
    derived: list[Problem] | None = None,
) -> list[Verdict]:
    """verdicts for the sequents of problem in input order, derived is the reduction when already known"""
    derived = derived if derived is not None else reduce(problem)
    limits = bounds or Bounds.make(fields=problem.fields)

    def run(part: Problem) -> list[tuple[int, Verdict]]:
        if mode is Mode.ORACLE:
            verdicts = _oracle_verdicts(part, limits)
        else:
            verdicts = decide(part, max_formulas=max_formulas)
        return list(zip(part.all_origins, verdicts))

    with ThreadPoolExecutor(max_workers=workers or CONFIG.solver.workers) as pool:
        results = [pair for part in pool.map(run, derived) for pair in part]
    verdicts = aggregate(len(problem.sequents), results)
    for i, verdict in enumerate(verdicts):
        if verdict.vacuous:
            logger.warning(f"Sequent {i + 1} is vacuously valid")
    return verdicts
