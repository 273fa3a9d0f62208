from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any

from loguru import logger

from ..config import CONFIG
from ..formula.atoms import Atom, Diseq, Eq, PointsTo, Pred
from ..formula.heaps import SID, Problem, Rule, Sequent, SymbolicHeap
from ..formula.measure import problem_metrics
from ..formula.terms import Term, const, var
from ..oracle import Bounds
from ..pipeline import Mode, solve
from ..profile import VerdictKind
from ..sl_entail.exceptions import (
    OracleBudgetError,
    PoolExhaustedError,
    ResourceExceededError,
    TransformBlowupError,
)

RESOURCE_ERRORS = (ResourceExceededError, TransformBlowupError, OracleBudgetError, PoolExhaustedError)


@dataclass(frozen=True)
class Shape:
    max_predicates: int = CONFIG.fuzz.max_predicates
    max_width: int = CONFIG.fuzz.max_width
    constants: int = CONFIG.fuzz.constants
    max_arity: int = 2


class _ProblemBuilder:
    def __init__(self, rng: random.Random, shape: Shape) -> None:
        self.rng = rng
        self.shape = shape
        self.fields = rng.choice([1, 2])
        self.constants = [const(f"c{i + 1}") for i in range(max(shape.constants, 1))]
        count = rng.randint(1, max(shape.max_predicates, 1))
        self.arities = {f"p{i + 1}": rng.randint(1, shape.max_arity) for i in range(count)}

    def _pick(self, terms: list[Term]) -> Term:
        return self.rng.choice(terms)

    def _base_rule(self, name: str, params: tuple[Term, ...]) -> Rule:
        pool = [*params[1:], *self.constants]
        dests = tuple(self._pick(pool) for _ in range(self.fields))
        atoms: list[Atom] = [PointsTo(params[0], dests)]
        if self.rng.random() < 0.3:
            atoms.append(Diseq(params[0], self._pick(self.constants)))
        return Rule(name, params, SymbolicHeap((), tuple(atoms)))

    def _recursive_rule(self, name: str, params: tuple[Term, ...]) -> Rule:
        z = var("z")
        callee = self._pick(sorted(self.arities))
        pool = [*params, *self.constants]
        extra = tuple(self._pick([*pool, z]) for _ in range(self.fields - 1))
        args = (z, *(self._pick(pool) for _ in range(self.arities[callee] - 1)))
        atoms: list[Atom] = [PointsTo(params[0], (z, *extra)), Pred(callee, args)]
        return Rule(name, params, SymbolicHeap((z,), tuple(atoms)))

    def sid(self) -> SID:
        rules: dict[str, tuple[Rule, ...]] = {}
        for name, arity in self.arities.items():
            params = tuple(var(f"x{i + 1}") for i in range(arity))
            named = [self._base_rule(name, params)]
            if self.rng.random() < 0.8:
                named.append(self._recursive_rule(name, params))
            rules[name] = tuple(named)
        return SID(dict(self.arities), rules)

    def _closed_atom(self, root: Term) -> Atom:
        if self.rng.random() < 0.25:
            return PointsTo(root, tuple(self._pick(self.constants) for _ in range(self.fields)))
        name = self._pick(sorted(self.arities))
        return Pred(name, (root, *(self._pick(self.constants) for _ in range(self.arities[name] - 1))))

    def _pure_atom(self) -> Atom:
        c, d = self._pick(self.constants), self._pick(self.constants)
        return Eq(c, d) if self.rng.random() < 0.3 else Diseq(c, d)

    def _heap(self) -> SymbolicHeap:
        roots = self.rng.sample(self.constants, self.rng.randint(1, min(2, len(self.constants))))
        atoms = [self._closed_atom(root) for root in roots]
        if self.rng.random() < 0.2:
            atoms.append(self._pure_atom())
        return SymbolicHeap((), tuple(atoms))

    def _existential_heap(self) -> SymbolicHeap:
        """a cell of a constant pointing to a bound variable that a predicate atom allocates"""
        y = var("y")
        name = self._pick(sorted(self.arities))
        extra = tuple(self._pick([*self.constants, y]) for _ in range(self.fields - 1))
        cell = PointsTo(self._pick(self.constants), (y, *extra))
        call = Pred(name, (y, *(self._pick(self.constants) for _ in range(self.arities[name] - 1))))
        return SymbolicHeap((y,), (cell, call))

    def sequent(self) -> Sequent:
        lhs = self._heap()
        rhs = [lhs] if self.rng.random() < 0.15 else []
        for _ in range(self.rng.randint(1, 2)):
            rhs.append(self._existential_heap() if self.rng.random() < 0.3 else self._heap())
        return Sequent(lhs, tuple(rhs))


def random_problem(rng: random.Random, shape: Shape | None = None) -> Problem:
    """a progressing, connected and e-restricted problem, existentials only on right-hand sides"""
    shape = shape or Shape()
    while True:
        builder = _ProblemBuilder(rng, shape)
        sequents = tuple(builder.sequent() for _ in range(rng.randint(1, 2)))
        problem = Problem(frozenset(builder.constants), builder.fields, builder.sid(), sequents)
        if problem_metrics(problem).width <= shape.max_width:
            return problem


@dataclass
class DifferentialReport:
    problems: int = 0
    sequents: int = 0
    agreements: int = 0
    confirmed: int = 0
    unconfirmed: int = 0
    skipped: int = 0
    disagreements: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.disagreements and not self.errors

    def as_dict(self) -> dict[str, Any]:
        return {
            "problems": self.problems,
            "sequents": self.sequents,
            "agreements": self.agreements,
            "confirmed_invalid": self.confirmed,
            "unconfirmed_invalid": self.unconfirmed,
            "skipped": self.skipped,
            "disagreements": self.disagreements,
            "errors": self.errors,
        }


def differential(problems: list[Problem], bounds: Bounds, max_formulas: int | None = None) -> DifferentialReport:
    """
    decide against the bounded oracle, a valid verdict with a countermodel is a disagreement.
    Only exhausted budgets skip a problem, any other failure is an error
    """
    report = DifferentialReport()
    for n, problem in enumerate(problems):
        report.problems += 1
        try:
            decided = solve(problem, Mode.DECIDE, max_formulas=max_formulas)
            checked = solve(problem, Mode.ORACLE, bounds)
        except RESOURCE_ERRORS as e:
            logger.warning(f"Problem {n + 1} skipped: {e}")
            report.skipped += len(problem.sequents)
            continue
        except Exception as e:
            logger.error(f"Problem {n + 1} failed: {type(e).__name__}: {e}")
            report.errors.append(f"problem {n + 1}: {type(e).__name__}: {e}")
            continue
        for i, (verdict, oracle) in enumerate(zip(decided, checked)):
            report.sequents += 1
            if verdict.kind is VerdictKind.RESOURCE_EXCEEDED:
                report.skipped += 1
            elif verdict.valid and oracle.kind is VerdictKind.INVALID:
                report.disagreements.append(f"problem {n + 1}, sequent {i + 1}: valid but {oracle}")
                logger.error(f"Disagreement on problem {n + 1}, sequent {i + 1}: {problem.sequents[i]}")
            elif verdict.kind is VerdictKind.INVALID and oracle.kind is VerdictKind.INVALID:
                report.confirmed += 1
                report.agreements += 1
            elif verdict.kind is VerdictKind.INVALID:
                report.unconfirmed += 1
                logger.info(f"No countermodel within bounds for problem {n + 1}, sequent {i + 1}")
            else:
                report.agreements += 1
    logger.info(
        f"Differential run: {report.agreements} agreements, {len(report.disagreements)} disagreements, "
        f"{len(report.errors)} errors, {report.unconfirmed} unconfirmed invalid verdicts in {report.sequents} sequents"
    )
    return report
