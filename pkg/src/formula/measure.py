from __future__ import annotations

from dataclasses import dataclass

from .heaps import Problem


@dataclass(frozen=True, slots=True)
class ProblemMetrics:
    width: int
    size: int


def _quantities(problem: Problem) -> list[int]:
    quantities = [rule.body.size + len(rule.params) for rule in problem.sid.all_rules()]
    quantities.extend(rhs.size for sequent in problem.sequents for rhs in sequent.rhs)
    return quantities


def problem_metrics(problem: Problem) -> ProblemMetrics:
    """width is the largest of rule sizes plus arity, RHS sizes and |ℂ|; size sums the same"""
    quantities = _quantities(problem)
    width = max([*quantities, len(problem.constants)])
    return ProblemMetrics(width=width, size=sum(quantities))
