from __future__ import annotations

from ..formula.heaps import Problem, SymbolicHeap
from .models import Locus, Violation, ViolationKind


def _equational(heap: SymbolicHeap, locus: Locus) -> list[Violation]:
    return [
        Violation(ViolationKind.ERESTRICTED, locus, str(atom), "no constant involved")
        for atom in (*heap.equalities, *heap.disequalities)
        if not atom.lhs.const and not atom.rhs.const
    ]


def check_erestricted(problem: Problem) -> list[Violation]:
    """every equational atom between two non-constants, empty when the problem is e-restricted"""
    violations: list[Violation] = []
    for name, rules in problem.sid.rules.items():
        for i, rule in enumerate(rules):
            violations.extend(_equational(rule.body, Locus(predicate=name, rule=i)))
    for i, sequent in enumerate(problem.sequents):
        for side, heap in enumerate(sequent.heaps()):
            violations.extend(_equational(heap, Locus(sequent=i, side=side)))
    return violations
