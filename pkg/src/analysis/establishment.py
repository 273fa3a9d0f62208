from __future__ import annotations

from ..formula.heaps import Problem, SymbolicHeap
from ..formula.terms import Term
from .alloc import allocated_terms, compute_alloc_sets, equality_classes
from .models import AllocStatus, AllocTable, EstablishmentReport, EstablishmentWitness, Locus


def allocation_status(x: Term, heap: SymbolicHeap, tbl: AllocTable) -> AllocStatus:
    """allocated through the must sets, possibly through the may sets, or never"""
    classes = equality_classes(heap, {x})
    must = allocated_terms(heap, tbl.must_par, tbl.must_const)
    if any(classes.same(x, t) for t in must):
        return AllocStatus.ALLOCATED
    may = allocated_terms(heap, tbl.may_par, tbl.may_const)
    if any(classes.same(x, t) for t in may):
        return AllocStatus.UNKNOWN
    return AllocStatus.NOT_ALLOCATED


def check_established(problem: Problem, tbl: AllocTable | None = None) -> EstablishmentReport:
    """rule existentials (and, for strong establishment, sequent existentials) allocated in every unfolding"""
    tbl = tbl or compute_alloc_sets(problem.sid)
    rule_witnesses: list[EstablishmentWitness] = []
    for name, rules in problem.sid.rules.items():
        for i, rule in enumerate(rules):
            for z in rule.body.exists:
                status = allocation_status(z, rule.body, tbl)
                rule_witnesses.append(EstablishmentWitness(Locus(predicate=name, rule=i), z, status))
    sequent_witnesses: list[EstablishmentWitness] = []
    for i, sequent in enumerate(problem.sequents):
        for side, heap in enumerate(sequent.heaps()):
            for x in heap.exists:
                status = allocation_status(x, heap, tbl)
                sequent_witnesses.append(EstablishmentWitness(Locus(sequent=i, side=side), x, status))
    established = all(w.status is AllocStatus.ALLOCATED for w in rule_witnesses)
    strongly = established and all(w.status is AllocStatus.ALLOCATED for w in sequent_witnesses)
    return EstablishmentReport(established, strongly, tuple(rule_witnesses + sequent_witnesses))
