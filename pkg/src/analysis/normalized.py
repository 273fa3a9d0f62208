from __future__ import annotations

from ..formula.heaps import SID, Problem, SymbolicHeap
from ..formula.atoms import Diseq
from .alloc import allocated_terms, compute_alloc_sets, productive_predicates
from .models import AllocTable, Locus, Violation, ViolationKind


def _shape_violations(heap: SymbolicHeap, locus: Locus, kinds: dict[str, ViolationKind]) -> list[Violation]:
    violations: list[Violation] = []
    for atom in (*heap.equalities, *heap.disequalities):
        if not isinstance(atom, Diseq) or not ({atom.lhs, atom.rhs} & set(heap.exists)):
            violations.append(Violation(kinds["1a"], locus, str(atom), "1a: only x≄t with x existential"))
    spatial = heap.spatial_terms()
    for x in sorted(heap.variables() - spatial, key=lambda t: t.key):
        violations.append(Violation(kinds["1b"], locus, str(x), "1b: occurs in no spatial atom"))
    for atom in heap.preds:
        if any(t.const for t in atom.args) or len(set(atom.args)) != len(atom.args):
            violations.append(Violation(kinds["1c"], locus, str(atom), "1c: constant or repeated argument"))
    return violations


def _occurring_positions(sid: SID) -> dict[str, frozenset[int]]:
    """greatest fixpoint: positions that reach a points-to atom in every unfolding"""
    productive = productive_predicates(sid)
    occurs = {p: frozenset(range(1, n + 1)) for p, n in sid.arities.items()}
    changed = True
    while changed:
        changed = False
        for name in productive:
            result = frozenset(range(1, sid.arities[name] + 1))
            for rule in sid.rules_of(name):
                if not all(q.name in productive for q in rule.body.preds):
                    continue
                here = {t for p in rule.body.points_to for t in p.terms()}
                for atom in rule.body.preds:
                    here.update(atom.args[j - 1] for j in occurs[atom.name])
                result &= frozenset(i + 1 for i, x in enumerate(rule.params) if x in here)
            if result != occurs[name]:
                occurs[name] = result
                changed = True
    return occurs


def check_normalized(problem: Problem, tbl: AllocTable | None = None) -> list[Violation]:
    """every violated clause of the normal form, with its locus"""
    sid = problem.sid
    tbl = tbl or compute_alloc_sets(sid)
    rule_kinds = {
        "1a": ViolationKind.NORMALIZED_1A,
        "1b": ViolationKind.NORMALIZED_1B,
        "1c": ViolationKind.NORMALIZED_1C,
    }
    sequent_kinds = dict.fromkeys(rule_kinds, ViolationKind.NORMALIZED_3)
    violations: list[Violation] = []
    occurs = _occurring_positions(sid)
    constants = problem.sorted_constants
    for name, rules in sid.rules.items():
        for i, rule in enumerate(rules):
            locus = Locus(predicate=name, rule=i)
            violations.extend(_shape_violations(rule.body, locus, rule_kinds))
            allocated = allocated_terms(rule.body, tbl.may_par, tbl.may_const)
            for z in rule.body.exists:
                if z not in allocated:
                    continue
                present = {d.rhs if d.lhs == z else d.lhs for d in rule.body.disequalities if z in d.terms()}
                missing = [c.name for c in constants if c not in present]
                if missing:
                    violations.append(
                        Violation(ViolationKind.NORMALIZED_2C, locus, str(z), f"2c: missing ≄ {', '.join(missing)}")
                    )
        for position in range(1, sid.arities[name] + 1):
            if position not in occurs[name]:
                violations.append(
                    Violation(
                        ViolationKind.NORMALIZED_2A,
                        Locus(predicate=name),
                        f"parameter {position}",
                        "2a: missing from the points-to atoms of some unfolding",
                    )
                )
    for nu in tbl.non_uniform:
        violations.append(Violation(ViolationKind.NORMALIZED_2B, Locus(predicate=nu.predicate), "", f"2b: {nu}"))
    for i, sequent in enumerate(problem.sequents):
        for side, heap in enumerate(sequent.heaps()):
            violations.extend(_shape_violations(heap, Locus(sequent=i, side=side), sequent_kinds))
    return violations
