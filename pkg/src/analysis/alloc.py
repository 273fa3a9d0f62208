from __future__ import annotations

from collections.abc import Callable

from ..formula.atoms import Context, Pred
from ..formula.core import CoreFormula
from ..formula.heaps import SID, Rule, SymbolicHeap
from ..formula.terms import Term
from ..sl_entail.exceptions import ConditionError
from ..sl_entail.utils import UnionFind
from .models import AllocTable, NonUniformity

ParTable = dict[str, frozenset[int]]
ConstTable = dict[str, frozenset[Term]]


def allocated_terms(heap: SymbolicHeap, par: ParTable, cons: ConstTable) -> set[Term]:
    """terms allocated by the spatial atoms, before equality closure"""
    allocated = {p.src for p in heap.points_to}
    for atom in heap.preds:
        allocated.update(atom.args[j - 1] for j in par.get(atom.name, frozenset()))
        allocated.update(cons.get(atom.name, frozenset()))
    return allocated


def equality_classes(heap: SymbolicHeap, extra: set[Term] | None = None) -> UnionFind:
    classes = UnionFind(heap.terms() | (extra or set()))
    for eq in heap.equalities:
        classes.union(eq.lhs, eq.rhs)
    return classes


def _rule_alloc(rule: Rule, par: ParTable, cons: ConstTable) -> tuple[frozenset[int], frozenset[Term]]:
    allocated = allocated_terms(rule.body, par, cons)
    classes = equality_classes(rule.body, set(rule.params) | allocated)
    roots = {classes.find(t) for t in allocated}
    positions = frozenset(i + 1 for i, x in enumerate(rule.params) if classes.find(x) in roots)
    constants = frozenset(
        c for c in rule.body.constants() | {t for t in allocated if t.const} if classes.find(c) in roots
    )
    return positions, constants


def productive_predicates(sid: SID) -> set[str]:
    """predicates with at least one predicate-free unfolding"""
    productive: set[str] = set()
    changed = True
    while changed:
        changed = False
        for name, rules in sid.rules.items():
            if name in productive:
                continue
            if any(all(q.name in productive for q in rule.body.preds) for rule in rules):
                productive.add(name)
                changed = True
    return productive


def _fixpoint(
    sid: SID, productive: set[str], combine: Callable[[list[frozenset[object]]], frozenset[object]], start: bool
) -> tuple[ParTable, ConstTable]:
    all_constants = frozenset(c for rule in sid.all_rules() for c in rule.body.constants())
    par: ParTable = {
        p: (frozenset(range(1, n + 1)) if start else frozenset()) if p in productive else frozenset()
        for p, n in sid.arities.items()
    }
    cons: ConstTable = {p: all_constants if start and p in productive else frozenset() for p in sid.arities}
    changed = True
    while changed:
        changed = False
        for name in productive:
            results = [
                _rule_alloc(rule, par, cons)
                for rule in sid.rules_of(name)
                if all(q.name in productive for q in rule.body.preds)
            ]
            new_par = combine([r[0] for r in results])  # type: ignore[arg-type]
            new_cons = combine([r[1] for r in results])  # type: ignore[arg-type]
            if new_par != par[name] or new_cons != cons[name]:
                par[name], cons[name] = new_par, new_cons  # type: ignore[assignment]
                changed = True
    return par, cons


def _intersection(sets: list[frozenset[object]]) -> frozenset[object]:
    return frozenset.intersection(*sets) if sets else frozenset()


def _union(sets: list[frozenset[object]]) -> frozenset[object]:
    return frozenset().union(*sets)


def compute_alloc_sets(sid: SID) -> AllocTable:
    """must-alloc (greatest fixpoint) and may-alloc (least fixpoint) per predicate"""
    productive = productive_predicates(sid)
    must_par, must_const = _fixpoint(sid, productive, _intersection, start=True)
    may_par, may_const = _fixpoint(sid, productive, _union, start=False)
    non_uniform: list[NonUniformity] = []
    for name in sorted(productive):
        rules = [r for r in sid.rules_of(name) if all(q.name in productive for q in r.body.preds)]
        indexed = [(sid.rules_of(name).index(r), r) for r in rules]
        extra: list[int | Term] = [*sorted(may_par[name] - must_par[name])]
        extra += sorted(may_const[name] - must_const[name], key=lambda t: t.key)
        for what in extra:
            allocating = next(i for i, r in indexed if what in _flatten(_rule_alloc(r, may_par, may_const)))
            missing = next(i for i, r in indexed if what not in _flatten(_rule_alloc(r, must_par, must_const)))
            non_uniform.append(NonUniformity(name, what, allocating, missing))
    return AllocTable(must_par, may_par, must_const, may_const, tuple(non_uniform))


def _flatten(alloc: tuple[frozenset[int], frozenset[Term]]) -> set[int | Term]:
    return set(alloc[0]) | set(alloc[1])


def _pred_alloc(atom: Pred, tbl: AllocTable) -> set[Term]:
    if atom.name not in tbl:
        raise ConditionError(f"predicate {atom.name} missing from the allocation table")
    return {atom.args[j - 1] for j in tbl.allocpar(atom.name)} | set(tbl.alloconst(atom.name))


def _context_alloc(atom: Context, tbl: AllocTable) -> set[Term]:
    allocated = _pred_alloc(atom.target, tbl)
    for guard in atom.guards:
        allocated -= _pred_alloc(guard, tbl)
    return allocated


def alloc_terms(phi: SymbolicHeap | CoreFormula, tbl: AllocTable) -> set[Term]:
    """terms allocated by every model of phi"""
    if isinstance(phi, CoreFormula):
        allocated = {p.src for p in phi.pto}
        for c in phi.ctx:
            allocated |= _context_alloc(c, tbl)
        return allocated - phi.bound
    allocated = {p.src for p in phi.points_to}
    for atom in phi.preds:
        allocated |= _pred_alloc(atom, tbl)
    return allocated - set(phi.exists)
