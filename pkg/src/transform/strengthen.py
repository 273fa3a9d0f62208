from __future__ import annotations

from collections.abc import Sequence

from loguru import logger

from ..analysis.alloc import compute_alloc_sets
from ..analysis.establishment import check_established
from ..analysis.models import AllocTable, Violation, ViolationKind
from ..formula.atoms import Atom, Diseq, Pred
from ..formula.heaps import SID, Problem, Rule, Sequent, SymbolicHeap
from ..formula.terms import FreshNames, Term
from ..sl_entail.exceptions import NotEstablishedError
from ..sl_entail.metrics import metrics
from ..sl_entail.utils import time_execution
from .normalize import SplitMode, normalize, simplify


def _replace_pred(heap: SymbolicHeap, index: int, atom: Pred, extra: Sequence[Atom] = ()) -> SymbolicHeap:
    atoms: list[Atom] = []
    seen = 0
    for a in heap.atoms:
        if isinstance(a, Pred):
            if seen == index:
                a = atom
            seen += 1
        atoms.append(a)
    return heap.with_atoms((*atoms, *extra))


class _AllocatingPredicates:
    """p̄(x₀, x⃗): the unfoldings of p(x⃗) that allocate x₀ strictly below the root cell"""

    def __init__(self, sid: SID, tbl: AllocTable) -> None:
        self.arities: dict[str, int] = dict(sid.arities)
        self.rules: dict[str, tuple[Rule, ...]] = dict(sid.rules)
        self.tbl = tbl
        self._names: dict[str, str] = {}

    def name_of(self, name: str) -> str:
        if name in self._names:
            return self._names[name]
        bar = f"{name}__alloc"
        while bar in self.arities:
            bar += "_"
        self._names[name] = bar
        self.arities[bar] = self.arities[name] + 1
        self.tbl = self.tbl.extended(
            bar, frozenset({1} | {j + 1 for j in self.tbl.allocpar(name)}), self.tbl.alloconst(name)
        )
        self.rules[bar] = ()
        self.rules[bar] = self._define(name, bar)
        logger.debug(f"Allocating predicate {bar} has {len(self.rules[bar])} rules")
        return bar

    def _define(self, name: str, bar: str) -> tuple[Rule, ...]:
        rules: list[Rule] = []
        for rule in self.rules[name]:
            taken = {t.name for t in (*rule.params, *rule.body.exists)}
            x0 = FreshNames(prefix="x", taken=taken)()
            params = (x0, *rule.params)
            for i, atom in enumerate(rule.body.preds):
                inner = Pred(self.name_of(atom.name), (x0, *atom.args))
                rules.append(Rule(bar, params, _replace_pred(rule.body, i, inner)))
                for j in sorted(self.tbl.allocpar(atom.name)):
                    z = atom.args[j - 1]
                    if z in rule.body.exists:
                        rules.append(Rule(bar, params, rule.body.instantiate(z, x0)))
        return tuple(dict.fromkeys(rules))

    def directly_allocated(self, heap: SymbolicHeap, x: Term) -> bool:
        if any(p.src == x for p in heap.points_to):
            return True
        return any(x == atom.args[j - 1] for atom in heap.preds for j in self.tbl.allocpar(atom.name))

    def allocates(self, heap: SymbolicHeap, x: Term, constants: Sequence[Term]) -> list[SymbolicHeap]:
        """the cases of heap in which x is a constant or an allocated location"""
        cases = [heap.instantiate(x, c) for c in constants]
        cases += [heap.instantiate(x, p.src) for p in heap.points_to if p.src != x]
        for i, atom in enumerate(heap.preds):
            inner = Pred(self.name_of(atom.name), (x, *atom.args))
            cases.append(_replace_pred(heap, i, inner, [Diseq(x, c) for c in constants]))
            cases += [
                heap.instantiate(x, atom.args[j - 1])
                for j in sorted(self.tbl.allocpar(atom.name))
                if atom.args[j - 1] != x
            ]
        simplified = [s for s in (simplify(case) for case in cases) if s is not None]
        return list(dict.fromkeys(simplified))

    def strengthen(self, heap: SymbolicHeap, constants: Sequence[Term]) -> list[SymbolicHeap]:
        done: list[SymbolicHeap] = []
        work: list[tuple[SymbolicHeap, tuple[Term, ...]]] = [(heap, heap.exists)]
        while work:
            current, pending = work.pop()
            if not pending:
                done.append(current)
                continue
            x, rest = pending[0], pending[1:]
            if x not in current.exists or self.directly_allocated(current, x):
                work.append((current, rest))
                continue
            work.extend((case, rest) for case in self.allocates(current, x, constants))
        return done

    def sid(self) -> SID:
        return SID(dict(self.arities), dict(self.rules))


def drop_variable_disequalities(heap: SymbolicHeap) -> SymbolicHeap:
    return heap.with_atoms(a for a in heap.atoms if not (isinstance(a, Diseq) and not a.lhs.const and not a.rhs.const))


def _not_established(problem: Problem) -> NotEstablishedError:
    report = check_established(problem)
    violations = [
        Violation(ViolationKind.ESTABLISHED, w.locus, str(w.variable), w.status.value)
        for w in report.failures
        if w.locus.predicate is not None
    ]
    return NotEstablishedError("the problem is not established", violations)


@time_execution
def established_to_erestricted(problem: Problem) -> Problem:
    """an e-restricted normalized problem with the verdicts of an established one"""
    if not check_established(problem).established:
        raise _not_established(problem)
    normalized = normalize(problem, SplitMode.ALL_TERMS)
    allocating = _AllocatingPredicates(normalized.sid, compute_alloc_sets(normalized.sid))
    constants = normalized.sorted_constants
    sequents = [
        Sequent(s.lhs, tuple(case for rhs in s.rhs for case in allocating.strengthen(rhs, constants)))
        for s in normalized.sequents
    ]
    sid = allocating.sid()
    rules = {
        name: tuple(rule.with_body(drop_variable_disequalities(rule.body)) for rule in named)
        for name, named in sid.rules.items()
    }
    sequents = [
        Sequent(drop_variable_disequalities(s.lhs), tuple(drop_variable_disequalities(h) for h in s.rhs))
        for s in sequents
    ]
    reduced = normalized.with_sid(SID(sid.arities, rules)).with_sequents(sequents, normalized.all_origins)
    added = len(sid.arities) - len(normalized.sid.arities)
    logger.info(f"Strengthened {len(sequents)} sequents with {added} allocating predicates")
    result = normalize(reduced, SplitMode.CONSTANTS)
    metrics.register_transform("established", result.sid.rule_count)
    return result
