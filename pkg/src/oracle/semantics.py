from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from itertools import permutations

from ..analysis.roots import infer_roots_and_check
from ..contexts.rules import context_rules_for
from ..contexts.unfold import head_of
from ..formula.atoms import Context, Diseq, Emp, Eq, PointsTo, Pred
from ..formula.core import CoreFormula
from ..formula.heaps import SID, SymbolicHeap
from ..formula.terms import FreshNames, Term
from ..sl_entail.Types import Heap, Location, Store
from .structures import Bounds, Structure

Goal = PointsTo | Pred | Context | Eq | Diseq
Pure = Eq | Diseq
Binding = dict[Term, Location]


def rooted(sid: SID) -> SID:
    """sid with a root for every predicate that has one"""
    if all(name in sid.roots for name in sid.arities):
        return sid
    return sid.with_roots({**infer_roots_and_check(sid).roots, **sid.roots})


def progressing(sid: SID) -> bool:
    return all(len(rule.body.points_to) == 1 for rule in sid.all_rules())


def goals_of(phi: SymbolicHeap) -> tuple[Goal, ...]:
    return tuple(a for a in phi.atoms if not isinstance(a, Emp))


def _unify(binding: Binding, terms: Sequence[Term], locations: Sequence[Location]) -> Binding | None:
    result = binding
    for t, ell in zip(terms, locations):
        known = result.get(t)
        if known is None:
            if result is binding:
                result = dict(binding)
            result[t] = ell
        elif known != ell:
            return None
    return result


def _propagate(goals: tuple[Goal, ...], binding: Binding) -> tuple[tuple[Goal, ...], Binding] | None:
    """check pure goals whose sides are known, bind equalities with one known side"""
    changed = True
    while changed:
        changed = False
        rest: list[Goal] = []
        for g in goals:
            if not isinstance(g, (Eq, Diseq)):
                rest.append(g)
                continue
            if g.lhs == g.rhs:
                if isinstance(g, Diseq):
                    return None
                continue
            lhs, rhs = binding.get(g.lhs), binding.get(g.rhs)
            if lhs is not None and rhs is not None:
                if (lhs == rhs) != isinstance(g, Eq):
                    return None
            elif isinstance(g, Eq) and lhs is not None:
                binding, changed = {**binding, g.rhs: lhs}, True
            elif isinstance(g, Eq) and rhs is not None:
                binding, changed = {**binding, g.lhs: rhs}, True
            else:
                rest.append(g)
        goals = tuple(rest)
    return goals, binding


@dataclass
class Match:
    """a way of consuming the heap: the binding found, cut-out leaves and pure atoms left open"""

    binding: Binding
    leaves: tuple[Pred, ...] = ()
    pending: tuple[Pure, ...] = ()


@dataclass
class Matcher:
    """consumes every cell of heap against a list of goals, unfolding predicates and contexts on the way"""

    heap: Heap
    sid: SID
    depth: int
    cut: bool = False
    allocated: frozenset[Location] = frozenset()
    taken: Iterable[str] = ()
    fresh: FreshNames = field(init=False)

    def __post_init__(self) -> None:
        self.sid = rooted(self.sid)
        self.fresh = FreshNames(prefix="_o", taken=self.taken)
        self.prunable = progressing(self.sid)
        self.allocated = self.allocated or frozenset(self.heap)

    def matches(self, goals: Iterable[Goal], binding: Mapping[Term, Location]) -> Iterator[Match]:
        yield from self._search(tuple(goals), dict(binding), frozenset(self.heap), 0, ())

    def _root(self, goal: PointsTo | Pred | Context) -> Term | None:
        if isinstance(goal, PointsTo):
            return goal.src
        pred = goal.target if isinstance(goal, Context) else goal
        return self.sid.root_of(pred) if pred.name in self.sid.roots else None

    def _consumes(self, goal: Goal) -> bool:
        if isinstance(goal, PointsTo):
            return True
        if isinstance(goal, Pred):
            return self.prunable and not self.cut
        return isinstance(goal, Context) and not goal.guards and self.prunable and not self.cut

    def _priority(self, goal: PointsTo | Pred | Context, binding: Binding) -> int:
        root = self._root(goal)
        bound = root is not None and root in binding
        if isinstance(goal, PointsTo):
            return 0 if bound else 2
        return 1 if bound else 3

    def _search(
        self,
        goals: tuple[Goal, ...],
        binding: Binding,
        cells: frozenset[Location],
        depth: int,
        leaves: tuple[Pred, ...],
    ) -> Iterator[Match]:
        propagated = _propagate(goals, binding)
        if propagated is None:
            return
        goals, binding = propagated
        spatial = [(i, g) for i, g in enumerate(goals) if isinstance(g, (PointsTo, Pred, Context))]
        if self.prunable and sum(1 for _, g in spatial if self._consumes(g)) > len(cells):
            return
        if not spatial:
            if not cells:
                yield Match(binding, leaves, tuple(g for g in goals if isinstance(g, (Eq, Diseq))))
            return
        index, goal = min(spatial, key=lambda item: self._priority(item[1], binding))
        rest = goals[:index] + goals[index + 1 :]
        if isinstance(goal, PointsTo):
            yield from self._consume(goal, rest, binding, cells, depth, leaves)
            return
        if depth >= self.depth:
            return
        if isinstance(goal, Context) and not goal.guards:
            goal = goal.target
        if isinstance(goal, Pred):
            if self.cut:
                root = self._root(goal)
                if root is None or binding.get(root) not in self.allocated:
                    yield from self._search(rest, binding, cells, depth, (*leaves, goal))
            for rule in self.sid.rules_of(goal.name):
                unfolded = goals_of(rule.instantiate(goal.args, self.fresh))
                yield from self._search((*rest, *unfolded), binding, cells, depth + 1, leaves)
            return
        head, theta = head_of(goal, self.sid)
        for context_rule in context_rules_for(head, self.sid):
            sigma = {**theta, **{z: self.fresh() for z in context_rule.exists}}
            expanded: list[Goal] = [
                *(p.substitute(sigma) for p in context_rule.pto),
                *(c.substitute(sigma) for c in context_rule.contexts),
                *(a.substitute(sigma) for a in context_rule.pure),
            ]
            yield from self._search((*rest, *expanded), binding, cells, depth + 1, leaves)

    def _consume(
        self,
        goal: PointsTo,
        rest: tuple[Goal, ...],
        binding: Binding,
        cells: frozenset[Location],
        depth: int,
        leaves: tuple[Pred, ...],
    ) -> Iterator[Match]:
        src = binding.get(goal.src)
        for ell in [src] if src is not None else sorted(cells):
            if ell not in cells or len(self.heap[ell]) != len(goal.dests):
                continue
            extended = _unify(binding, goal.terms(), (ell, *self.heap[ell]))
            if extended is not None:
                yield from self._search(rest, extended, cells - {ell}, depth, leaves)


def resolve(
    pending: Sequence[Pure], binding: Binding, known: Iterable[Location] = (), extra: Iterable[Term] = ()
) -> Iterator[Binding]:
    """complete binding over the variables of pending and extra so that every pure atom holds"""
    terms = {*extra, *(t for atom in pending for t in atom.terms())}
    open_ = sorted((t for t in terms if t not in binding), key=lambda t: t.key)
    used = sorted(set(binding.values()) | set(known))
    start = max(used, default=-1) + 1

    def extend(i: int, current: Binding, fresh: int) -> Iterator[Binding]:
        if i == len(open_):
            if all((current[a.lhs] == current[a.rhs]) == isinstance(a, Eq) for a in pending):
                yield current
            return
        for ell in [*used, *range(start, start + fresh)]:
            yield from extend(i + 1, {**current, open_[i]: ell}, fresh)
        yield from extend(i + 1, {**current, open_[i]: start + fresh}, fresh + 1)

    yield from extend(0, binding, 0)


def _opened(phi: SymbolicHeap, fresh: FreshNames) -> SymbolicHeap:
    return phi.rename_bound({x: fresh() for x in phi.exists})


def _store_for(store: Store, phi: SymbolicHeap) -> Binding:
    free = phi.free_vars()
    return {t: ell for t, ell in store.items() if t.const or t in free}


def witnesses(st: Structure, phi: SymbolicHeap, sid: SID, b: Bounds) -> Iterator[Binding]:
    """complete assignments under which some unfolding of phi within the depth bound holds in st"""
    store = st.s
    missing = phi.free_vars() - set(store)
    if missing:
        raise ValueError(f"the store does not interpret {', '.join(sorted(map(str, missing)))}")
    taken = {t.name for t in (*store, *phi.terms(), *phi.exists)}
    matcher = Matcher(st.h, sid, b.unfold_depth, taken=taken)
    opened = _opened(phi, matcher.fresh)
    for match in matcher.matches(goals_of(opened), _store_for(store, phi)):
        yield from resolve(match.pending, match.binding, st.loc())


def sat_symbolic_heap(st: Structure, phi: SymbolicHeap, sid: SID, b: Bounds) -> bool:
    return any(True for _ in witnesses(st, phi, sid, b))


def normal_witness(binding: Binding) -> bool:
    """distinct variables share a location only when a constant lives there"""
    constants = {ell for t, ell in binding.items() if t.const}
    owner: dict[Location, Term] = {}
    for t, ell in binding.items():
        if t.const or ell in constants:
            continue
        if owner.setdefault(ell, t) != t:
            return False
    return True


def is_normal_model(st: Structure, phi: SymbolicHeap, sid: SID, b: Bounds) -> bool:
    return any(normal_witness(w) for w in witnesses(st, phi, sid, b))


def sat_core_formula(st: Structure, psi: CoreFormula, sid: SID, b: Bounds) -> bool:
    """
    ∃h binders range over the heap locations no store term names, ∀¬h binders
    are checked at one fresh location each
    """
    if not st.injective:
        raise ValueError(f"core formulae are interpreted over injective structures, not {st}")
    store = st.s
    missing = psi.free_terms() - set(store)
    if missing:
        raise ValueError(f"the store does not interpret {', '.join(sorted(map(str, missing)))}")
    hidden = sorted(st.loc() - st.image())
    outside = dict(zip(psi.ny, st.spare(len(psi.ny))))
    taken = {t.name for t in (*store, *psi.terms())}
    matcher = Matcher(st.h, sid, b.unfold_depth, taken=taken)
    goals: list[Goal] = [*psi.ctx, *psi.pto]
    for inside in permutations(hidden, len(psi.hx)):
        binding = {**store, **dict(zip(psi.hx, inside)), **outside}
        for match in matcher.matches(goals, binding):
            if any(True for _ in resolve(match.pending, match.binding, st.loc())):
                return True
    return False
