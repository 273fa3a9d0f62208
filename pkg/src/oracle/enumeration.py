from __future__ import annotations

import enum
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field

from loguru import logger

from ..config import CONFIG
from ..formula.atoms import Context, Diseq, Eq, PointsTo, Pred
from ..formula.heaps import SID, SymbolicHeap
from ..formula.terms import FreshNames, Term, sort_terms
from ..sl_entail.exceptions import OracleBudgetError
from ..sl_entail.Types import Heap, Location
from .semantics import Binding, Goal, goals_of, normal_witness, progressing, resolve, rooted
from .structures import Bounds, Structure, canonical_structure


class ModelFilter(str, enum.Enum):
    ALL = "all"
    INJECTIVE = "injective"
    NORMAL = "normal"


def _stores(variables: Sequence[Term], constants: Sequence[Term], injective: bool) -> Iterator[Binding]:
    """stores over constants and variables up to renaming, constants kept apart"""
    base: Binding = {c: i for i, c in enumerate(constants)}

    def extend(i: int, store: Binding, used: int) -> Iterator[Binding]:
        if i == len(variables):
            yield store
            return
        if not injective:
            for ell in range(used):
                yield from extend(i + 1, {**store, variables[i]: ell}, used)
        yield from extend(i + 1, {**store, variables[i]: used}, used + 1)

    yield from extend(0, base, len(constants))


@dataclass
class _Generator:
    """builds heaps cell by cell while unfolding phi, each new location numbered in order of appearance"""

    sid: SID
    bounds: Bounds
    universe: int
    taken: Iterable[str] = ()
    fresh: FreshNames = field(init=False)

    def __post_init__(self) -> None:
        self.sid = rooted(self.sid)
        self.fresh = FreshNames(prefix="_m", taken=self.taken)
        self.prunable = progressing(self.sid)

    def run(self, goals: tuple[Goal, ...], store: Binding) -> Iterator[tuple[Heap, Binding]]:
        yield from self._search(goals, store, {}, max(store.values(), default=-1) + 1, 0)

    def _choices(self, next_loc: int) -> list[Location]:
        return list(range(min(next_loc + 1, self.universe)))

    def _assign(self, terms: Sequence[Term], binding: Binding, next_loc: int) -> Iterator[tuple[Binding, int]]:
        """bind every open term of terms to an existing location or the next new one"""
        open_ = [t for t in dict.fromkeys(terms) if t not in binding]
        if not open_:
            yield binding, next_loc
            return
        first, rest = open_[0], open_[1:]
        for ell in self._choices(next_loc):
            yield from self._assign(rest, {**binding, first: ell}, max(next_loc, ell + 1))

    def _search(
        self, goals: tuple[Goal, ...], binding: Binding, heap: Heap, next_loc: int, depth: int
    ) -> Iterator[tuple[Heap, Binding]]:
        checked = _check_pure(goals, binding)
        if checked is None:
            return
        goals = checked
        spatial = [(i, g) for i, g in enumerate(goals) if isinstance(g, (PointsTo, Pred))]
        pending = sum(1 for _, g in spatial if isinstance(g, PointsTo) or self.prunable)
        if len(heap) + pending > self.bounds.heap_cells:
            return
        if not spatial:
            pure = [g for g in goals if isinstance(g, (Eq, Diseq))]
            for complete in resolve(pure, binding):
                yield heap, complete
            return
        index, goal = min(spatial, key=lambda item: self._priority(item[1], binding))
        rest = goals[:index] + goals[index + 1 :]
        if isinstance(goal, PointsTo):
            for with_src, after_src in self._assign([goal.src], binding, next_loc):
                src = with_src[goal.src]
                if src in heap:
                    continue
                for extended, after in self._assign(goal.dests, with_src, after_src):
                    cell = {**heap, src: tuple(extended[d] for d in goal.dests)}
                    yield from self._search(rest, extended, cell, after, depth)
            return
        if depth >= self.bounds.unfold_depth:
            return
        for rule in self.sid.rules_of(goal.name):
            unfolded = goals_of(rule.instantiate(goal.args, self.fresh))
            yield from self._search((*rest, *unfolded), binding, heap, next_loc, depth + 1)

    def _priority(self, goal: PointsTo | Pred, binding: Binding) -> int:
        if isinstance(goal, PointsTo):
            return 0 if goal.src in binding else 2
        root = self.sid.root_of(goal) if goal.name in self.sid.roots else None
        return 1 if root is not None and root in binding else 3


def _check_pure(goals: tuple[Goal, ...], binding: Binding) -> tuple[Goal, ...] | None:
    rest: list[Goal] = []
    for g in goals:
        if isinstance(g, (Eq, Diseq)) and g.lhs in binding and g.rhs in binding:
            if (binding[g.lhs] == binding[g.rhs]) != isinstance(g, Eq):
                return None
        elif isinstance(g, Context):
            raise ValueError(f"models are enumerated for symbolic heaps, not the context atom {g}")
        else:
            rest.append(g)
    return tuple(rest)


@dataclass(frozen=True)
class Model:
    structure: Structure
    normal: bool


def models(
    phi: SymbolicHeap,
    sid: SID,
    b: Bounds,
    constants: Iterable[Term] = (),
    injective: bool = True,
    max_structures: int | None = None,
) -> list[Model]:
    """every structure of phi within the bounds, one per isomorphism class, with its normality"""
    cap = max_structures if max_structures is not None else CONFIG.oracle.max_structures
    constants = sort_terms({*constants, *phi.constants()})
    variables = sort_terms(phi.free_vars())
    universe = b.universe_for(max(sid_fields(sid, phi), 1), len(constants) + len(variables))
    taken = {t.name for t in (*phi.terms(), *phi.exists, *constants)}
    found: dict[Structure, bool] = {}
    for store in _stores(variables, constants, injective):
        generator = _Generator(sid, b, universe, taken)
        opened = phi.rename_bound({x: generator.fresh() for x in phi.exists})
        for heap, binding in generator.run(goals_of(opened), store):
            structure = canonical_structure(store, heap)
            found[structure] = found.get(structure, False) or normal_witness(binding)
            if len(found) > cap:
                raise OracleBudgetError(f"more than {cap} structures for {phi}")
    logger.debug(f"{len(found)} structures of {phi} within {b.heap_cells} cells")
    return [Model(st, normal) for st, normal in sorted(found.items(), key=lambda item: (item[0].heap, item[0].store))]


def sid_fields(sid: SID, phi: SymbolicHeap) -> int:
    """the number of fields a cell has, as far as the rules and phi tell"""
    cells = [*phi.points_to, *(p for rule in sid.all_rules() for p in rule.body.points_to)]
    return max((len(p.dests) for p in cells), default=1)


def enumerate_models(
    phi: SymbolicHeap,
    sid: SID,
    b: Bounds,
    model_filter: ModelFilter = ModelFilter.ALL,
    constants: Iterable[Term] = (),
) -> Iterator[Structure]:
    """the structures of phi within the bounds, up to location renaming"""
    injective = model_filter is not ModelFilter.ALL
    for model in models(phi, sid, b, constants, injective):
        if model_filter is ModelFilter.NORMAL and not model.normal:
            continue
        yield model.structure
