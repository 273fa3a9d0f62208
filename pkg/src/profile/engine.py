from __future__ import annotations

import enum
import threading
from collections import defaultdict, deque
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field

from loguru import logger

from ..analysis.alloc import alloc_terms, compute_alloc_sets
from ..analysis.models import AllocTable
from ..analysis.restrictions import check_erestricted
from ..analysis.roots import infer_roots_and_check
from ..config import CONFIG
from ..contexts.unfold import core_unfoldings
from ..formula.core import EMP, CoreFormula, VariablePool, canonicalize, is_core
from ..formula.heaps import Problem
from ..formula.measure import problem_metrics
from ..formula.terms import Term, sort_terms
from ..sidfile.printer import render_core
from ..sl_entail.exceptions import ConditionError, CoreSizeBoundError, ResourceExceededError
from ..sl_entail.metrics import metrics
from ..sl_entail.utils import time_execution
from .compose import Composition, Frontier
from .coretrans import coretrans
from .points_to import pto_profile
from .quantifiers import add_vars, rem_var

ProfileSet = frozenset[CoreFormula]


class ProfileRelation:
    """grow-only relation between canonical core formulae and their abstraction sets"""

    def __init__(self) -> None:
        self._pairs: dict[CoreFormula, set[ProfileSet]] = {}
        self._arrivals: dict[CoreFormula, list[ProfileSet]] = {}
        self._formulas: set[CoreFormula] = set()
        self._set_count = 0
        self._lock = threading.Lock()

    def add(self, phi: CoreFormula, sets: Iterable[ProfileSet]) -> bool:
        """insert pairs, True when something new arrived"""
        with self._lock:
            known = self._pairs.setdefault(phi, set())
            arrivals = self._arrivals.setdefault(phi, [])
            self._formulas.add(phi)
            fresh = [s for s in dict.fromkeys(sets) if s not in known]
            for s in fresh:
                known.add(s)
                arrivals.append(s)
                self._formulas.update(s)
            self._set_count += len(fresh)
            return bool(fresh)

    def sets_of(self, phi: CoreFormula) -> frozenset[ProfileSet]:
        with self._lock:
            return frozenset(self._pairs.get(phi, ()))

    def arrivals(self, phi: CoreFormula) -> list[ProfileSet]:
        """the sets of phi in the order they were added"""
        with self._lock:
            return list(self._arrivals.get(phi, ()))

    def __contains__(self, phi: object) -> bool:
        return phi in self._pairs

    def pairs(self) -> Iterator[tuple[CoreFormula, ProfileSet]]:
        for phi in sorted(self._pairs, key=render_core):
            for profile in sorted(self._pairs[phi], key=_set_key):
                yield phi, profile

    @property
    def formula_count(self) -> int:
        return len(self._formulas)

    @property
    def set_count(self) -> int:
        return self._set_count

    def dump(self) -> str:
        """one line per pair, sorted, for golden comparisons"""
        return "".join(f"{render_core(phi)} : {_render_set(profile)}\n" for phi, profile in self.pairs())


def _set_key(profile: ProfileSet) -> list[str]:
    return sorted(render_core(phi) for phi in profile)


def _render_set(profile: ProfileSet) -> str:
    return "{" + ", ".join(_set_key(profile)) + "}"


class NodeKind(str, enum.Enum):
    """the profile constraint a core formula is subject to"""

    EMP = "emp"
    POINTS_TO = "points-to"
    PREDICATE = "predicate"
    SEPARATION = "separation"
    EXISTS = "exists"


@dataclass(frozen=True)
class _Node:
    formula: CoreFormula
    kind: NodeKind
    children: tuple[CoreFormula, ...] = ()
    frontier: Frontier = frozenset()
    added: tuple[frozenset[Term], frozenset[Term]] = (frozenset(), frozenset())
    variable: Term | None = None
    disjoint: bool = True


@dataclass
class ProfileEngine:
    """least fixpoint of the profile constraints over the formulae reachable from the seeds"""

    problem: Problem
    pool: VariablePool
    max_formulas: int = CONFIG.solver.max_core_formulas
    max_sets: int = CONFIG.solver.max_profile_sets
    relation: ProfileRelation = field(default_factory=ProfileRelation)

    def __post_init__(self) -> None:
        self.sid = self.problem.sid
        self.constants = self.problem.sorted_constants
        self.tbl: AllocTable = compute_alloc_sets(self.sid)
        self.size_bound = CONFIG.solver.size_bound_factor * problem_metrics(self.problem).width ** 2
        self.composition = Composition(self.sid, self.pool)
        self._nodes: dict[CoreFormula, _Node] = {}
        self._parents: dict[CoreFormula, set[CoreFormula]] = defaultdict(set)
        self._added: dict[tuple[ProfileSet, frozenset[Term]], ProfileSet] = {}
        self._removed: dict[tuple[ProfileSet, Term], ProfileSet] = {}
        self._composed: dict[tuple[ProfileSet, ProfileSet, Frontier], ProfileSet] = {}
        self._consumed: dict[tuple[CoreFormula, int], int] = {}

    def _check_size(self, phi: CoreFormula) -> None:
        if phi.size > self.size_bound:
            raise CoreSizeBoundError(f"|{phi}| = {phi.size} exceeds the bound {self.size_bound}")

    def _classify(self, phi: CoreFormula) -> _Node:
        if phi.ny:
            raise ValueError(f"no profile constraint for universally quantified {phi}")
        if phi.hx:
            return self._exists_node(phi)
        if phi.is_emp:
            return _Node(phi, NodeKind.EMP)
        if len(phi.atoms) > 1:
            return self._separation_node(phi)
        if phi.pto:
            return _Node(phi, NodeKind.POINTS_TO)
        if phi.ctx[0].guards:
            raise ValueError(f"no profile constraint for guarded context {phi}")
        return self._predicate_node(phi)

    def _exists_node(self, phi: CoreFormula) -> _Node:
        [v] = self.pool.fresh_v1(phi.free_vars())
        opened = CoreFormula(phi.hx[1:], (), phi.ctx, phi.pto).rename({phi.hx[0]: v})
        return _Node(phi, NodeKind.EXISTS, (canonicalize(opened, self.pool),), variable=v)

    def _separation_node(self, phi: CoreFormula) -> _Node:
        atoms = phi.atoms
        left, right = CoreFormula.of(atoms[:1]), CoreFormula.of(atoms[1:])
        alloc_left, alloc_right = alloc_terms(left, self.tbl), alloc_terms(right, self.tbl)
        if alloc_left & alloc_right:
            return _Node(phi, NodeKind.SEPARATION, disjoint=False)
        fv_left, fv_right = left.free_vars(), right.free_vars()
        frontier = frozenset((alloc_left | alloc_right) & ((fv_left & fv_right) | set(self.constants)))
        added = (frozenset(fv_right - fv_left), frozenset(fv_left - fv_right))
        return _Node(phi, NodeKind.SEPARATION, (left, right), frontier, added)

    def _predicate_node(self, phi: CoreFormula) -> _Node:
        atom = phi.ctx[0]
        fresh = [x for x in self.pool.v1 if x not in phi.terms()]
        children: list[CoreFormula] = []
        for unfolding in core_unfoldings(atom, self.sid, fresh):
            psi = unfolding.result
            ys = sort_terms(psi.free_vars() - set(atom.target.args))
            if len(ys) > len(self.pool.v2):
                continue
            candidate = canonicalize(CoreFormula(tuple(ys), (), psi.ctx, psi.pto), self.pool)
            if is_core(candidate, self.sid, self.pool) and candidate not in children:
                children.append(candidate)
        return _Node(phi, NodeKind.PREDICATE, tuple(children))

    def _register(self, seeds: Iterable[CoreFormula]) -> list[CoreFormula]:
        """create nodes for everything reachable, children before parents"""
        order: list[CoreFormula] = []
        stack: list[tuple[CoreFormula, bool]] = [(phi, False) for phi in seeds]
        while stack:
            phi, expanded = stack.pop()
            if expanded:
                order.append(phi)
                continue
            if phi in self._nodes:
                continue
            self._check_size(phi)
            node = self._nodes[phi] = self._classify(phi)
            stack.append((phi, True))
            for child in node.children:
                self._parents[child].add(phi)
                stack.append((child, False))
        return order

    def _added_vars(self, profile: ProfileSet, xs: frozenset[Term]) -> ProfileSet:
        key = (profile, xs)
        if key not in self._added:
            self._added[key] = frozenset(add_vars(profile, xs, self.sid, self.pool))
        return self._added[key]

    def _removed_var(self, profile: ProfileSet, x: Term) -> ProfileSet:
        key = (profile, x)
        if key not in self._removed:
            self._removed[key] = frozenset(rem_var(profile, x, self.sid, self.pool))
        return self._removed[key]

    def _compose(self, left: ProfileSet, right: ProfileSet, frontier: Frontier) -> ProfileSet:
        key = (left, right, frontier)
        if key not in self._composed:
            self._composed[key] = frozenset(self.composition.compose(left, right, frontier))
        return self._composed[key]

    def _delta(self, node: _Node, i: int) -> tuple[list[ProfileSet], list[ProfileSet]]:
        """sets of the i-th child already seen by node, and those arrived since its last evaluation"""
        key = (node.formula, i)
        seen = self._consumed.get(key, 0)
        every = self.relation.arrivals(node.children[i])
        self._consumed[key] = len(every)
        return every[:seen], every[seen:]

    def _evaluate(self, node: _Node) -> set[ProfileSet]:
        """the sets node gains from child sets it has not combined yet"""
        if node.kind is NodeKind.EMP:
            return {frozenset({EMP})}
        if node.kind is NodeKind.POINTS_TO:
            return {pto_profile(node.formula.pto[0], self.sid, self.pool, self.constants)}
        if node.kind is NodeKind.PREDICATE:
            return {s for i in range(len(node.children)) for s in self._delta(node, i)[1]}
        if node.kind is NodeKind.EXISTS:
            assert node.variable is not None
            return {self._removed_var(s, node.variable) for s in self._delta(node, 0)[1]}
        if not node.disjoint:
            return set()
        (old_left, new_left), (old_right, new_right) = self._delta(node, 0), self._delta(node, 1)
        pairs = [(s1, s2) for s1 in new_left for s2 in (*old_right, *new_right)]
        pairs.extend((s1, s2) for s1 in old_left for s2 in new_right)
        return {
            self._compose(self._added_vars(s1, node.added[0]), self._added_vars(s2, node.added[1]), node.frontier)
            for s1, s2 in pairs
        }

    def _check_budget(self) -> None:
        if self.relation.formula_count > self.max_formulas:
            raise ResourceExceededError(f"more than {self.max_formulas} core formulae in the profile")
        if self.relation.set_count > self.max_sets:
            raise ResourceExceededError(f"more than {self.max_sets} abstraction sets in the profile")

    def run(self, seeds: Iterable[CoreFormula]) -> ProfileRelation:
        work = deque(self._register(seeds))
        queued = set(work)
        rounds = 0
        while work:
            phi = work.popleft()
            queued.discard(phi)
            rounds += 1
            sets = self._evaluate(self._nodes[phi])
            for profile in sets:
                for psi in profile:
                    self._check_size(psi)
            if self.relation.add(phi, sets):
                for parent in self._parents[phi]:
                    if parent not in queued:
                        work.append(parent)
                        queued.add(parent)
            self._check_budget()
        logger.debug(f"Profile fixpoint reached after {rounds} evaluations of {len(self._nodes)} formulae")
        return self.relation


def prepare(problem: Problem) -> Problem:
    """the problem with inferred roots, ConditionError when it is not fit for profiles"""
    analysis = infer_roots_and_check(problem.sid)
    if not analysis.ok:
        raise ConditionError("the rules are not progressing and connected", analysis.violations)
    violations = check_erestricted(problem)
    if violations:
        raise ConditionError("the problem is not e-restricted", violations)
    return problem.with_sid(problem.sid.with_roots(analysis.roots))


def pool_for(problem: Problem) -> VariablePool:
    return VariablePool.for_width(problem_metrics(problem).width)


@time_execution
def compute_profiles(
    problem: Problem,
    pool: VariablePool | None = None,
    max_formulas: int | None = None,
    max_sets: int | None = None,
) -> ProfileRelation:
    """the profile relation for every core translation of a left-hand side"""
    problem = prepare(problem)
    pool = pool or pool_for(problem)
    engine = ProfileEngine(
        problem,
        pool,
        max_formulas if max_formulas is not None else CONFIG.solver.max_core_formulas,
        max_sets if max_sets is not None else CONFIG.solver.max_profile_sets,
    )
    seeds = {
        phi for sequent in problem.sequents for phi in coretrans(sequent.lhs, problem.sid, pool, problem.constants)
    }
    relation = engine.run(sorted(seeds, key=render_core))
    logger.info(f"Profile relation holds {relation.set_count} sets over {relation.formula_count} core formulae")
    metrics.register_profile_size(relation.formula_count, relation.set_count)
    return relation
