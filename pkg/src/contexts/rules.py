from __future__ import annotations

import threading
from collections.abc import Sequence
from dataclasses import dataclass
from itertools import product

from loguru import logger

from ..formula.atoms import Context, Diseq, Eq, PointsTo, Pred
from ..formula.heaps import SID, SymbolicHeap
from ..formula.terms import Term, subst_all, var
from ..sl_entail.exceptions import ConditionError
from ..sl_entail.utils import partial_maps

Shape = tuple[str, tuple[str, ...]]


@dataclass(frozen=True, slots=True)
class ContextHead:
    """guards ⊸ target over pairwise distinct formal parameters"""

    guards: tuple[Pred, ...]
    target: Pred

    @classmethod
    def for_shape(cls, shape: Shape, sid: SID) -> ContextHead:
        name, guard_names = shape
        if name not in sid.arities or any(g not in sid.arities for g in guard_names):
            raise ConditionError(f"unknown predicate in context shape {shape}")
        target = Pred(name, tuple(var(f"_t{i}") for i in range(sid.arities[name])))
        guards = tuple(
            Pred(g, tuple(var(f"_g{k}_{i}") for i in range(sid.arities[g]))) for k, g in enumerate(guard_names)
        )
        return cls(guards, target)

    @property
    def shape(self) -> Shape:
        return self.target.name, tuple(g.name for g in self.guards)

    @property
    def formals(self) -> tuple[Term, ...]:
        return (*self.target.args, *(t for g in self.guards for t in g.args))

    def __str__(self) -> str:
        return str(Context(self.guards, self.target))


@dataclass(frozen=True, slots=True)
class ContextRule:
    """head ⇐ ∃exists. pto * ✱contexts * ✱pure"""

    head: ContextHead
    exists: tuple[Term, ...]
    pto: tuple[PointsTo, ...]
    contexts: tuple[Context, ...]
    pure: tuple[Eq | Diseq, ...]

    @property
    def is_empty_heap(self) -> bool:
        return not self.pto

    def __str__(self) -> str:
        atoms = [*map(str, self.pto), *map(str, self.contexts), *map(str, self.pure)]
        body = " * ".join(atoms) if atoms else "emp"
        if self.exists:
            body = f"∃{','.join(map(str, self.exists))}. {body}"
        return f"{self.head} ⇐ {body}"


def _distributions(n: int, m: int) -> list[tuple[int, ...]]:
    """each of n guards assigned to one of m body atoms"""
    if m == 0:
        return [()] if n == 0 else []
    return list(product(range(m), repeat=n))


class ContextSystem:
    """the context rules of an SID, generated per head shape on demand"""

    _systems: dict[int, ContextSystem] = {}
    _systems_lock = threading.Lock()

    def __init__(self, sid: SID) -> None:
        self.sid = sid
        self._memo: dict[Shape, list[ContextRule]] = {}
        self._lock = threading.Lock()
        self._reach = {name: sid.reachable_from([name]) for name in sid.arities}

    @classmethod
    def of(cls, sid: SID) -> ContextSystem:
        with cls._systems_lock:
            system = cls._systems.get(id(sid))
            if system is None or system.sid is not sid:
                system = cls._systems[id(sid)] = cls(sid)
            return system

    def rules_for(self, head: ContextHead) -> list[ContextRule]:
        canonical = ContextHead.for_shape(head.shape, self.sid)
        with self._lock:
            rules = self._memo.get(head.shape)
        if rules is None:
            rules = self._generate(canonical)
            with self._lock:
                rules = self._memo.setdefault(head.shape, rules)
        if head == canonical:
            return rules
        renaming = dict(zip(canonical.formals, head.formals))
        return [_rename(rule, head, renaming) for rule in rules]

    def _reachable(self, guard: str, target: str) -> bool:
        return guard in self._reach[target]

    def _generate(self, head: ContextHead) -> list[ContextRule]:
        rules: list[ContextRule] = []
        target = head.target
        if len(head.guards) == 1 and head.guards[0].name == target.name:
            pure = tuple(Eq(x, y) for x, y in zip(target.args, head.guards[0].args))
            rules.append(ContextRule(head, (), (), (), pure))
        formals = list(head.formals)
        for rule in self.sid.rules_of(target.name):
            renaming = {z: var(f"_z{i}") for i, z in enumerate(rule.body.exists)}
            body = rule.body.rename_bound(renaming).substitute(dict(zip(rule.params, target.args)))
            atoms = body.preds
            for assignment in _distributions(len(head.guards), len(atoms)):
                groups: list[list[Pred]] = [[] for _ in atoms]
                for guard, j in zip(head.guards, assignment):
                    groups[j].append(guard)
                if any(not self._reachable(g.name, atoms[j].name) for j, group in enumerate(groups) for g in group):
                    continue
                for zeta in partial_maps(list(body.exists), formals) if head.guards else [{}]:
                    rules.append(_instance(head, body, zeta, groups))
        logger.debug(f"Generated {len(rules)} context rules for {head}")
        return rules


def _instance(
    head: ContextHead, body: SymbolicHeap, zeta: dict[Term, Term], groups: Sequence[list[Pred]]
) -> ContextRule:
    contexts = tuple(Context.make(group, atom.substitute(zeta)) for group, atom in zip(groups, body.preds))
    return ContextRule(
        head,
        tuple(z for z in body.exists if z not in zeta),
        tuple(p.substitute(zeta) for p in body.points_to),
        contexts,
        tuple(a.substitute(zeta) for a in (*body.equalities, *body.disequalities)),
    )


def _rename(rule: ContextRule, head: ContextHead, renaming: dict[Term, Term]) -> ContextRule:
    return ContextRule(
        head,
        subst_all(rule.exists, renaming),
        tuple(p.substitute(renaming) for p in rule.pto),
        tuple(c.substitute(renaming) for c in rule.contexts),
        tuple(a.substitute(renaming) for a in rule.pure),
    )


def context_rules_for(head: ContextHead, sid: SID) -> list[ContextRule]:
    """rules defining head: the empty-heap rule when guard and target coincide, and one rule per guard distribution"""
    return ContextSystem.of(sid).rules_for(head)
