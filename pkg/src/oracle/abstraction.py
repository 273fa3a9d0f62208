from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass
from itertools import product

from loguru import logger

from ..config import CONFIG
from ..formula.atoms import Context, PointsTo, Pred
from ..formula.core import CoreFormula, VariablePool, canonicalize, is_core
from ..formula.heaps import SID
from ..formula.terms import Term, sort_terms, var
from ..sl_entail.exceptions import OracleBudgetError, PoolExhaustedError
from ..sl_entail.Types import Location
from ..sl_entail.utils import set_partitions
from .semantics import Binding, Matcher, Pure, goals_of, resolve, rooted
from .structures import Bounds, Structure

CoreAtom = PointsTo | Context


@dataclass(frozen=True)
class _Template:
    """atoms over search variables for one block of cells, some variables still unplaced"""

    atoms: tuple[CoreAtom, ...]
    binding: tuple[tuple[Term, Location], ...]
    pending: tuple[Pure, ...] = ()

    def tagged(self, i: int) -> _Template:
        """variables renamed apart from the templates of other blocks"""
        renaming = {t: var(f"{t.name}#{i}") for t in self.terms() if not t.const}
        return _Template(
            tuple(a.substitute(renaming) for a in self.atoms),
            tuple((renaming.get(t, t), ell) for t, ell in self.binding),
            tuple(a.substitute(renaming) for a in self.pending),
        )

    def terms(self) -> set[Term]:
        return {t for a in (*self.atoms, *self.pending) for t in a.terms()} | {t for t, _ in self.binding}


class _Abstraction:
    def __init__(self, st: Structure, pool: VariablePool, sid: SID, b: Bounds) -> None:
        self.st = st
        self.pool = pool
        self.sid = rooted(sid)
        self.bounds = b
        self.store = st.s
        self.heap = st.h
        self.names: dict[Location, Term] = {ell: t for t, ell in st.store}
        self.constants: Binding = {t: ell for t, ell in st.store if t.const}
        self._templates: dict[frozenset[Location], list[_Template]] = {}
        self.budget = CONFIG.oracle.max_witnesses

    def _cell(self, ell: Location) -> _Template:
        cell = (ell, *self.heap[ell])
        terms = [var(f"_l{x}") for x in cell]
        return _Template((PointsTo(terms[0], tuple(terms[1:])),), tuple(zip(terms, cell)))

    def _contexts(self, block: frozenset[Location]) -> Iterator[_Template]:
        matcher = Matcher(
            {ell: self.heap[ell] for ell in block},
            self.sid,
            self.bounds.unfold_depth,
            cut=True,
            allocated=self.st.dom(),
            taken={t.name for t in self.store},
        )
        for name in sorted(self.sid.arities):
            target = Pred(name, tuple(matcher.fresh.take(self.sid.arities[name])))
            for rule in self.sid.rules_of(name):
                body = goals_of(rule.instantiate(target.args, matcher.fresh))
                for match in matcher.matches(body, self.constants):
                    context = Context.make(list(match.leaves), target)
                    yield _Template((context,), tuple(match.binding.items()), match.pending)

    def templates(self, block: frozenset[Location]) -> list[_Template]:
        if block not in self._templates:
            found = [self._cell(next(iter(block)))] if len(block) == 1 else []
            found.extend(self._contexts(block))
            self._templates[block] = found
        return self._templates[block]

    def _name(self, atoms: tuple[CoreAtom, ...], binding: Binding) -> CoreFormula | None:
        """the core formula naming every location by a store term or a bounded binder"""
        inside, dom = self.st.loc(), self.st.dom()
        renaming: dict[Term, Term] = {}
        hx: dict[Location, Term] = {}
        ny: dict[Location, Term] = {}
        for t in sorted({t for a in atoms for t in a.terms()}, key=lambda t: t.key):
            ell = binding[t]
            if ell in self.names:
                renaming[t] = self.names[ell]
            elif ell in inside:
                renaming[t] = hx.setdefault(ell, var(f"_h{ell}"))
            else:
                renaming[t] = ny.setdefault(ell, var(f"_n{ell}"))
        for a in atoms:
            if isinstance(a, Context) and any(binding[self.sid.root_of(g)] in dom for g in a.guards):
                return None
        if len(hx) + len(ny) > len(self.pool.v2):
            return None
        phi = CoreFormula.of([a.substitute(renaming) for a in atoms], hx.values(), ny.values())
        try:
            candidate = canonicalize(phi, self.pool)
        except PoolExhaustedError:
            return None
        return candidate if is_core(candidate, self.sid, self.pool) else None

    def run(self) -> set[CoreFormula]:
        result: set[CoreFormula] = set()
        spent = 0
        for partition in set_partitions(sorted(self.heap)):
            blocks = [self.templates(frozenset(block)) for block in partition]
            for choice in product(*blocks):
                parts = [template.tagged(i) for i, template in enumerate(choice)]
                atoms = tuple(a for part in parts for a in part.atoms)
                pending = [a for part in parts for a in part.pending]
                binding: Binding = {t: ell for part in parts for t, ell in part.binding}
                extra = {t for a in atoms for t in a.terms()}
                for complete in resolve(pending, binding, self.st.loc() | self.st.image(), extra):
                    spent += 1
                    if spent > self.budget:
                        raise OracleBudgetError(f"more than {self.budget} witness candidates for {self.st}")
                    phi = self._name(atoms, complete)
                    if phi is not None:
                        result.add(phi)
        logger.debug(f"{len(result)} core formulae abstract {self.st} after {spent} witness candidates")
        return result


def core_abstraction(st: Structure, pool: VariablePool, sid: SID, b: Bounds) -> set[CoreFormula]:
    """every core formula with a witness in the injective structure st"""
    if not st.injective:
        raise ValueError(f"the core abstraction is defined for injective structures, not {st}")
    strays = sort_terms(t for t, _ in st.store if not t.const and not pool.in_v1(t))
    if strays:
        raise ValueError(f"store variables {', '.join(map(str, strays))} are outside the free pool")
    return _Abstraction(st, pool, sid, b).run()
