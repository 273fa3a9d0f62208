from __future__ import annotations

from collections.abc import Iterable, Iterator

from ..formula.atoms import Context
from ..formula.core import CoreFormula, sort_atoms


def consequence_steps(phi: CoreFormula) -> Iterator[CoreFormula]:
    """(α ⊸ p(t)) * ((β * p(t)) ⊸ q(u)) ⊩ (α * β) ⊸ q(u), binders untouched"""
    for i, inner in enumerate(phi.ctx):
        for j, outer in enumerate(phi.ctx):
            if i == j or inner.target not in outer.guards:
                continue
            guards = list(outer.guards)
            guards.remove(inner.target)
            merged = Context.make([*inner.guards, *guards], outer.target)
            rest = tuple(c for k, c in enumerate(phi.ctx) if k not in (i, j))
            yield sort_atoms(CoreFormula(phi.hx, phi.ny, (*rest, merged), phi.pto))


def consequence_closure(formulas: Iterable[CoreFormula]) -> set[CoreFormula]:
    """everything reachable by ⊩ steps, the inputs included; every step removes one atom"""
    seen = {sort_atoms(phi) for phi in formulas}
    work = list(seen)
    while work:
        for successor in consequence_steps(work.pop()):
            if successor not in seen:
                seen.add(successor)
                work.append(successor)
    return seen
