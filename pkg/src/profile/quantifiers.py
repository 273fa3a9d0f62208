from __future__ import annotations

from collections.abc import Iterable

from ..formula.core import CoreFormula, VariablePool, canonicalize, is_core
from ..formula.heaps import SID
from ..formula.terms import Term, sort_terms


def _instances(phi: CoreFormula, x: Term) -> list[CoreFormula]:
    """phi with one ∀¬h binder instantiated to x"""
    return [
        CoreFormula(phi.hx, tuple(v for v in phi.ny if v != y), phi.ctx, phi.pto).rename({y: x}) for y in phi.ny
    ]


def add_var(formulas: Iterable[CoreFormula], x: Term, sid: SID, pool: VariablePool) -> set[CoreFormula]:
    """the abstraction after x is stored at a location outside the heap and the store image"""
    result: set[CoreFormula] = set()
    for phi in formulas:
        result.add(phi)
        if x in phi.free_vars():
            continue
        for instance in _instances(phi, x):
            candidate = canonicalize(instance, pool)
            if is_core(candidate, sid, pool):
                result.add(candidate)
    return result


def add_vars(formulas: Iterable[CoreFormula], xs: Iterable[Term], sid: SID, pool: VariablePool) -> set[CoreFormula]:
    result = set(formulas)
    for x in sort_terms(xs):
        result = add_var(result, x, sid, pool)
    return result


def rem_var(formulas: Iterable[CoreFormula], x: Term, sid: SID, pool: VariablePool) -> set[CoreFormula]:
    """the abstraction after an allocated x leaves the store: occurrences of x get ∃h-bound"""
    result: set[CoreFormula] = set()
    for phi in formulas:
        if x not in phi.free_vars():
            result.add(phi)
            continue
        hat = next((v for v in pool.v2 if v not in phi.bound), None)
        if hat is None:
            continue
        renamed = phi.rename({x: hat})
        candidate = canonicalize(CoreFormula((*renamed.hx, hat), renamed.ny, renamed.ctx, renamed.pto), pool)
        if is_core(candidate, sid, pool):
            result.add(candidate)
    return result

