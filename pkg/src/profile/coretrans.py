from __future__ import annotations

from collections.abc import Iterable

from ..formula.atoms import Atom, Diseq, Eq, PointsTo, Pred
from ..formula.core import CoreAtom, CoreFormula, VariablePool, canonicalize, emp_context, is_core
from ..formula.heaps import SID, SymbolicHeap
from ..formula.terms import Term, sort_terms


def _translate_atom(atom: Atom) -> CoreAtom | bool:
    """the core atom, True for emp, False for no translation"""
    if isinstance(atom, PointsTo):
        return atom
    if isinstance(atom, Pred):
        return emp_context(atom)
    if isinstance(atom, (Eq, Diseq)):
        return (atom.lhs == atom.rhs) == isinstance(atom, Eq)
    return True


def translate_matrix(atoms: Iterable[Atom]) -> CoreFormula | None:
    """the quantifier-free translation, None when an equational atom fails syntactically"""
    core: list[CoreAtom] = []
    for atom in atoms:
        translated = _translate_atom(atom)
        if isinstance(translated, bool):
            if not translated:
                return None
            continue
        core.append(translated)
    return CoreFormula.of(core)


def coretrans(phi: SymbolicHeap, sid: SID, pool: VariablePool, constants: Iterable[Term]) -> set[CoreFormula]:
    """the core formulae equivalent to phi over injective structures, canonical and within the pool"""
    constants = sort_terms(constants)
    free = sort_terms(phi.free_vars())
    results: set[CoreFormula] = set()
    work: list[tuple[SymbolicHeap, tuple[Term, ...], tuple[Term, ...]]] = [(phi, phi.exists, ())]
    while work:
        heap, pending, kept = work.pop()
        if pending:
            x, rest = pending[0], pending[1:]
            work.append((heap, rest, (*kept, x)))
            occurring = heap.variables()
            for t in [*free, *kept, *constants]:
                if t in occurring or t.const:
                    work.append((heap.instantiate(x, t), rest, kept))
            continue
        body = translate_matrix(heap.atoms)
        if body is None:
            continue
        used = body.terms()
        candidate = CoreFormula(tuple(x for x in kept if x in used), (), body.ctx, body.pto)
        if len(candidate.bound) > len(pool.v2):
            continue
        candidate = canonicalize(candidate, pool)
        if is_core(candidate, sid, pool):
            results.add(candidate)
    return results


def coretrans_all(
    heaps: Iterable[SymbolicHeap], sid: SID, pool: VariablePool, constants: Iterable[Term]
) -> set[CoreFormula]:
    constants = list(constants)
    return {psi for heap in heaps for psi in coretrans(heap, sid, pool, constants)}
