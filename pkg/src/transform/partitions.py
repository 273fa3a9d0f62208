from __future__ import annotations

from loguru import logger

from ..formula.atoms import Diseq, Eq
from ..formula.heaps import SID, Problem, Rule, Sequent, SymbolicHeap
from ..formula.terms import Term
from ..sl_entail.utils import set_partitions


def simplify_constant_atoms(heap: SymbolicHeap) -> SymbolicHeap | None:
    """drop satisfied c ⋈ d atoms between constants, None when one of them is contradictory"""
    atoms = []
    for atom in heap.atoms:
        if isinstance(atom, (Eq, Diseq)) and atom.lhs.const and atom.rhs.const:
            if isinstance(atom, Eq) != (atom.lhs == atom.rhs):
                return None
            continue
        atoms.append(atom)
    return heap.with_atoms(atoms)


def _collapse(heap: SymbolicHeap, representative: dict[Term, Term]) -> SymbolicHeap | None:
    return simplify_constant_atoms(heap.substitute(representative))


def _collapse_problem(problem: Problem, blocks: list[list[Term]]) -> Problem:
    representative = {c: block[0] for block in blocks for c in block}
    rules: dict[str, tuple[Rule, ...]] = {}
    for name, named_rules in problem.sid.rules.items():
        kept = []
        for rule in named_rules:
            body = _collapse(rule.body, representative)
            if body is not None:
                kept.append(rule.with_body(body))
        rules[name] = tuple(kept)
    roots = {p: representative.get(r, r) if isinstance(r, Term) else r for p, r in problem.sid.roots.items()}
    sequents: list[Sequent] = []
    origins: list[int] = []
    for i, sequent in enumerate(problem.sequents):
        lhs = _collapse(sequent.lhs, representative)
        if lhs is None:
            logger.debug(f"Sequent {problem.origin_of(i) + 1} has an unsatisfiable lhs under {blocks}")
            continue
        rhs = [h for h in (_collapse(r, representative) for r in sequent.rhs) if h is not None]
        sequents.append(Sequent(lhs, tuple(rhs)))
        origins.append(problem.origin_of(i))
    return Problem(
        constants=frozenset(block[0] for block in blocks),
        fields=problem.fields,
        sid=SID(dict(problem.sid.arities), rules, roots),
        sequents=tuple(sequents),
        origins=tuple(origins),
    )


def split_constant_partitions(problem: Problem) -> list[Problem]:
    """one problem per partition of the constants, each block collapsed to its least constant"""
    problems = [_collapse_problem(problem, blocks) for blocks in set_partitions(problem.sorted_constants)]
    logger.info(f"Split {len(problem.constants)} constants into {len(problems)} partition problems")
    return problems
