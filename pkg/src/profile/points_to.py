from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence

from ..formula.atoms import Context, Eq, PointsTo, Pred
from ..formula.core import CoreFormula, VariablePool, canonicalize, is_core
from ..formula.heaps import SID, Rule
from ..formula.terms import FreshNames, Term, sort_terms, subst


def _match(rule: Rule, atom: PointsTo) -> dict[Term, Term] | None:
    """the instantiation of rule variables making its points-to atom equal to atom"""
    cells = rule.body.points_to
    if len(cells) != 1 or len(cells[0].dests) != len(atom.dests):
        return None
    theta: dict[Term, Term] = {}
    for mine, theirs in zip(cells[0].terms(), atom.terms()):
        if mine.const:
            if mine != theirs:
                return None
        elif theta.setdefault(mine, theirs) != theirs:
            return None
    return theta


def _assignments(n: int, base: Sequence[Term], fresh: FreshNames) -> Iterator[tuple[Term, ...]]:
    """n values from base or from placeholders, each new placeholder introduced in order"""
    placeholders: list[Term] = []

    def extend(prefix: tuple[Term, ...]) -> Iterator[tuple[Term, ...]]:
        if len(prefix) == n:
            yield prefix
            return
        used = len({t for t in prefix if t in placeholders})
        for t in [*base, *placeholders[:used]]:
            yield from extend((*prefix, t))
        if used == len(placeholders):
            placeholders.append(fresh())
        yield from extend((*prefix, placeholders[used]))

    yield from extend(())


def _fresh_ok(rule: Rule, theta: dict[Term, Term], kept: set[Term]) -> bool:
    """matched existentials not identified with a kept argument need distinct fresh names"""
    values = [theta[z] for z in rule.body.exists if z in theta and theta[z] not in kept]
    return all(not t.const for t in values) and len(values) == len(set(values))


def _contexts(atom: PointsTo, rule: Rule, constants: Sequence[Term], fresh: FreshNames) -> Iterator[CoreFormula]:
    theta = _match(rule, atom)
    if theta is None:
        return
    cell = set(atom.terms())
    params = [x for x in rule.params if x not in theta]
    exists = [z for z in rule.body.exists if z not in theta]
    for values in _assignments(len(params), sort_terms([*cell, *constants]), fresh):
        # open existentials denote locations of their own
        sigma = {**theta, **dict(zip(params, values)), **{z: fresh() for z in exists}}
        pure = [*rule.body.equalities, *rule.body.disequalities]
        if any((subst(a.lhs, sigma) == subst(a.rhs, sigma)) != isinstance(a, Eq) for a in pure):
            continue
        target = Pred(rule.head, tuple(subst(x, sigma) for x in rule.params))
        guards = [q.substitute(sigma) for q in rule.body.preds]
        kept = {*target.args, *(t for g in guards for t in g.args)}
        if not _fresh_ok(rule, theta, kept):
            continue
        context = Context.make(guards, target)
        ny = [t for t in sort_terms(kept) if t not in cell and not t.const]
        yield CoreFormula(ny=tuple(ny), ctx=(context,))


def pto_profile(atom: PointsTo, sid: SID, pool: VariablePool, constants: Iterable[Term]) -> frozenset[CoreFormula]:
    """
    the profile of the one-cell heaps of atom: the cell itself and every context whose
    one-step unfolding is the cell with the guards cut out right below it. Existentials
    the cell leaves open become ∀¬h binders, never one of the cell's terms
    """
    constants = sort_terms(constants)
    fresh = FreshNames(prefix="_z", taken={t.name for t in (*atom.terms(), *constants)})
    profile = {CoreFormula(pto=(atom,))}
    for rule in sid.all_rules():
        for phi in _contexts(atom, rule, constants, fresh):
            if len(phi.ny) > len(pool.v2):
                continue
            candidate = canonicalize(phi, pool)
            if is_core(candidate, sid, pool):
                profile.add(candidate)
    return frozenset(profile)
