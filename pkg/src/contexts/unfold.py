from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from ..formula.atoms import Context, Eq
from ..formula.core import CoreFormula, sort_atoms
from ..formula.heaps import SID
from ..formula.terms import Substitution, Term, sort_terms, subst
from ..sl_entail.exceptions import PoolExhaustedError
from ..sl_entail.utils import partial_maps
from .rules import ContextHead, ContextRule, context_rules_for


@dataclass(frozen=True, slots=True)
class CoreUnfolding:
    """one step of unfolding a context atom, translated to a quantifier-free core formula"""

    source: Context
    result: CoreFormula
    substitution: tuple[tuple[Term, Term], ...]

    def __str__(self) -> str:
        return f"{self.source} ⇝ {self.result}"


def head_of(atom: Context, sid: SID) -> tuple[ContextHead, dict[Term, Term]]:
    """the canonical head for the shape of atom, with the formals instantiated to its arguments"""
    head = ContextHead.for_shape((atom.target.name, tuple(g.name for g in atom.guards)), sid)
    actuals = (*atom.target.args, *(t for g in atom.guards for t in g.args))
    return head, dict(zip(head.formals, actuals))


def _translate(rule: ContextRule, sigma: Substitution) -> CoreFormula | None:
    for atom in rule.pure:
        lhs, rhs = subst(atom.lhs, sigma), subst(atom.rhs, sigma)
        if (lhs == rhs) != isinstance(atom, Eq):
            return None
    contexts = [c.substitute(sigma) for c in rule.contexts]
    # a guard cut out right where it is defined leaves the empty heap
    contexts = [c for c in contexts if c.guards != (c.target,)]
    return sort_atoms(CoreFormula(ctx=tuple(contexts), pto=tuple(p.substitute(sigma) for p in rule.pto)))


def core_unfoldings(atom: Context, sid: SID, fresh: Sequence[Term] = ()) -> list[CoreUnfolding]:
    """
    every quantifier-free core formula atom unfolds to in one step.
    Existentials are either identified with an argument of atom or named by the next
    unused term of fresh; running out of fresh terms raises PoolExhaustedError
    """
    head, theta = head_of(atom, sid)
    actuals = sort_terms(theta.values())
    available = [t for t in fresh if t not in theta.values()]
    found: dict[CoreFormula, CoreUnfolding] = {}
    for rule in context_rules_for(head, sid):
        for zeta in partial_maps(list(rule.exists), actuals):
            rest = [z for z in rule.exists if z not in zeta]
            if len(rest) > len(available):
                raise PoolExhaustedError(f"{len(rest)} fresh variables needed to unfold {atom}")
            sigma = {**theta, **zeta, **dict(zip(rest, available))}
            result = _translate(rule, sigma)
            if result is not None and result not in found:
                found[result] = CoreUnfolding(atom, result, tuple(sigma.items()))
    return list(found.values())
