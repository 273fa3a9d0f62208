from __future__ import annotations

from collections.abc import Iterable, Iterator

from ..formula.core import CoreFormula, VariablePool, canonicalize, is_core, roots_of
from ..formula.heaps import SID
from ..formula.terms import FreshNames, Term, sort_terms
from .consequence import consequence_closure

Frontier = frozenset[Term]


def _rename_apart(phi1: CoreFormula, phi2: CoreFormula) -> CoreFormula:
    taken = {t.name for t in phi1.terms() | phi2.terms() | phi1.bound | phi2.bound}
    fresh = FreshNames(prefix="_r", taken=taken)
    return phi2.rename({v: fresh() for v in sort_terms(phi2.bound)})


def _matchings(phi1: CoreFormula, phi2: CoreFormula) -> Iterator[dict[Term, Term]]:
    """partial injective identifications of the binders of phi2 with those of phi1, never two ∃h binders"""
    left = sort_terms(phi1.bound)
    right = sort_terms(phi2.bound)

    def extend(i: int, chosen: dict[Term, Term]) -> Iterator[dict[Term, Term]]:
        if i == len(right):
            yield dict(chosen)
            return
        yield from extend(i + 1, chosen)
        r = right[i]
        for t in left:
            if t in chosen.values() or (r in phi2.hx and t in phi1.hx):
                continue
            chosen[r] = t
            yield from extend(i + 1, chosen)
            del chosen[r]

    yield from extend(0, {})


class Composition:
    """the lifted ⇛_D relation with a memo on formula pairs"""

    def __init__(self, sid: SID, pool: VariablePool) -> None:
        self.sid = sid
        self.pool = pool
        self._memo: dict[tuple[CoreFormula, CoreFormula, Frontier], frozenset[CoreFormula]] = {}

    def derive(self, phi1: CoreFormula, phi2: CoreFormula, frontier: Frontier) -> frozenset[CoreFormula]:
        key = (phi1, phi2, frontier)
        if key not in self._memo:
            self._memo[key] = frozenset(self._derive(phi1, phi2, frontier))
        return self._memo[key]

    def _derive(self, phi1: CoreFormula, phi2: CoreFormula, frontier: Frontier) -> Iterator[CoreFormula]:
        phi2 = _rename_apart(phi1, phi2)
        for matching in _matchings(phi1, phi2):
            merged = phi2.rename(matching)
            hx = set(phi1.hx) | set(merged.hx)
            ny = (set(phi1.ny) | set(merged.ny)) - hx
            body = CoreFormula(ctx=(*phi1.ctx, *merged.ctx), pto=(*phi1.pto, *merged.pto))
            for psi in consequence_closure([body]):
                lroots, _ = roots_of(psi, self.sid)
                if lroots & frontier:
                    continue
                terms = psi.terms()
                x = hx & terms
                y = (ny & terms) - x
                if len(x) + len(y) > len(self.pool.v2):
                    continue
                rebound = CoreFormula(tuple(sort_terms(x)), tuple(sort_terms(y)), psi.ctx, psi.pto)
                candidate = canonicalize(rebound, self.pool)
                if is_core(candidate, self.sid, self.pool):
                    yield candidate

    def compose(
        self, left: Iterable[CoreFormula], right: Iterable[CoreFormula], frontier: Frontier
    ) -> set[CoreFormula]:
        right = list(right)
        return {psi for phi1 in left for phi2 in right for psi in self.derive(phi1, phi2, frontier)}


def compose(
    left: Iterable[CoreFormula], right: Iterable[CoreFormula], frontier: Iterable[Term], sid: SID, pool: VariablePool
) -> set[CoreFormula]:
    """F₁ ⊛_D F₂: every ψ derived from a pair of F₁ × F₂ whose guard roots avoid the frontier D"""
    return Composition(sid, pool).compose(left, right, frozenset(frontier))
