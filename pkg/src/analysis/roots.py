from __future__ import annotations

from ..formula.heaps import SID
from ..formula.terms import Term
from .models import Locus, RootAnalysis, Violation, ViolationKind


def _rule_root(rule_params: tuple[Term, ...], src: Term) -> int | Term | None:
    if src.const:
        return src
    if src in rule_params:
        return rule_params.index(src) + 1
    return None


def infer_roots_and_check(sid: SID) -> RootAnalysis:
    """root of each predicate from its points-to sources, plus progress and connectivity violations"""
    roots: dict[str, int | Term] = {}
    violations: list[Violation] = []
    for name in sorted(sid.arities):
        first: tuple[int, int | Term] | None = None
        for i, rule in enumerate(sid.rules_of(name)):
            locus = Locus(predicate=name, rule=i)
            ptos = rule.body.points_to
            if len(ptos) != 1:
                detail = "no points-to atom" if not ptos else f"{len(ptos)} points-to atoms"
                violations.append(Violation(ViolationKind.PROGRESS, locus, str(rule.body), detail))
                continue
            root = _rule_root(rule.params, ptos[0].src)
            if root is None:
                violations.append(
                    Violation(ViolationKind.PROGRESS, locus, str(ptos[0]), "root is neither a parameter nor a constant")
                )
            elif first is None:
                first = (i, root)
            elif first[1] != root:
                violations.append(
                    Violation(ViolationKind.PROGRESS, locus, str(ptos[0]), f"root disagrees with rule {first[0] + 1}")
                )
        if first is not None:
            roots[name] = first[1]

    rooted = sid.with_roots(roots)
    for name in sorted(sid.arities):
        for i, rule in enumerate(sid.rules_of(name)):
            ptos = rule.body.points_to
            if len(ptos) != 1:
                continue
            for atom in rule.body.preds:
                if atom.name not in roots:
                    continue
                root = rooted.root_of(atom)
                if not root.const and root not in ptos[0].dests:
                    violations.append(
                        Violation(
                            ViolationKind.CONNECTIVITY,
                            Locus(predicate=name, rule=i),
                            str(atom),
                            f"root {root} is not a destination of {ptos[0]}",
                        )
                    )
    return RootAnalysis(roots, tuple(violations))
