from __future__ import annotations

from collections.abc import Iterable

from ..formula.atoms import Atom, Context, Diseq, Eq, PointsTo, Pred
from ..formula.core import CoreFormula
from ..formula.heaps import Problem, Rule, SymbolicHeap
from ..formula.terms import FreshNames, Term


def render_atom(atom: Atom) -> str:
    match atom:
        case PointsTo(src, dests):
            return f"(pto {src} ({' '.join(map(str, dests))}))"
        case Pred(name, args):
            return f"({' '.join([name, *map(str, args)])})"
        case Eq(lhs, rhs):
            return f"(eq {lhs} {rhs})"
        case Diseq(lhs, rhs):
            return f"(distinct {lhs} {rhs})"
    return "emp"


def render_star(atoms: Iterable[Atom]) -> str:
    parts = [render_atom(a) for a in atoms]
    if not parts:
        return "emp"
    if len(parts) == 1:
        return parts[0]
    return f"(star {' '.join(parts)})"


def render_heap(heap: SymbolicHeap, force_exists: bool = False) -> str:
    if heap.exists or force_exists:
        return f"(exists ({' '.join(map(str, heap.exists))}) {render_star(heap.atoms)})"
    return render_star(heap.atoms)


def _aligned(rule: Rule, params: tuple[Term, ...]) -> SymbolicHeap:
    if rule.params == params:
        return rule.body
    taken = {t.name for t in params} | {t.name for t in rule.body.terms()} | {t.name for t in rule.params}
    fresh = FreshNames(prefix="_r", taken=taken)
    body = rule.body.rename_bound({z: fresh() for z in rule.body.exists if z in params})
    return body.substitute(dict(zip(rule.params, params)))


def render_problem(problem: Problem) -> str:
    """render in the .sid grammar, parse_problem reads it back to an equal problem"""
    lines = [f"(fields {problem.fields})"]
    if problem.constants:
        lines.append(f"(const {' '.join(c.name for c in problem.sorted_constants)})")
    for name, arity in problem.sid.arities.items():
        rules = problem.sid.rules_of(name)
        params = rules[0].params if rules else tuple(Term(f"x{i}") for i in range(1, arity + 1))
        head = " ".join([name, *map(str, params)])
        bodies = [render_heap(_aligned(rule, params), force_exists=True) for rule in rules]
        lines.append(f"(pred ({head})" + "".join(f"\n  {b}" for b in bodies) + ")")
    for sequent in problem.sequents:
        rhs = " ".join(render_heap(h) for h in sequent.rhs)
        lines.append(f"(entail {render_heap(sequent.lhs)} ({rhs}))")
    return "\n".join(lines) + "\n"


def render_context(atom: Context) -> str:
    guards = render_star(atom.guards)
    return f"(wand {guards} {render_atom(atom.target)})"


def render_core(phi: CoreFormula) -> str:
    """stable s-expression form of a core formula, used by profile dumps"""
    parts = [render_atom(p) for p in phi.pto] + [render_context(c) for c in phi.ctx]
    body = "emp" if not parts else parts[0] if len(parts) == 1 else f"(star {' '.join(parts)})"
    if phi.ny:
        body = f"(fresh ({' '.join(map(str, phi.ny))}) {body})"
    if phi.hx:
        body = f"(inside ({' '.join(map(str, phi.hx))}) {body})"
    return body
