import pytest

from src.analysis import infer_roots_and_check
from src.formula import Context, CoreFormula, Pred, VariablePool, const, var
from src.formula.atoms import Diseq, PointsTo
from src.formula.heaps import SID, SymbolicHeap
from src.pipeline import solve
from src.profile import (
    NodeKind,
    ProfileEngine,
    ProfileRelation,
    VerdictKind,
    add_vars,
    compose,
    consequence_closure,
    coretrans,
    decide,
    pool_for,
    prepare,
    pto_profile,
    rem_var,
)
from src.sidfile import parse_problem
from tests.conftest import load_sample

u, v, x, y, z = var("u"), var("v"), var("x"), var("y"), var("z")
a, b, c = const("a"), const("b"), const("c")


def _sid(text: str) -> SID:
    sid = parse_problem(text).sid
    return sid.with_roots(infer_roots_and_check(sid).roots)


CHAIN = "(fields 1) (pred (p x) (exists (y z) (star (pto x (y)) (q y z)))) (pred (q x y) (pto x (y)))"
UNARY = "(fields 1) (pred (p x) (exists (z) (star (pto x (z)) (q z)))) (pred (q x) (pto x (x)))"
PAIR = "(fields 1) (pred (p x y) (pto x (y)))"
LISTS = "(fields 1) (pred (ls x y) (pto x (y)) (exists (z) (star (pto x (z)) (ls z y))))"


def _wand(guards: list[Pred], target: Pred) -> Context:
    return Context.make(guards, target)


def test_points_to_profile() -> None:
    pool = VariablePool((u, v), (z,))
    profile = pto_profile(PointsTo(u, (v,)), _sid(CHAIN), pool, ())
    expected = {
        CoreFormula(pto=(PointsTo(u, (v,)),)),
        CoreFormula(ctx=(_wand([], Pred("q", (u, v))),)),
        CoreFormula(ny=(z,), ctx=(_wand([Pred("q", (v, z))], Pred("p", (u,))),)),
    }
    assert profile == expected, f"unexpected profile {[str(phi) for phi in profile]}"


def test_points_to_profile_without_matching_rules() -> None:
    pool = VariablePool((u, v), (z,))
    sid = _sid("(fields 2) (pred (p x) (pto x (x x)))")
    assert pto_profile(PointsTo(u, (v, v)), sid, pool, ()) == {CoreFormula(pto=(PointsTo(u, (v, v)),))}


def test_consequence_closes_a_guard() -> None:
    phi = CoreFormula(ctx=(_wand([Pred("q", (y,))], Pred("p", (x,))), _wand([], Pred("q", (y,)))))
    assert CoreFormula(ctx=(_wand([], Pred("p", (x,))),)) in consequence_closure([phi])


def test_consequence_chains_guards() -> None:
    phi = CoreFormula(ctx=(_wand([Pred("r", (z,))], Pred("q", (y,))), _wand([Pred("q", (y,))], Pred("p", (x,)))))
    assert CoreFormula(ctx=(_wand([Pred("r", (z,))], Pred("p", (x,))),)) in consequence_closure([phi])


def test_consequence_without_redex_is_a_fixpoint() -> None:
    phi = CoreFormula(ctx=(_wand([], Pred("p", (x,))),))
    assert consequence_closure([phi]) == {phi}


def test_compose_disjoint_cells() -> None:
    pool = VariablePool((), (z,))
    left, right = CoreFormula(pto=(PointsTo(a, (b,)),)), CoreFormula(pto=(PointsTo(b, (c,)),))
    result = compose([left], [right], (), _sid(PAIR), pool)
    assert CoreFormula(pto=(PointsTo(a, (b,)), PointsTo(b, (c,)))) in result


def test_compose_drops_guards_on_the_frontier() -> None:
    pool = VariablePool((x, y), (z,))
    sid = _sid(UNARY)
    left = CoreFormula(ctx=(_wand([Pred("q", (y,))], Pred("p", (x,))),))
    right = CoreFormula(pto=(PointsTo(a, (a,)),))
    assert compose([left], [right], [y], sid, pool) == set()
    assert compose([left], [right], [], sid, pool) != set()


def test_rem_var_hides_a_location() -> None:
    pool = VariablePool((u, v), (z,))
    result = rem_var({CoreFormula(pto=(PointsTo(u, (v,)),))}, v, _sid(PAIR), pool)
    assert result == {CoreFormula(hx=(z,), pto=(PointsTo(u, (z,)),))}


def test_rem_var_keeps_formulae_without_the_variable() -> None:
    pool = VariablePool((u, v, x), (z,))
    formulas = {CoreFormula(pto=(PointsTo(u, (v,)),))}
    assert rem_var(formulas, x, _sid(PAIR), pool) == formulas


def test_add_vars_instantiates_a_fresh_binder() -> None:
    pool = VariablePool((u, y), (z,))
    phi = CoreFormula(ny=(z,), ctx=(_wand([Pred("q", (z,))], Pred("p", (u,))),))
    result = add_vars({phi}, {y}, _sid(UNARY), pool)
    assert CoreFormula(ctx=(_wand([Pred("q", (y,))], Pred("p", (u,))),)) in result
    assert phi in result


def test_coretrans_of_an_existential() -> None:
    pool = VariablePool((y,), (z,))
    sid = _sid(PAIR)
    phi = SymbolicHeap((x,), (Pred("p", (x, y)), Diseq(x, y)))
    assert coretrans(phi, sid, pool, [c]) == {
        CoreFormula(hx=(z,), ctx=(_wand([], Pred("p", (z, y))),)),
        CoreFormula(ctx=(_wand([], Pred("p", (c, y))),)),
    }


def test_coretrans_of_pure_atoms() -> None:
    from src.formula.atoms import Eq

    pool = VariablePool((x, y), (z,))
    sid = _sid(PAIR)
    assert coretrans(SymbolicHeap((), (Eq(x, x),)), sid, pool, ()) == {CoreFormula()}
    assert coretrans(SymbolicHeap((), (Eq(x, y),)), sid, pool, ()) == set()


def test_identity_entailment_is_valid() -> None:
    problem = parse_problem("(fields 1) (const a b) (entail (pto a (b)) ((pto a (b))))")
    assert [verdict.kind for verdict in solve(problem)] == [VerdictKind.VALID]


def test_distinct_constants_are_distinct_locations() -> None:
    problem = parse_problem("(fields 1) (const a b) (entail (pto a (b)) ((pto b (a))))")
    verdict = solve(problem)[0]
    assert verdict.kind is VerdictKind.INVALID
    assert verdict.witness is not None, "an invalid verdict should carry its abstraction"


def test_empty_heaps() -> None:
    kinds = [verdict.kind for verdict in decide(load_sample("empty"))]
    assert kinds == [VerdictKind.VALID, VerdictKind.INVALID]


@pytest.mark.slow
def test_list_segments_compose() -> None:
    kinds = [verdict.kind for verdict in solve(load_sample("ls_c"))]
    assert kinds == [VerdictKind.VALID, VerdictKind.VALID]


def test_acyclic_list_segments() -> None:
    kinds = [verdict.kind for verdict in solve(load_sample("ex1"))]
    assert kinds == [VerdictKind.INVALID, VerdictKind.VALID], "c may sit inside ls(a, b) unless sls skips it"


def test_relation_keeps_arrival_order() -> None:
    relation = ProfileRelation()
    phi = CoreFormula(pto=(PointsTo(a, (b,)),))
    first, second = frozenset({phi}), frozenset({CoreFormula()})
    assert relation.add(phi, [second, first, second]), "new sets should be reported"
    assert relation.arrivals(phi) == [second, first]
    assert not relation.add(phi, [first]), "known sets are not new"
    assert relation.set_count == 2


def test_engine_combines_each_child_set_once() -> None:
    problem = prepare(parse_problem(f"{LISTS} (const a b) (entail (ls a b) ((ls a b)))"))
    engine = ProfileEngine(problem, pool_for(problem))
    seed = CoreFormula(ctx=(_wand([], Pred("ls", (a, b))),))
    relation = engine.run([seed])
    assert relation.sets_of(seed), "the predicate atom should have a profile"
    for phi, node in engine._nodes.items():
        assert not engine._evaluate(node) or node.kind in (NodeKind.EMP, NodeKind.POINTS_TO), f"{phi} re-derived sets"
    assert engine._removed, "existential nodes should go through the removal memo"
