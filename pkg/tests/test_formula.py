import pytest
from loguru import logger

from src.config import CONFIG
from src.formula import CoreFormula, FreshNames, Pred, VariablePool, canonicalize, const, problem_metrics, var
from src.formula.atoms import Context, Diseq, PointsTo
from src.formula.heaps import SID, Rule, SymbolicHeap
from src.formula.terms import sort_terms
from tests.conftest import load_sample

x, y, z = var("x"), var("y"), var("z")
a, b = const("a"), const("b")


def test_constants_sort_first() -> None:
    assert sort_terms([y, b, x, a]) == [a, b, x, y], "constants should precede variables"


def test_fresh_names_avoid_taken() -> None:
    fresh = FreshNames(prefix="v", taken={"v0", "v2"})
    names = [t.name for t in fresh.take(3)]
    assert not {"v0", "v2"} & set(names), f"fresh names {names} clash with taken ones"
    assert len(set(names)) == 3


def test_symbolic_heap_drops_emp() -> None:
    from src.formula.atoms import Emp

    heap = SymbolicHeap((), (Emp(), PointsTo(x, (y,))))
    assert heap.atoms == (PointsTo(x, (y,)),)
    assert SymbolicHeap().is_emp


def test_free_vars_exclude_binders() -> None:
    heap = SymbolicHeap((z,), (PointsTo(x, (z,)), Pred("p", (z, y)), Diseq(x, a)))
    assert heap.free_vars() == {x, y}
    assert heap.constants() == {a}


def test_rule_instantiation_renames_binders() -> None:
    rule = Rule("ls", (x, y), SymbolicHeap((z,), (PointsTo(x, (z,)), Pred("ls", (z, y)))))
    body = rule.instantiate((a, b), FreshNames(prefix="_t"))
    assert body.exists and body.exists[0] != z
    assert body.points_to[0].src == a
    assert body.preds[0].args[1] == b


def test_reachable_predicates() -> None:
    sid = SID(
        {"p": 1, "q": 1, "r": 1},
        {
            "p": (Rule("p", (x,), SymbolicHeap((z,), (PointsTo(x, (z,)), Pred("q", (z,))))),),
            "q": (Rule("q", (x,), SymbolicHeap((), (PointsTo(x, (x,)),))),),
            "r": (Rule("r", (x,), SymbolicHeap((), (PointsTo(x, (x,)),))),),
        },
    )
    assert sid.reachable_from(["p"]) == {"p", "q"}


def test_width_counts_rule_bodies() -> None:
    problem = load_sample("ex1")
    sls = SymbolicHeap(
        (var("v"),),
        (
            PointsTo(x, (var("v"),)),
            Pred("sls", (var("v"), y, z)),
            Diseq(x, y),
            Diseq(x, z),
        ),
    )
    assert problem_metrics(problem).width >= sls.size + 3, "width should cover the recursive sls rule"


def test_canonical_binders_come_from_the_bound_pool() -> None:
    pool = VariablePool((var("u"), var("v")), (var("z1"), var("z2")))
    phi = CoreFormula(ny=(var("w"),), ctx=(Context.make([Pred("q", (var("v"), var("w")))], Pred("p", (var("u"),))),))
    canonical = canonicalize(phi, pool)
    assert canonical.ny == (var("z1"),), f"unexpected binders in {canonical}"
    assert canonicalize(canonical, pool) == canonical, "canonical form should be a fixpoint"


def test_truncated_canonical_search_is_reported(monkeypatch: pytest.MonkeyPatch) -> None:
    pool = VariablePool((x, y), (var("z1"), var("z2")))
    w1, w2 = var("w1"), var("w2")
    phi = CoreFormula(ny=(w1, w2), pto=(PointsTo(x, (w1,)), PointsTo(x, (w2,))))
    monkeypatch.setattr(CONFIG.solver, "canonical_permutation_cap", 1)
    canonicalize.cache_clear()
    messages: list[str] = []
    sink = logger.add(messages.append, level="WARNING", format="{message}")
    try:
        canonical = canonicalize(phi, pool)
    finally:
        logger.remove(sink)
        canonicalize.cache_clear()
    assert set(canonical.ny) == {var("z1"), var("z2")}, f"unexpected binders in {canonical}"
    assert any("truncated after 1 candidates" in m for m in messages), f"no truncation warning in {messages}"
