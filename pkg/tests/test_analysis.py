from dataclasses import replace

from src.analysis import (
    ViolationKind,
    alloc_terms,
    check_erestricted,
    check_established,
    check_normalized,
    compute_alloc_sets,
    infer_roots_and_check,
)
from src.formula import Pred, const, var
from src.formula.atoms import Diseq, PointsTo
from src.formula.heaps import SID, Problem, Rule, SymbolicHeap
from src.sidfile import parse_problem
from tests.conftest import load_sample

x, y, z = var("x"), var("y"), var("z")


def _rooted(name: str) -> Problem:
    problem = load_sample(name)
    return problem.with_sid(problem.sid.with_roots(infer_roots_and_check(problem.sid).roots))


def test_roots_of_list_segments() -> None:
    analysis = infer_roots_and_check(load_sample("ex1").sid)
    assert analysis.roots == {"ls": 1, "sls": 1}
    assert analysis.progressing and analysis.connected


def test_rule_without_points_to_is_not_progressing() -> None:
    sid = SID({"p": 1}, {"p": (Rule("p", (x,), SymbolicHeap((), (Pred("p", (x,)),))),)})
    analysis = infer_roots_and_check(sid)
    assert not analysis.progressing
    assert any(v.kind is ViolationKind.PROGRESS for v in analysis.violations)


def test_unreachable_root_is_not_connected() -> None:
    body = SymbolicHeap((z,), (PointsTo(x, (x,)), Pred("p", (z,))))
    sid = SID({"p": 1}, {"p": (Rule("p", (x,), body), Rule("p", (x,), SymbolicHeap((), (PointsTo(x, (x,)),))))})
    analysis = infer_roots_and_check(sid)
    assert analysis.progressing
    assert not analysis.connected, "p(z) is rooted at z which the cell of x never points to"


def test_list_segments_with_disequalities_are_not_erestricted() -> None:
    violations = check_erestricted(load_sample("ex1"))
    assert violations, "x≄y relates two parameters"
    assert all(v.kind is ViolationKind.ERESTRICTED for v in violations)


def test_grid_rules_are_erestricted() -> None:
    assert check_erestricted(load_sample("lls")) == []
    assert check_erestricted(load_sample("ls_c")) == []


def test_disequality_with_a_constant_is_erestricted() -> None:
    text = "(fields 1) (const c) (pred (p x) (star (pto x (c)) (distinct x c))) (entail (p a) ((p a)))"
    assert check_erestricted(parse_problem(text)) == []


def test_allocation_sets_of_normalized_rules() -> None:
    tbl = compute_alloc_sets(load_sample("sprime").sid)
    assert tbl.allocpar("p") == {1}
    assert tbl.allocpar("q") == {1, 2}
    assert tbl.allocpar("r") == {1}
    assert all(tbl.alloconst(name) == frozenset() for name in ("p", "q", "r"))
    assert tbl.uniform


def test_allocated_terms_of_a_heap() -> None:
    tbl = compute_alloc_sets(load_sample("sprime").sid)
    xs = [var(f"x{i}") for i in range(1, 6)]
    heap = SymbolicHeap((), (Pred("p", (xs[0], xs[1])), Pred("q", (xs[2], xs[3])), Pred("r", (xs[4],))))
    assert alloc_terms(heap, tbl) == {xs[0], xs[2], xs[3], xs[4]}


def test_non_uniform_allocation_is_reported() -> None:
    rules = (
        Rule("q", (x, y), SymbolicHeap((z,), (PointsTo(x, (y,)), Pred("q", (y, z))))),
        Rule("q", (x, y), SymbolicHeap((), (PointsTo(x, (y,)),))),
    )
    tbl = compute_alloc_sets(SID({"q": 2}, {"q": rules}))
    assert not tbl.uniform
    assert any(nu.predicate == "q" and nu.position == 2 for nu in tbl.non_uniform)


def test_list_segments_are_strongly_established() -> None:
    report = check_established(_rooted("ex1"))
    assert report.established and report.strongly


def test_grids_are_not_established() -> None:
    report = check_established(_rooted("lls"))
    assert not report.established
    assert any(str(w.variable) == "v" for w in report.failures), "v is never allocated"


def test_normalized_rules_pass() -> None:
    problem = load_sample("sprime")
    problem = replace(problem, constants=frozenset({const("nil")}), sequents=())
    assert check_normalized(problem) == []


def test_disequality_between_parameters_breaks_the_normal_form() -> None:
    body = SymbolicHeap((z,), (PointsTo(x, (z,)), Pred("p", (z, y)), Diseq(x, y)))
    base = SymbolicHeap((), (PointsTo(x, (y,)),))
    sid = SID({"p": 2}, {"p": (Rule("p", (x, y), body), Rule("p", (x, y), base))})
    problem = parse_problem("(fields 1)").with_sid(sid)
    kinds = {v.kind for v in check_normalized(problem)}
    assert ViolationKind.NORMALIZED_1A in kinds
