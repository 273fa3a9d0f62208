import pytest

from src.formula import const, var
from src.formula.atoms import Diseq, PointsTo, Pred
from src.sidfile import parse_problem, render_problem
from src.sl_entail.exceptions import (
    ProblemFormatError,
    SidArityError,
    SidFieldCountError,
    SidShadowingError,
    SidSyntaxError,
    SidUndeclaredError,
)
from tests.conftest import SAMPLES, load_sample


def test_parse_acyclic_lists() -> None:
    problem = load_sample("ex1")
    assert problem.sid.rule_count == 4, "ls and sls have two rules each"
    assert len(problem.sequents) == 2
    assert {const("a"), const("b"), const("c")} <= problem.constants
    assert problem.sid.arities == {"ls": 2, "sls": 3}


def test_render_round_trip() -> None:
    for path in sorted(SAMPLES.glob("*.sid")):
        problem = parse_problem(path.read_text())
        again = parse_problem(render_problem(problem))
        assert again == problem, f"{path.name} changed after a round trip"


def test_free_sequent_variables_become_constants() -> None:
    problem = parse_problem("(fields 1) (entail (pto u (v)) ((pto u (v))))")
    assert {const("u"), const("v")} <= problem.constants
    assert problem.sequents[0].lhs.atoms == (PointsTo(const("u"), (const("v"),)),)


def test_lifted_constants_avoid_rule_parameters() -> None:
    text = (
        "(fields 1) (pred (ls x y) (pto x (y)) (exists (z) (star (pto x (z)) (ls z y))))"
        " (entail (ls x y) ((ls x y)))"
    )
    problem = parse_problem(text)
    assert problem.constants == {const("x_1"), const("y_1")}
    assert problem.sequents[0].lhs.atoms == (Pred("ls", (const("x_1"), const("y_1"))),)
    assert problem.sid.rules["ls"][0].params == (var("x"), var("y"))
    assert parse_problem(render_problem(problem)) == problem, "the renamed constants survive a round trip"


def test_distinct_parses_to_disequality() -> None:
    problem = parse_problem("(fields 1) (const a b) (entail (star (pto a (b)) (distinct a b)) ((pto a (b))))")
    assert Diseq(const("a"), const("b")) in problem.sequents[0].lhs.atoms


def test_fields_inferred_from_points_to() -> None:
    problem = parse_problem("(const a b) (entail (pto a (b a)) ((pto a (b a))))")
    assert problem.fields == 2


@pytest.mark.parametrize(
    "text, error",
    [
        ("(fields 1) (entail (pto a (b)) ((pto a (b)))", SidSyntaxError),
        ("(fields 1) (pred (p x) (pto x (x))) (entail (p a a) ((p a)))", SidArityError),
        ("(fields 2) (entail (pto a (b)) ((pto a (b a))))", SidFieldCountError),
        ("(fields 1) (pred (p x) (exists (x) (pto x (x)))) (entail (p a) ((p a)))", SidShadowingError),
        ("(fields 1) (entail (q a) ((pto a (a))))", SidUndeclaredError),
        ("(fields 1) (pred (p x) (pto x (y))) (entail (p a) ((p a)))", SidUndeclaredError),
    ],
)
def test_malformed_problems(text: str, error: type[ProblemFormatError]) -> None:
    with pytest.raises(error):
        parse_problem(text)


def test_syntax_errors_carry_a_location() -> None:
    with pytest.raises(SidSyntaxError) as info:
        parse_problem("(fields 1)\n(entail (pto a (b)) ((pto a (b)))")
    assert info.value.line is not None, "the error should point into the input"
