import random

import pytest

from src.formula.atoms import Diseq, Eq
from src.formula.heaps import Problem
from src.fuzz import Shape, differential, random_problem
from src.oracle import Bounds
from src.pipeline import classify
from src.sidfile import render_problem
from src.sl_entail.exceptions import ConditionError, ResourceExceededError


def test_generated_problems_are_decidable() -> None:
    rng = random.Random(0)
    for _ in range(20):
        problem = random_problem(rng, Shape())
        c = classify(problem)
        assert c.decidable and c.erestricted, render_problem(problem)


def test_generation_is_reproducible() -> None:
    first = [render_problem(random_problem(random.Random(7))) for _ in range(3)]
    second = [render_problem(random_problem(random.Random(7))) for _ in range(3)]
    assert first == second


def test_generated_sequents_are_closed() -> None:
    rng = random.Random(1)
    for _ in range(10):
        problem = random_problem(rng)
        assert all(not heap.free_vars() for sequent in problem.sequents for heap in sequent.heaps())


@pytest.mark.differential
def test_decision_procedure_matches_the_oracle() -> None:
    rng = random.Random(0)
    problems = [random_problem(rng, Shape(max_predicates=2)) for _ in range(200)]
    report = differential(problems, Bounds.make(3, 4, fields=2))
    assert report.ok, "\n".join([*report.disagreements, *report.errors])
    assert report.problems == 200


def test_right_hand_sides_carry_existentials_and_pure_atoms() -> None:
    rng = random.Random(2)
    rhs = [heap for _ in range(50) for sequent in random_problem(rng).sequents for heap in sequent.rhs]
    assert any(heap.exists for heap in rhs), "no existential right-hand side was generated"
    assert any(isinstance(atom, (Eq, Diseq)) for heap in rhs for atom in heap.atoms), "no pure atom was generated"


def test_failures_are_errors_and_budgets_are_skips(monkeypatch: pytest.MonkeyPatch) -> None:
    problems = [random_problem(random.Random(3))]

    def broken(problem: Problem, *args: object, **kwargs: object) -> None:
        raise ConditionError("not e-restricted")

    monkeypatch.setattr("src.fuzz.generator.solve", broken)
    report = differential(problems, Bounds.make(2, 4))
    assert not report.ok and report.errors, "a failing problem should count as an error"
    assert report.skipped == 0

    def exhausted(problem: Problem, *args: object, **kwargs: object) -> None:
        raise ResourceExceededError("too many sets")

    monkeypatch.setattr("src.fuzz.generator.solve", exhausted)
    report = differential(problems, Bounds.make(2, 4))
    assert report.ok and report.skipped == len(problems[0].sequents)
