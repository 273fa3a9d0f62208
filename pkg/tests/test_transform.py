import pytest

from src.analysis import Violation, check_erestricted, check_normalized, infer_roots_and_check
from src.analysis.alloc import compute_alloc_sets
from src.formula import Pred, const
from src.formula.heaps import SID, Problem, Rule, SymbolicHeap
from src.sidfile import parse_problem
from src.sl_entail.exceptions import ConditionError, NotEstablishedError
from src.transform import established_to_erestricted, normalize, split_constant_partitions
from tests.conftest import load_sample


def _rule_violations(problem: Problem) -> list[Violation]:
    return [v for v in check_normalized(problem) if v.locus.predicate is not None]


def test_one_problem_per_constant_partition() -> None:
    problem = load_sample("ex1")
    parts = split_constant_partitions(problem)
    assert len(parts) == 5, "three constants have five partitions"
    assert all(p.all_origins == (0, 1) or len(p.sequents) < 2 for p in parts)
    assert any(p.constants == problem.constants for p in parts), "the discrete partition keeps every constant"


def test_collapsed_partition_uses_one_representative() -> None:
    parts = split_constant_partitions(load_sample("ls_c"))
    smallest = min(parts, key=lambda p: len(p.constants))
    assert smallest.constants == frozenset({const("a")})


def test_normalized_rules_meet_the_normal_form() -> None:
    for part in split_constant_partitions(load_sample("ls_c")):
        result = normalize(part)
        assert _rule_violations(result) == [], f"normalization left violations in {result.sid}"
        assert infer_roots_and_check(result.sid).ok


def test_normalization_is_stable() -> None:
    part = split_constant_partitions(load_sample("ls_c"))[-1]
    once = normalize(part)
    twice = normalize(once)
    assert len(twice.sequents) == len(once.sequents)
    assert _rule_violations(twice) == []


def test_normalization_needs_progressing_rules() -> None:
    problem = load_sample("ls_c")
    params = problem.sid.rules_of("ls")[0].params
    body = SymbolicHeap((), (Pred("ls", params),))
    broken = SID({"ls": 2}, {"ls": (Rule("ls", params, body),)})
    with pytest.raises(ConditionError):
        normalize(problem.with_sid(broken))


def test_established_problem_becomes_erestricted() -> None:
    for part in split_constant_partitions(load_sample("ex1")):
        result = established_to_erestricted(part)
        assert check_erestricted(result) == [], "variable disequalities should be gone"
        assert set(result.all_origins) <= {0, 1}


def test_reduction_refuses_unestablished_problems() -> None:
    with pytest.raises(NotEstablishedError):
        established_to_erestricted(load_sample("lls"))


def test_non_uniform_allocation_is_uniformized() -> None:
    text = "(fields 1) (const a b) (pred (p x y) (pto x (y)) (star (pto x (y)) (q y))) (pred (q x) (pto x (x)))"
    problem = parse_problem(f"{text} (entail (p a b) ((p a b)))")
    assert not compute_alloc_sets(problem.sid).uniform, "p allocates y in one rule only"
    result = normalize(split_constant_partitions(problem)[-1])
    assert compute_alloc_sets(result.sid).uniform, f"allocation stays non-uniform in {result.sid}"
    assert _rule_violations(result) == []
