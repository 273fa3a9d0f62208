from __future__ import annotations

import random
import sys
from pathlib import Path
from typing import Any

import click
import yaml
from loguru import logger
from pydantic import BaseModel, RootModel

from ._logging import console_handlers
from .analysis import compute_alloc_sets, infer_roots_and_check
from .config import CONFIG
from .contexts import ContextHead, context_rules_for
from .contexts.rules import Shape
from .formula.heaps import Problem
from .fuzz import Shape, differential, random_problem
from .oracle import Bounds
from .pipeline import Classification, Mode, classify, reduce, solve
from .profile import Verdict, VerdictKind, compute_profiles
from .sidfile import parse_problem, render_problem
from .sl_entail.exceptions import (
    ConditionError,
    CoreSizeBoundError,
    OracleBudgetError,
    PoolExhaustedError,
    ProblemFormatError,
    ResourceExceededError,
    TransformBlowupError,
)

EXIT_VALID, EXIT_INVALID, EXIT_ERROR, EXIT_RESOURCES, EXIT_INTERNAL = 0, 1, 2, 3, 4
RESOURCE_ERRORS = (
    ResourceExceededError,
    TransformBlowupError,
    OracleBudgetError,
    PoolExhaustedError,
    CoreSizeBoundError,
)

Document = RootModel[dict[str, Any]]


class SequentReport(BaseModel):
    index: int
    sequent: str
    verdict: str
    vacuous: bool = False
    detail: str = ""
    countermodel: dict[str, Any] | None = None


class CheckReport(BaseModel):
    file: str
    mode: str
    classification: dict[str, bool]
    sequents: list[SequentReport]


def _load(path: str) -> Problem:
    try:
        return parse_problem(Path(path).read_text())
    except ProblemFormatError as e:
        click.echo(f"{path}: {e}", err=True)
        sys.exit(EXIT_ERROR)


def _exit_code(verdicts: list[Verdict]) -> int:
    kinds = {v.kind for v in verdicts}
    if VerdictKind.INVALID in kinds:
        return EXIT_INVALID
    if VerdictKind.RESOURCE_EXCEEDED in kinds:
        return EXIT_RESOURCES
    return EXIT_VALID


def _report(problem: Problem, verdicts: list[Verdict], path: str, mode: Mode, c: Classification) -> CheckReport:
    entries: list[SequentReport] = []
    for i, (sequent, verdict) in enumerate(zip(problem.sequents, verdicts)):
        cm = verdict.countermodel.as_dict() if verdict.countermodel is not None else None
        detail = str(verdict).partition(": ")[2]
        entries.append(
            SequentReport(
                index=i + 1,
                sequent=str(sequent),
                verdict=verdict.kind.value,
                vacuous=verdict.vacuous,
                detail=detail,
                countermodel=cm,
            )
        )
    return CheckReport(file=path, mode=mode.value, classification=c.as_dict(), sequents=entries)


def _shape(head: str) -> Shape:
    target, _, guards = head.partition(":")
    return target.strip(), tuple(g.strip() for g in guards.split(",") if g.strip())


def _print_verdicts(verdicts: list[Verdict]) -> None:
    for i, verdict in enumerate(verdicts):
        click.echo(f"sequent {i + 1}: {verdict}")
        if verdict.countermodel is not None:
            click.echo(yaml.dump({f"countermodel {i + 1}": verdict.countermodel.as_dict()}, allow_unicode=True))


@click.group()
@click.option("--log-level", default=CONFIG.logging.level, show_default=True, help="console log level")
def cli(log_level: str) -> None:
    """decide entailments between symbolic heaps over inductive definitions"""
    logger.configure(handlers=console_handlers(log_level.upper()))


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice([m.value for m in Mode]), default=Mode.AUTO.value, show_default=True)
@click.option("--oracle-bound", type=int, default=CONFIG.oracle.heap_bound, show_default=True)
@click.option("--oracle-depth", type=int, default=CONFIG.oracle.unfold_depth, show_default=True)
@click.option("--budget-formulas", type=int, default=CONFIG.solver.max_core_formulas, show_default=True)
@click.option("--emit-normalized", type=click.Path(dir_okay=False), default=None)
@click.option("--emit-profile", type=click.Path(dir_okay=False), default=None)
@click.option("--json", "as_json", is_flag=True, help="print a machine-readable report")
def check(
    path: str,
    mode: str,
    oracle_bound: int,
    oracle_depth: int,
    budget_formulas: int,
    emit_normalized: str | None,
    emit_profile: str | None,
    as_json: bool,
) -> None:
    """report one verdict per sequent"""
    problem = _load(path)
    chosen = Mode(mode)
    classification = classify(problem)
    if not classification.decidable:
        click.echo(f"{path}: {classification.explain()}", err=True)
        for violation in classification.violations:
            click.echo(f"  {violation}", err=True)
        sys.exit(EXIT_ERROR)
    try:
        derived = reduce(problem, classification)
        if emit_normalized:
            Path(emit_normalized).write_text("\n".join(render_problem(p) for p in derived))
        if emit_profile:
            dumps = [compute_profiles(p, max_formulas=budget_formulas).dump() for p in derived]
            Path(emit_profile).write_text("\n".join(dumps))
        bounds = Bounds.make(oracle_bound, oracle_depth, fields=problem.fields)
        verdicts = solve(problem, chosen, bounds, budget_formulas, derived=derived)
    except ConditionError as e:
        click.echo(f"{path}: {e}", err=True)
        sys.exit(EXIT_ERROR)
    except RESOURCE_ERRORS as e:
        click.echo(f"{path}: resources exceeded: {e}", err=True)
        sys.exit(EXIT_RESOURCES)
    except Exception as e:
        logger.exception(f"Internal error while checking {path}")
        click.echo(f"{path}: internal error: {e}", err=True)
        sys.exit(EXIT_INTERNAL)
    if as_json:
        click.echo(_report(problem, verdicts, path, chosen, classification).model_dump_json(indent=2))
    else:
        _print_verdicts(verdicts)
    sys.exit(_exit_code(verdicts))


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
def normalize(path: str, output: str | None) -> None:
    """print the normalized e-restricted problems the solver works on"""
    problem = _load(path)
    try:
        derived = reduce(problem)
    except ConditionError as e:
        click.echo(f"{path}: {e}", err=True)
        sys.exit(EXIT_ERROR)
    except TransformBlowupError as e:
        click.echo(f"{path}: resources exceeded: {e}", err=True)
        sys.exit(EXIT_RESOURCES)
    text = "\n".join(render_problem(p) for p in derived)
    if output:
        Path(output).write_text(text)
    else:
        click.echo(text)


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@click.option(
    "--emit-contexts",
    "heads",
    multiple=True,
    metavar="HEAD",
    help="also list the context rules of a head, written TARGET or TARGET:GUARD,GUARD",
)
def analyze(path: str, as_json: bool, heads: tuple[str, ...]) -> None:
    """classify a problem and show roots and allocation sets"""
    problem = _load(path)
    classification = classify(problem)
    roots = infer_roots_and_check(problem.sid).roots
    tbl = compute_alloc_sets(problem.sid)
    report: dict[str, Any] = {
        "classification": classification.as_dict(),
        "roots": {name: str(root) for name, root in sorted(roots.items())},
        "allocpar": {name: sorted(tbl.allocpar(name)) for name in sorted(problem.sid.arities) if name in tbl},
        "alloconst": {
            name: sorted(map(str, tbl.alloconst(name))) for name in sorted(problem.sid.arities) if name in tbl
        },
        "violations": [str(v) for v in classification.violations],
    }
    if heads and classification.progressing:
        sid = problem.sid.with_roots(roots)
        try:
            report["contexts"] = {
                head: [str(rule) for rule in context_rules_for(ContextHead.for_shape(_shape(head), sid), sid)]
                for head in heads
            }
        except ConditionError as e:
            click.echo(f"{path}: {e}", err=True)
            sys.exit(EXIT_ERROR)
    if as_json:
        click.echo(Document(report).model_dump_json(indent=2))
    else:
        click.echo(yaml.dump(report, allow_unicode=True, sort_keys=False))
    sys.exit(EXIT_VALID if classification.decidable else EXIT_ERROR)


@cli.command()
@click.option("--count", type=int, default=CONFIG.fuzz.problems, show_default=True)
@click.option("--seed", type=int, default=CONFIG.fuzz.seed, show_default=True)
@click.option("--oracle-bound", type=int, default=CONFIG.oracle.heap_bound, show_default=True)
@click.option("--oracle-depth", type=int, default=CONFIG.oracle.unfold_depth, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def fuzz(count: int, seed: int, oracle_bound: int, oracle_depth: int, as_json: bool) -> None:
    """generate random problems and compare the decision procedure with the bounded oracle"""
    rng = random.Random(seed)
    problems = [random_problem(rng, Shape()) for _ in range(count)]
    report = differential(problems, Bounds.make(oracle_bound, oracle_depth, fields=2))
    if as_json:
        click.echo(Document(report.as_dict()).model_dump_json(indent=2))
    else:
        click.echo(yaml.dump(report.as_dict(), allow_unicode=True, sort_keys=False))
    sys.exit(EXIT_VALID if report.ok else EXIT_INVALID)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
