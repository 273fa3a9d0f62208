from __future__ import annotations

import enum
from dataclasses import dataclass, field

from ..formula.terms import Term


class ViolationKind(str, enum.Enum):
    """side conditions a problem can violate"""

    PROGRESS = "progress"
    CONNECTIVITY = "connectivity"
    ERESTRICTED = "erestricted"
    ESTABLISHED = "established"
    NORMALIZED_1A = "normalized-1a"
    NORMALIZED_1B = "normalized-1b"
    NORMALIZED_1C = "normalized-1c"
    NORMALIZED_2A = "normalized-2a"
    NORMALIZED_2B = "normalized-2b"
    NORMALIZED_2C = "normalized-2c"
    NORMALIZED_3 = "normalized-3"


@dataclass(frozen=True, slots=True)
class Locus:
    """a rule (predicate, 0-based index) or a sequent side (index, 0 for lhs, i for rhs i)"""

    predicate: str | None = None
    rule: int | None = None
    sequent: int | None = None
    side: int | None = None

    def __str__(self) -> str:
        if self.predicate is not None:
            where = f"predicate {self.predicate}"
            return where if self.rule is None else f"{where}, rule {self.rule + 1}"
        if self.sequent is not None:
            side = "lhs" if not self.side else f"rhs {self.side}"
            return f"sequent {self.sequent + 1}, {side}"
        return "problem"


@dataclass(frozen=True, slots=True)
class Violation:
    kind: ViolationKind
    locus: Locus
    atom: str = ""
    detail: str = ""

    def __str__(self) -> str:
        text = f"[{self.kind.value}] {self.locus}"
        if self.atom:
            text += f": {self.atom}"
        if self.detail:
            text += f" ({self.detail})"
        return text


@dataclass(frozen=True, slots=True)
class NonUniformity:
    predicate: str
    position: int | Term
    allocating_rule: int
    non_allocating_rule: int

    def __str__(self) -> str:
        what = f"parameter {self.position}" if isinstance(self.position, int) else f"constant {self.position}"
        return (
            f"{self.predicate}: {what} allocated by rule {self.allocating_rule + 1} "
            f"but not by rule {self.non_allocating_rule + 1}"
        )


@dataclass(frozen=True)
class AllocTable:
    """allocated parameter positions (1-based) and constants per predicate"""

    must_par: dict[str, frozenset[int]] = field(default_factory=dict)
    may_par: dict[str, frozenset[int]] = field(default_factory=dict)
    must_const: dict[str, frozenset[Term]] = field(default_factory=dict)
    may_const: dict[str, frozenset[Term]] = field(default_factory=dict)
    non_uniform: tuple[NonUniformity, ...] = ()

    @property
    def uniform(self) -> bool:
        return not self.non_uniform

    def allocpar(self, name: str) -> frozenset[int]:
        return self.must_par[name]

    def alloconst(self, name: str) -> frozenset[Term]:
        return self.must_const[name]

    def __contains__(self, name: object) -> bool:
        return name in self.must_par

    def extended(self, name: str, allocpar: frozenset[int], alloconst: frozenset[Term]) -> AllocTable:
        """a table with one more uniform predicate"""
        return AllocTable(
            {**self.must_par, name: allocpar},
            {**self.may_par, name: allocpar},
            {**self.must_const, name: alloconst},
            {**self.may_const, name: alloconst},
            self.non_uniform,
        )


class AllocStatus(str, enum.Enum):
    """whether an existential is allocated in every unfolding"""

    ALLOCATED = "allocated"
    NOT_ALLOCATED = "not-allocated"
    UNKNOWN = "unknown"


@dataclass(frozen=True, slots=True)
class EstablishmentWitness:
    locus: Locus
    variable: Term
    status: AllocStatus

    def __str__(self) -> str:
        return f"{self.locus}: {self.variable} {self.status.value}"


@dataclass(frozen=True)
class EstablishmentReport:
    established: bool
    strongly: bool
    witnesses: tuple[EstablishmentWitness, ...] = ()

    def __bool__(self) -> bool:
        return self.established

    @property
    def failures(self) -> list[EstablishmentWitness]:
        return [w for w in self.witnesses if w.status is not AllocStatus.ALLOCATED]


@dataclass(frozen=True)
class RootAnalysis:
    roots: dict[str, int | Term]
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def progressing(self) -> bool:
        return not any(v.kind is ViolationKind.PROGRESS for v in self.violations)

    @property
    def connected(self) -> bool:
        return not any(v.kind is ViolationKind.CONNECTIVITY for v in self.violations)
