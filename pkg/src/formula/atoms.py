from __future__ import annotations

from dataclasses import dataclass

from .terms import Substitution, Term, subst, subst_all


@dataclass(frozen=True, slots=True)
class Emp:
    def terms(self) -> tuple[Term, ...]:
        return ()

    def substitute(self, sigma: Substitution) -> Emp:
        return self

    @property
    def size(self) -> int:
        return 1

    def __str__(self) -> str:
        return "emp"


@dataclass(frozen=True, slots=True)
class PointsTo:
    src: Term
    dests: tuple[Term, ...]

    def terms(self) -> tuple[Term, ...]:
        return (self.src, *self.dests)

    def substitute(self, sigma: Substitution) -> PointsTo:
        return PointsTo(subst(self.src, sigma), subst_all(self.dests, sigma))

    @property
    def size(self) -> int:
        return 2 + len(self.dests)

    @property
    def key(self) -> tuple[object, ...]:
        return (self.src.key, tuple(t.key for t in self.dests))

    def __str__(self) -> str:
        return f"{self.src}↦({', '.join(map(str, self.dests))})"


@dataclass(frozen=True, slots=True)
class Pred:
    name: str
    args: tuple[Term, ...] = ()

    def terms(self) -> tuple[Term, ...]:
        return self.args

    def substitute(self, sigma: Substitution) -> Pred:
        return Pred(self.name, subst_all(self.args, sigma))

    @property
    def size(self) -> int:
        return 1 + len(self.args)

    @property
    def key(self) -> tuple[object, ...]:
        return (self.name, tuple(t.key for t in self.args))

    def __str__(self) -> str:
        return f"{self.name}({', '.join(map(str, self.args))})"


@dataclass(frozen=True, slots=True)
class Eq:
    lhs: Term
    rhs: Term

    def terms(self) -> tuple[Term, ...]:
        return (self.lhs, self.rhs)

    def substitute(self, sigma: Substitution) -> Eq:
        return Eq(subst(self.lhs, sigma), subst(self.rhs, sigma))

    @property
    def size(self) -> int:
        return 3

    def __str__(self) -> str:
        return f"{self.lhs}≃{self.rhs}"


@dataclass(frozen=True, slots=True)
class Diseq:
    lhs: Term
    rhs: Term

    def terms(self) -> tuple[Term, ...]:
        return (self.lhs, self.rhs)

    def substitute(self, sigma: Substitution) -> Diseq:
        return Diseq(subst(self.lhs, sigma), subst(self.rhs, sigma))

    @property
    def size(self) -> int:
        return 3

    def __str__(self) -> str:
        return f"{self.lhs}≄{self.rhs}"


@dataclass(frozen=True, slots=True)
class Context:
    """guards ⊸ target, the partial unfolding of target with the guard leaves cut out"""

    guards: tuple[Pred, ...]
    target: Pred

    @classmethod
    def make(cls, guards: tuple[Pred, ...] | list[Pred], target: Pred) -> Context:
        return cls(tuple(sorted(guards, key=lambda g: g.key)), target)

    def terms(self) -> tuple[Term, ...]:
        return tuple(t for atom in (*self.guards, self.target) for t in atom.args)

    def substitute(self, sigma: Substitution) -> Context:
        return Context.make([g.substitute(sigma) for g in self.guards], self.target.substitute(sigma))

    @property
    def size(self) -> int:
        guards = sum(g.size for g in self.guards) + max(len(self.guards) - 1, 0) if self.guards else 1
        return guards + 1 + self.target.size

    @property
    def key(self) -> tuple[object, ...]:
        return (self.target.key, tuple(g.key for g in self.guards))

    def __str__(self) -> str:
        guards = " * ".join(map(str, self.guards)) if self.guards else "emp"
        return f"({guards} ⊸ {self.target})"


Atom = Emp | PointsTo | Pred | Eq | Diseq
EquationalAtom = Eq | Diseq
