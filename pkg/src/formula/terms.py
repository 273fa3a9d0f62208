from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from itertools import count


@dataclass(frozen=True, slots=True)
class Term:
    """a variable or a constant"""

    name: str
    const: bool = False

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"{'const' if self.const else 'var'}({self.name})"

    @property
    def key(self) -> tuple[int, str]:
        """constants come before variables, then lexicographic"""
        return (0 if self.const else 1, self.name)


def var(name: str) -> Term:
    return Term(name)


def const(name: str) -> Term:
    return Term(name, const=True)


Substitution = Mapping[Term, Term]


def subst(term: Term, sigma: Substitution) -> Term:
    return sigma.get(term, term)


def subst_all(terms: Iterable[Term], sigma: Substitution) -> tuple[Term, ...]:
    return tuple(sigma.get(t, t) for t in terms)


def sort_terms(terms: Iterable[Term]) -> list[Term]:
    return sorted(set(terms), key=lambda t: t.key)


def variables(terms: Iterable[Term]) -> set[Term]:
    return {t for t in terms if not t.const}


class FreshNames:
    """supply of variable names that avoid a set of taken names"""

    def __init__(self, prefix: str = "_f", taken: Iterable[str] = ()) -> None:
        self._prefix = prefix
        self._taken = set(taken)
        self._counter = count()

    def reserve(self, names: Iterable[str]) -> None:
        self._taken.update(names)

    def __call__(self) -> Term:
        while True:
            name = f"{self._prefix}{next(self._counter)}"
            if name not in self._taken:
                self._taken.add(name)
                return Term(name)

    def take(self, n: int) -> list[Term]:
        return [self() for _ in range(n)]

    def __iter__(self) -> Iterator[Term]:
        while True:
            yield self()
