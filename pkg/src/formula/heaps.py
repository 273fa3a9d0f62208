from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field, replace

from .atoms import Atom, Diseq, Emp, Eq, PointsTo, Pred
from .terms import FreshNames, Substitution, Term, subst_all


@dataclass(frozen=True, slots=True)
class SymbolicHeap:
    """∃exists. ✱atoms in prenex form, emp is the empty atom list"""

    exists: tuple[Term, ...] = ()
    atoms: tuple[Atom, ...] = ()

    def __post_init__(self) -> None:
        if any(isinstance(a, Emp) for a in self.atoms):
            object.__setattr__(self, "atoms", tuple(a for a in self.atoms if not isinstance(a, Emp)))

    @property
    def points_to(self) -> list[PointsTo]:
        return [a for a in self.atoms if isinstance(a, PointsTo)]

    @property
    def preds(self) -> list[Pred]:
        return [a for a in self.atoms if isinstance(a, Pred)]

    @property
    def equalities(self) -> list[Eq]:
        return [a for a in self.atoms if isinstance(a, Eq)]

    @property
    def disequalities(self) -> list[Diseq]:
        return [a for a in self.atoms if isinstance(a, Diseq)]

    @property
    def spatial(self) -> list[PointsTo | Pred]:
        return [a for a in self.atoms if isinstance(a, (PointsTo, Pred))]

    def terms(self) -> set[Term]:
        return {t for atom in self.atoms for t in atom.terms()}

    def variables(self) -> set[Term]:
        """every variable occurring in the matrix, bound ones included"""
        return {t for t in self.terms() if not t.const}

    def free_vars(self) -> set[Term]:
        return self.variables() - set(self.exists)

    def constants(self) -> set[Term]:
        return {t for t in self.terms() if t.const}

    def spatial_terms(self) -> set[Term]:
        return {t for atom in self.spatial for t in atom.terms()}

    @property
    def is_emp(self) -> bool:
        return not self.atoms

    @property
    def is_quantifier_free(self) -> bool:
        return not self.exists

    @property
    def size(self) -> int:
        if not self.atoms:
            return 1 + 2 * len(self.exists)
        return 2 * len(self.exists) + sum(a.size for a in self.atoms) + len(self.atoms) - 1

    def substitute(self, sigma: Substitution) -> SymbolicHeap:
        """substitute free terms, renaming binders that would capture"""
        sigma = {k: v for k, v in sigma.items() if k not in self.exists}
        if not sigma:
            return self
        heap = self
        captured = set(sigma.values()) & set(self.exists)
        if captured:
            taken = {t.name for t in self.terms() | set(sigma.values()) | set(sigma)}
            fresh = FreshNames(prefix="_b", taken=taken)
            heap = self.rename_bound({x: fresh() for x in captured})
        return SymbolicHeap(heap.exists, tuple(a.substitute(sigma) for a in heap.atoms))

    def rename_bound(self, renaming: Mapping[Term, Term]) -> SymbolicHeap:
        return SymbolicHeap(
            subst_all(self.exists, renaming),
            tuple(a.substitute(renaming) for a in self.atoms),
        )

    def instantiate(self, x: Term, t: Term) -> SymbolicHeap:
        """∃x.φ ⇝ φ[t/x]"""
        exists = tuple(y for y in self.exists if y != x)
        return SymbolicHeap(exists, tuple(a.substitute({x: t}) for a in self.atoms))

    def with_atoms(self, atoms: Iterable[Atom]) -> SymbolicHeap:
        return SymbolicHeap(self.exists, tuple(atoms))

    def bind(self, *xs: Term) -> SymbolicHeap:
        return SymbolicHeap((*self.exists, *(x for x in xs if x not in self.exists)), self.atoms)

    def drop_unused_binders(self) -> SymbolicHeap:
        used = self.variables()
        return SymbolicHeap(tuple(x for x in self.exists if x in used), self.atoms)

    def star(self, other: SymbolicHeap) -> SymbolicHeap:
        return SymbolicHeap((*self.exists, *other.exists), (*self.atoms, *other.atoms))

    def __str__(self) -> str:
        body = " * ".join(map(str, self.atoms)) if self.atoms else "emp"
        if self.exists:
            return f"∃{','.join(map(str, self.exists))}. {body}"
        return body


@dataclass(frozen=True, slots=True)
class Rule:
    head: str
    params: tuple[Term, ...]
    body: SymbolicHeap

    def instantiate(self, args: tuple[Term, ...], fresh: FreshNames) -> SymbolicHeap:
        """the body with binders renamed apart and parameters replaced by args"""
        renaming = {z: fresh() for z in self.body.exists}
        sigma = {**dict(zip(self.params, args)), **renaming}
        return SymbolicHeap(tuple(renaming.values()), tuple(a.substitute(sigma) for a in self.body.atoms))

    def with_body(self, body: SymbolicHeap) -> Rule:
        return Rule(self.head, self.params, body)

    def __str__(self) -> str:
        return f"{self.head}({', '.join(map(str, self.params))}) ⇐ {self.body}"


RootSpec = int | Term


@dataclass(frozen=True)
class SID:
    """system of inductive definitions, roots are 1-based parameter positions or constants"""

    arities: dict[str, int] = field(default_factory=dict)
    rules: dict[str, tuple[Rule, ...]] = field(default_factory=dict)
    roots: dict[str, RootSpec] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        for name in self.arities:
            self.rules.setdefault(name, ())

    def rules_of(self, name: str) -> tuple[Rule, ...]:
        return self.rules.get(name, ())

    @property
    def predicates(self) -> list[str]:
        return list(self.arities)

    def all_rules(self) -> Iterator[Rule]:
        for rules in self.rules.values():
            yield from rules

    @property
    def rule_count(self) -> int:
        return sum(len(r) for r in self.rules.values())

    def with_roots(self, roots: Mapping[str, RootSpec]) -> SID:
        return SID(dict(self.arities), dict(self.rules), dict(roots))

    def root_of(self, atom: Pred) -> Term:
        root = self.roots[atom.name]
        return atom.args[root - 1] if isinstance(root, int) else root

    def restricted_to(self, names: Iterable[str]) -> SID:
        keep = set(names)
        return SID(
            {p: n for p, n in self.arities.items() if p in keep},
            {p: r for p, r in self.rules.items() if p in keep},
            {p: r for p, r in self.roots.items() if p in keep},
        )

    def reachable_from(self, names: Iterable[str]) -> set[str]:
        seen: set[str] = set()
        stack = [n for n in names]
        while stack:
            p = stack.pop()
            if p in seen:
                continue
            seen.add(p)
            for rule in self.rules_of(p):
                stack.extend(q.name for q in rule.body.preds)
        return seen


@dataclass(frozen=True, slots=True)
class Sequent:
    """lhs ⊢ rhs₁, …, rhsₙ"""

    lhs: SymbolicHeap
    rhs: tuple[SymbolicHeap, ...]

    def heaps(self) -> Iterator[SymbolicHeap]:
        yield self.lhs
        yield from self.rhs

    def __str__(self) -> str:
        return f"{self.lhs} ⊢ {', '.join(map(str, self.rhs))}"


@dataclass(frozen=True)
class Problem:
    constants: frozenset[Term]
    fields: int
    sid: SID
    sequents: tuple[Sequent, ...] = ()
    origins: tuple[int, ...] | None = field(default=None, compare=False)

    def origin_of(self, index: int) -> int:
        return index if self.origins is None else self.origins[index]

    @property
    def sorted_constants(self) -> list[Term]:
        return sorted(self.constants, key=lambda t: t.key)

    def heaps(self) -> Iterator[SymbolicHeap]:
        for rule in self.sid.all_rules():
            yield rule.body
        for sequent in self.sequents:
            yield from sequent.heaps()

    def names(self) -> set[str]:
        """every identifier in use, for fresh-name generation"""
        names = {c.name for c in self.constants} | set(self.sid.arities)
        for rule in self.sid.all_rules():
            names.update(t.name for t in rule.params)
            names.update(t.name for t in rule.body.exists)
        for heap in self.heaps():
            names.update(t.name for t in heap.terms())
        return names

    def with_sid(self, sid: SID) -> Problem:
        return replace(self, sid=sid)

    def with_sequents(self, sequents: Iterable[Sequent], origins: Iterable[int] | None = None) -> Problem:
        return replace(self, sequents=tuple(sequents), origins=None if origins is None else tuple(origins))

    @property
    def all_origins(self) -> tuple[int, ...]:
        return tuple(self.origin_of(i) for i in range(len(self.sequents)))
