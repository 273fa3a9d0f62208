from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations, product

from loguru import logger

from ..config import CONFIG
from ..sl_entail.exceptions import PoolExhaustedError
from ..sl_entail.metrics import metrics
from .atoms import Context, PointsTo, Pred
from .heaps import SID
from .terms import Substitution, Term, var

CoreAtom = Context | PointsTo


@dataclass(frozen=True, slots=True)
class CoreFormula:
    """∃h hx ∀¬h ny. ✱ctx * ✱pto"""

    hx: tuple[Term, ...] = ()
    ny: tuple[Term, ...] = ()
    ctx: tuple[Context, ...] = ()
    pto: tuple[PointsTo, ...] = ()

    @classmethod
    def of(cls, atoms: Iterable[CoreAtom], hx: Iterable[Term] = (), ny: Iterable[Term] = ()) -> CoreFormula:
        atoms = list(atoms)
        return cls(
            tuple(hx),
            tuple(ny),
            tuple(a for a in atoms if isinstance(a, Context)),
            tuple(a for a in atoms if isinstance(a, PointsTo)),
        )

    @property
    def atoms(self) -> tuple[CoreAtom, ...]:
        return (*self.pto, *self.ctx)

    @property
    def bound(self) -> set[Term]:
        return set(self.hx) | set(self.ny)

    @property
    def is_emp(self) -> bool:
        return not self.ctx and not self.pto

    @property
    def is_closed_body(self) -> bool:
        return not self.hx and not self.ny

    def terms(self) -> set[Term]:
        return {t for atom in self.atoms for t in atom.terms()}

    def free_terms(self) -> set[Term]:
        return self.terms() - self.bound

    def free_vars(self) -> set[Term]:
        return {t for t in self.terms() if not t.const} - self.bound

    def constants(self) -> set[Term]:
        return {t for t in self.terms() if t.const}

    def body(self) -> CoreFormula:
        return CoreFormula(ctx=self.ctx, pto=self.pto)

    def substitute(self, sigma: Substitution) -> CoreFormula:
        """substitution on free terms, binders are left alone"""
        sigma = {k: v for k, v in sigma.items() if k not in self.bound}
        return CoreFormula(
            self.hx,
            self.ny,
            tuple(c.substitute(sigma) for c in self.ctx),
            tuple(p.substitute(sigma) for p in self.pto),
        )

    def rename(self, renaming: Mapping[Term, Term]) -> CoreFormula:
        """rename variables everywhere, binders included"""
        return CoreFormula(
            tuple(renaming.get(x, x) for x in self.hx),
            tuple(renaming.get(y, y) for y in self.ny),
            tuple(c.substitute(renaming) for c in self.ctx),
            tuple(p.substitute(renaming) for p in self.pto),
        )

    def star(self, other: CoreFormula) -> CoreFormula:
        return CoreFormula(
            (*self.hx, *other.hx), (*self.ny, *other.ny), (*self.ctx, *other.ctx), (*self.pto, *other.pto)
        )

    @property
    def size(self) -> int:
        binders = 2 * (len(self.hx) + len(self.ny))
        atoms = self.atoms
        if not atoms:
            return binders + 1
        return binders + sum(a.size for a in atoms) + len(atoms) - 1

    def __str__(self) -> str:
        prefix = ""
        if self.hx:
            prefix += f"∃h {','.join(map(str, self.hx))}. "
        if self.ny:
            prefix += f"∀¬h {','.join(map(str, self.ny))}. "
        body = " * ".join(map(str, self.atoms)) if self.atoms else "emp"
        return prefix + body


EMP = CoreFormula()


@dataclass(frozen=True, slots=True)
class VariablePool:
    v1: tuple[Term, ...]
    v2: tuple[Term, ...]
    _v1: frozenset[Term] = field(default=frozenset(), compare=False, repr=False)
    _v2: frozenset[Term] = field(default=frozenset(), compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_v1", frozenset(self.v1))
        object.__setattr__(self, "_v2", frozenset(self.v2))

    @classmethod
    def for_width(cls, width: int) -> VariablePool:
        return cls(tuple(var(f"_v1_{i}") for i in range(width)), tuple(var(f"_v2_{i}") for i in range(width)))

    @property
    def width(self) -> int:
        return len(self.v1)

    def in_v1(self, t: Term) -> bool:
        return t in self._v1

    def in_v2(self, t: Term) -> bool:
        return t in self._v2

    def fresh_v1(self, avoid: Iterable[Term], count: int = 1) -> list[Term]:
        avoid = set(avoid)
        free = [x for x in self.v1 if x not in avoid]
        if len(free) < count:
            raise PoolExhaustedError(f"{count} fresh variables requested, {len(free)} left in the free pool")
        return free[:count]


def root_list(phi: CoreFormula, sid: SID) -> list[Term]:
    roots = [p.src for p in phi.pto]
    for c in phi.ctx:
        roots.append(sid.root_of(c.target))
        roots.extend(sid.root_of(g) for g in c.guards)
    return roots


def roots_of(phi: CoreFormula, sid: SID) -> tuple[frozenset[Term], frozenset[Term]]:
    """(lroots, rroots): guard roots, and target roots plus points-to sources"""
    lroots = frozenset(sid.root_of(g) for c in phi.ctx for g in c.guards)
    rroots = frozenset([p.src for p in phi.pto] + [sid.root_of(c.target) for c in phi.ctx])
    return lroots, rroots


def is_core(phi: CoreFormula, sid: SID, pool: VariablePool) -> bool:
    """well-formed core formula whose variables respect the pool discipline"""
    bound = phi.bound
    if len(bound) != len(phi.hx) + len(phi.ny):
        return False
    roots = root_list(phi, sid)
    if len(roots) != len(set(roots)):
        return False
    terms = phi.terms()
    if any(y not in terms for y in phi.ny):
        return False
    for x in phi.hx:
        if any(x in p.terms() for p in phi.pto):
            continue
        if not any(x in c.target.args and all(x not in g.args for g in c.guards) for c in phi.ctx):
            return False
    if any(pool.in_v1(x) for x in bound):
        return False
    for r in roots:
        if r.const:
            continue
        if (r in bound and not pool.in_v2(r)) or (r not in bound and not pool.in_v1(r)):
            return False
    return True


_HOLE = Term("•")


def _roles(v: Term, atom: CoreAtom, hide: Mapping[Term, Term]) -> tuple[object, ...]:
    if isinstance(atom, PointsTo):
        return ("p", atom.substitute(hide).key, tuple(i for i, t in enumerate(atom.terms()) if t == v))
    parts: list[tuple[object, ...]] = []
    for is_target, pred in [(True, atom.target), *((False, g) for g in atom.guards)]:
        where = tuple(i for i, t in enumerate(pred.args) if t == v)
        if where:
            parts.append((is_target, pred.substitute(hide).key, where))
    return ("c", atom.substitute(hide).key, tuple(sorted(parts)))


def _signature(v: Term, phi: CoreFormula, hide: Mapping[Term, Term]) -> tuple[object, ...]:
    kind = "h" if v in phi.hx else "n"
    return (kind, tuple(sorted(_roles(v, a, hide) for a in phi.atoms if v in a.terms())))


def sort_atoms(phi: CoreFormula) -> CoreFormula:
    ctx = tuple(sorted((Context.make(c.guards, c.target) for c in phi.ctx), key=lambda c: c.key))
    return CoreFormula(phi.hx, phi.ny, ctx, tuple(sorted(phi.pto, key=lambda p: p.key)))


def _key(phi: CoreFormula) -> tuple[object, ...]:
    return (
        tuple(p.key for p in phi.pto),
        tuple(c.key for c in phi.ctx),
        tuple(x.key for x in phi.hx),
        tuple(y.key for y in phi.ny),
    )


@lru_cache(maxsize=1 << 18)
def canonicalize(phi: CoreFormula, pool: VariablePool) -> CoreFormula:
    """
    sorted atoms, binders renamed to the bound pool in a deterministic order.
    Binders with equal signatures are tried in every order up to the configured cap;
    a truncated search is logged and counted since its result may not be canonical
    """
    bound = [*phi.hx, *phi.ny]
    if not bound:
        return sort_atoms(phi)
    if len(bound) > len(pool.v2):
        raise PoolExhaustedError(f"{len(bound)} bound variables exceed the pool of {len(pool.v2)}")
    if phi.free_vars() & set(pool.v2):
        raise ValueError(f"free variable drawn from the bound pool in {phi}")
    hide = {v: _HOLE for v in bound}
    signatures = {v: _signature(v, phi, hide) for v in bound}
    ordered = sorted(bound, key=lambda v: (signatures[v], v.name))
    groups: list[list[Term]] = []
    for v in ordered:
        if groups and signatures[groups[-1][0]] == signatures[v]:
            groups[-1].append(v)
        else:
            groups.append([v])
    cap = CONFIG.solver.canonical_permutation_cap
    best: CoreFormula | None = None
    best_key: tuple[object, ...] | None = None
    for tried, choice in enumerate(product(*(permutations(g) for g in groups))):
        if tried >= cap:
            logger.warning(f"Canonical search for {phi} truncated after {cap} candidates")
            metrics.register_truncated_canonical()
            break
        order = [v for group in choice for v in group]
        renaming = {v: pool.v2[i] for i, v in enumerate(order)}
        candidate = sort_atoms(phi.rename(renaming))
        index = {x: i for i, x in enumerate(pool.v2)}
        candidate = CoreFormula(
            tuple(sorted(candidate.hx, key=index.__getitem__)),
            tuple(sorted(candidate.ny, key=index.__getitem__)),
            candidate.ctx,
            candidate.pto,
        )
        key = _key(candidate)
        if best_key is None or key < best_key:
            best, best_key = candidate, key
    assert best is not None
    return best


def strip(phi: CoreFormula) -> CoreFormula:
    """remove binders of variables that no longer occur"""
    terms = phi.terms()
    return CoreFormula(
        tuple(x for x in phi.hx if x in terms), tuple(y for y in phi.ny if y in terms), phi.ctx, phi.pto
    )


def emp_context(pred: Pred) -> Context:
    return Context((), pred)
