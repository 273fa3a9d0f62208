from __future__ import annotations

import enum
import hashlib
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from itertools import product

from loguru import logger

from ..analysis.restrictions import check_erestricted
from ..analysis.roots import infer_roots_and_check
from ..config import CONFIG
from ..formula.atoms import Atom, Diseq, Eq, PointsTo, Pred
from ..formula.heaps import SID, Problem, Rule, Sequent, SymbolicHeap
from ..formula.terms import FreshNames, Term, sort_terms
from ..sl_entail.exceptions import ConditionError, TransformBlowupError
from ..sl_entail.metrics import metrics
from ..sl_entail.utils import time_execution

# ("c", name) for a constant argument, ("v", k) for the k-th distinct variable argument
Pattern = tuple[tuple[str, str | int], ...]


class SplitMode(str, enum.Enum):
    """terms an existential is split against"""

    CONSTANTS = "constants"
    ALL_TERMS = "all-terms"


def digest(value: object) -> str:
    return hashlib.sha1(repr(value).encode()).hexdigest()[:6]


def simplify(heap: SymbolicHeap) -> SymbolicHeap | None:
    """eliminate equalities on existentials and trivial atoms, None when the heap is unsatisfiable"""
    while True:
        bound = set(heap.exists)
        atoms: list[Atom] = []
        seen: set[frozenset[Term]] = set()
        sources: set[Term] = set()
        step: tuple[Term, Term] | None = None
        for atom in heap.atoms:
            if isinstance(atom, PointsTo):
                if atom.src in sources:
                    return None
                sources.add(atom.src)
            elif isinstance(atom, (Eq, Diseq)):
                same = atom.lhs == atom.rhs
                distinct_constants = atom.lhs.const and atom.rhs.const and not same
                if isinstance(atom, Eq):
                    if same:
                        continue
                    if distinct_constants:
                        return None
                    if step is None and atom.lhs in bound:
                        step = (atom.lhs, atom.rhs)
                    elif step is None and atom.rhs in bound:
                        step = (atom.rhs, atom.lhs)
                else:
                    if same:
                        return None
                    pair = frozenset(atom.terms())
                    if distinct_constants or pair in seen:
                        continue
                    seen.add(pair)
            atoms.append(atom)
        heap = heap.with_atoms(atoms)
        if step is None:
            return heap
        heap = heap.instantiate(*step)


def eliminate_floating(heap: SymbolicHeap) -> SymbolicHeap:
    """∃x. ✱x≄tᵢ * ψ ⇝ ψ when x occurs in no spatial atom of ψ"""
    spatial = heap.spatial_terms()
    floating = {x for x in heap.exists if x not in spatial}
    if not floating:
        return heap
    atoms = [a for a in heap.atoms if not set(a.terms()) & floating]
    return SymbolicHeap(tuple(x for x in heap.exists if x not in floating), tuple(atoms))


def _missing_disequality(heap: SymbolicHeap, constants: Sequence[Term], mode: SplitMode) -> tuple[Term, Term] | None:
    present = {frozenset(d.terms()) for d in heap.disequalities}
    variables = sort_terms(heap.variables()) if mode is SplitMode.ALL_TERMS else []
    for x in heap.exists:
        for t in (*constants, *variables):
            if t != x and frozenset((x, t)) not in present:
                return x, t
    return None


def split_existentials(heap: SymbolicHeap, constants: Sequence[Term], mode: SplitMode) -> list[SymbolicHeap]:
    """case split every existential x against each term t: x:=t, or x≄t added"""
    done: list[SymbolicHeap] = []
    work = [heap]
    while work:
        current = simplify(work.pop())
        if current is None:
            continue
        pair = _missing_disequality(current, constants, mode)
        if pair is None:
            done.append(current)
            continue
        x, t = pair
        work.append(current.with_atoms((*current.atoms, Diseq(x, t))))
        work.append(current.instantiate(x, t))
        if len(done) + len(work) > CONFIG.transform.max_rules:
            raise TransformBlowupError(f"splitting {heap} exceeds {CONFIG.transform.max_rules} symbolic heaps")
    return done


@dataclass(frozen=True, slots=True)
class AllocSignature:
    """positions and constants allocated, resp. only referenced, by every unfolding of a variant"""

    allocated: frozenset[int]
    referenced: frozenset[int]
    allocated_constants: frozenset[Term]
    referenced_constants: frozenset[Term]

    def kept(self, arity: int) -> list[int]:
        return [i for i in range(1, arity + 1) if i in self.allocated or i in self.referenced]

    @property
    def key(self) -> tuple[object, ...]:
        return (
            tuple(sorted(self.allocated)),
            tuple(sorted(self.referenced)),
            tuple(sorted(c.name for c in self.allocated_constants)),
            tuple(sorted(c.name for c in self.referenced_constants)),
        )


def _alloc_and_refs(heap: SymbolicHeap, choice: Sequence[AllocSignature]) -> tuple[list[Term], list[Term]]:
    allocated = [p.src for p in heap.points_to]
    referenced = [t for p in heap.points_to for t in p.dests]
    for atom, sig in zip(heap.preds, choice):
        allocated.extend(atom.args[j - 1] for j in sorted(sig.allocated))
        allocated.extend(sort_terms(sig.allocated_constants))
        referenced.extend(atom.args[j - 1] for j in sorted(sig.referenced))
        referenced.extend(sig.referenced_constants)
    return allocated, referenced


def _overlapping(allocated: list[Term]) -> bool:
    return len(allocated) != len(set(allocated))


def body_signature(
    params: Sequence[Term], body: SymbolicHeap, choice: Sequence[AllocSignature]
) -> AllocSignature | None:
    """signature of one rule under a choice of sub-variants, None when a term is allocated twice"""
    allocated, referenced = _alloc_and_refs(body, choice)
    if _overlapping(allocated):
        return None
    allocated_set, referenced_set = set(allocated), set(referenced)
    return AllocSignature(
        frozenset(i + 1 for i, x in enumerate(params) if x in allocated_set),
        frozenset(i + 1 for i, x in enumerate(params) if x in referenced_set and x not in allocated_set),
        frozenset(c for c in allocated_set if c.const),
        frozenset(c for c in referenced_set if c.const and c not in allocated_set),
    )


# predicate → realizable signature → (rule index, sub-variant choice) instances realizing it
Realized = dict[str, dict[AllocSignature, list[tuple[int, tuple[AllocSignature, ...]]]]]


class _Normalizer:
    def __init__(self, problem: Problem, mode: SplitMode) -> None:
        self.problem = problem
        self.mode = mode
        self.constants = problem.sorted_constants
        self.arities: dict[str, int] = dict(problem.sid.arities)
        self.params: dict[str, tuple[Term, ...]] = {}
        self.split: dict[str, list[SymbolicHeap]] = {}
        self.rules: dict[str, list[SymbolicHeap]] = {}
        self._specialized: dict[tuple[str, Pattern], str] = {}
        self._pending: list[tuple[str, str, Pattern]] = []
        self._fresh = FreshNames(prefix="x", taken=problem.names())
        self._produced = 0

    def _count(self, n: int = 1) -> None:
        self._produced += n
        if self._produced > CONFIG.transform.max_rules:
            raise TransformBlowupError(f"normalization exceeds {CONFIG.transform.max_rules} rules")

    def _aligned_bodies(self, name: str) -> list[SymbolicHeap]:
        rules = self.problem.sid.rules_of(name)
        if rules:
            params = rules[0].params
        else:
            params = tuple(self._fresh.take(self.arities[name]))
        self.params[name] = params
        return [rule.body.substitute(dict(zip(rule.params, params))) for rule in rules]

    def _specialize_atom(self, atom: Pred) -> Pred:
        pattern: list[tuple[str, str | int]] = []
        args: list[Term] = []
        for t in atom.args:
            if t.const:
                pattern.append(("c", t.name))
            elif t in args:
                pattern.append(("v", args.index(t)))
            else:
                pattern.append(("v", len(args)))
                args.append(t)
        if len(args) == len(atom.args):
            return atom
        key = (atom.name, tuple(pattern))
        if key not in self._specialized:
            name = f"{atom.name}__{digest(key[1])}"
            self._specialized[key] = name
            self._pending.append((name, atom.name, key[1]))
        return Pred(self._specialized[key], tuple(args))

    def _finish(self, body: SymbolicHeap) -> SymbolicHeap | None:
        """specialized sub-atoms, no equalities, disequalities only on existentials, no floating existentials"""
        simplified = simplify(body)
        if simplified is None or simplified.equalities:
            return None
        bound = set(simplified.exists)
        atoms: list[Atom] = []
        for atom in simplified.atoms:
            if isinstance(atom, Pred):
                atoms.append(self._specialize_atom(atom))
            elif isinstance(atom, Diseq) and not {atom.lhs, atom.rhs} & bound:
                continue
            else:
                atoms.append(atom)
        return eliminate_floating(simplified.with_atoms(atoms))

    def _define(self, name: str, bodies: Iterable[SymbolicHeap]) -> None:
        finished = [b for b in (self._finish(body) for body in bodies) if b is not None]
        self._count(len(finished))
        self.rules[name] = finished

    def _define_specialized(self, name: str, base: str, pattern: Pattern) -> None:
        base_params = self.params[base]
        sigma: dict[Term, Term] = {}
        params: list[Term] = []
        for x, (kind, value) in zip(base_params, pattern):
            if kind == "c":
                sigma[x] = Term(str(value), const=True)
            elif value == len(params):
                params.append(x)
            else:
                sigma[x] = params[int(value)]
        self.arities[name] = len(params)
        self.params[name] = tuple(params)
        self._define(name, (body.substitute(sigma) for body in self.split[base]))
        logger.debug(f"Specialized {base} on {pattern} as {name} with {len(self.rules[name])} rules")

    def _sequent(self, sequent: Sequent) -> Sequent | None:
        if sequent.lhs.exists:
            raise ConditionError(f"left-hand side {sequent.lhs} must be quantifier-free")
        lhs = simplify(sequent.lhs)
        if lhs is None:
            return None
        lhs = lhs.with_atoms(self._specialize_atom(a) if isinstance(a, Pred) else a for a in lhs.atoms)
        disjuncts: list[SymbolicHeap] = []
        for rhs in sequent.rhs:
            for case in split_existentials(rhs, self.constants, self.mode):
                atoms = [self._specialize_atom(a) if isinstance(a, Pred) else a for a in case.atoms]
                disjuncts.append(eliminate_floating(case.with_atoms(atoms)))
        return Sequent(lhs, tuple(disjuncts))

    def _realizable(self) -> Realized:
        """least fixpoint of the signatures each predicate can realize, with the rule instances realizing them"""
        found: Realized = {p: {} for p in self.rules}
        tried: set[tuple[str, int, tuple[AllocSignature, ...]]] = set()
        variants = 0
        changed = True
        while changed:
            changed = False
            for name in sorted(self.rules):
                for index, body in enumerate(self.rules[name]):
                    options = [sorted(found[q.name], key=lambda s: s.key) for q in body.preds]
                    for choice in product(*options):
                        if (name, index, choice) in tried:
                            continue
                        tried.add((name, index, choice))
                        sig = body_signature(self.params[name], body, choice)
                        if sig is None:
                            continue
                        if sig not in found[name]:
                            changed = True
                            variants += 1
                            if variants > CONFIG.transform.max_variants:
                                raise TransformBlowupError(
                                    f"uniformization exceeds {CONFIG.transform.max_variants} variants"
                                )
                        found[name].setdefault(sig, []).append((index, choice))
        return found

    def _expand(self, heap: SymbolicHeap, found: Realized) -> list[SymbolicHeap]:
        """one heap per choice of variants for its predicate atoms, overlapping allocations pruned"""
        options = [sorted(found[q.name], key=lambda s: s.key) for q in heap.preds]
        result = []
        for choice in product(*options):
            allocated, _ = _alloc_and_refs(heap, choice)
            if _overlapping(allocated):
                continue
            result.append(eliminate_floating(self._rewrite(heap, choice, found)))
        self._count(len(result))
        return result

    def _variant_name(self, name: str, sig: AllocSignature, found: Realized) -> str:
        if len(found[name]) == 1 and len(sig.kept(self.arities[name])) == self.arities[name]:
            return name
        return f"{name}__{digest(sig.key)}"

    def _rewrite(
        self,
        heap: SymbolicHeap,
        choice: Sequence[AllocSignature],
        found: Realized,
        dropped: frozenset[Term] = frozenset(),
    ) -> SymbolicHeap:
        variants = iter(choice)
        atoms: list[Atom] = []
        for atom in heap.atoms:
            if isinstance(atom, Pred):
                sig = next(variants)
                kept = sig.kept(len(atom.args))
                name = self._variant_name(atom.name, sig, found)
                atoms.append(Pred(name, tuple(atom.args[i - 1] for i in kept)))
            elif isinstance(atom, Diseq) and set(atom.terms()) & dropped:
                continue
            else:
                atoms.append(atom)
        return heap.with_atoms(atoms)

    def _uniformize(self, sequents: list[tuple[Sequent, int]]) -> Problem:
        found = self._realizable()
        arities: dict[str, int] = {}
        rules: dict[str, tuple[Rule, ...]] = {}
        for name in sorted(found):
            for sig, instances in sorted(found[name].items(), key=lambda item: item[0].key):
                variant = self._variant_name(name, sig, found)
                kept = sig.kept(self.arities[name])
                params = tuple(self.params[name][i - 1] for i in kept)
                dropped = frozenset(self.params[name]) - set(params)
                bodies = [
                    eliminate_floating(self._rewrite(self.rules[name][index], choice, found, dropped))
                    for index, choice in instances
                ]
                arities[variant] = len(params)
                rules[variant] = tuple(Rule(variant, params, body) for body in dict.fromkeys(bodies))
        out_sequents: list[Sequent] = []
        origins: list[int] = []
        for sequent, origin in sequents:
            disjuncts = tuple(h for rhs in sequent.rhs for h in self._expand(rhs, found))
            for lhs in self._expand(sequent.lhs, found):
                out_sequents.append(Sequent(lhs, disjuncts))
                origins.append(origin)
        sid = SID(arities, rules)
        if out_sequents:
            keep = sid.reachable_from(q.name for s in out_sequents for h in s.heaps() for q in h.preds)
            sid = sid.restricted_to(keep)
        analysis = infer_roots_and_check(sid)
        return Problem(
            constants=self.problem.constants,
            fields=self.problem.fields,
            sid=sid.with_roots(analysis.roots),
            sequents=tuple(out_sequents),
            origins=tuple(origins),
        )

    def run(self) -> Problem:
        for name in self.arities:
            self.split[name] = [
                case
                for body in self._aligned_bodies(name)
                for case in split_existentials(body, self.constants, self.mode)
            ]
        for name in list(self.arities):
            self._define(name, self.split[name])
        sequents: list[tuple[Sequent, int]] = []
        for i, sequent in enumerate(self.problem.sequents):
            result = self._sequent(sequent)
            if result is None:
                logger.debug(f"Sequent {self.problem.origin_of(i) + 1} dropped, its lhs is unsatisfiable")
                continue
            sequents.append((result, self.problem.origin_of(i)))
        while self._pending:
            self._define_specialized(*self._pending.pop())
        return self._uniformize(sequents)


@time_execution
def normalize(problem: Problem, mode: SplitMode | None = None) -> Problem:
    """an equivalent normalized problem, splitting against constants only when the input is e-restricted"""
    roots = infer_roots_and_check(problem.sid)
    if not roots.ok:
        raise ConditionError("normalization needs a progressing and connected problem", roots.violations)
    if mode is None:
        mode = SplitMode.CONSTANTS if not check_erestricted(problem) else SplitMode.ALL_TERMS
    result = _Normalizer(problem, mode).run()
    logger.info(
        f"Normalized ({mode.value}) {problem.sid.rule_count} rules into {result.sid.rule_count} rules "
        f"over {len(result.sid.arities)} predicates, {len(result.sequents)} sequents"
    )
    metrics.register_transform("normalize", result.sid.rule_count)
    return result
