"""bounded cross-checks of the abstraction operations against generated structures"""

import random
from collections.abc import Callable, Iterator
from itertools import combinations

import pytest

from src.analysis import infer_roots_and_check
from src.formula import Context, CoreFormula, Pred, VariablePool, canonicalize, var
from src.formula.atoms import Atom, Diseq, PointsTo
from src.formula.heaps import SID, SymbolicHeap
from src.formula.terms import Term
from src.oracle import (
    Bounds,
    ModelFilter,
    Structure,
    core_abstraction,
    enumerate_models,
    sat_core_formula,
    sat_symbolic_heap,
)
from src.profile import add_vars, compose, consequence_closure, coretrans, rem_var
from src.sidfile import parse_problem

CASES = 1000
UNIVERSE = 5
u, v, w, e = var("u"), var("v"), var("w"), var("e")
NAMES = (u, v, w)
BOUNDS = Bounds.make(3, 4)
POOL = VariablePool(NAMES, tuple(var(f"z{i}") for i in range(1, 5)))

Maker = Callable[[Term, Term], Atom]


def _sid(text: str) -> SID:
    sid = parse_problem(text).sid
    return sid.with_roots(infer_roots_and_check(sid).roots)


LISTS = _sid("(fields 1) (pred (ls x y) (pto x (y)) (exists (z) (star (pto x (z)) (ls z y))))")
UNARY = _sid("(fields 1) (pred (p x) (exists (z) (star (pto x (z)) (q z)))) (pred (q x) (pto x (x)))")
FAMILIES: list[tuple[SID, list[Maker]]] = [
    (LISTS, [lambda s, t: PointsTo(s, (t,)), lambda s, t: Pred("ls", (s, t))]),
    (UNARY, [lambda s, t: PointsTo(s, (t,)), lambda s, t: Pred("p", (s,)), lambda s, t: Pred("q", (s,))]),
]


def _structure(rng: random.Random, names: tuple[Term, ...], cells: int) -> Structure:
    places = rng.sample(range(UNIVERSE), len(names))
    heap = {src: (rng.randrange(UNIVERSE),) for src in rng.sample(range(UNIVERSE), cells)}
    return Structure.make(dict(zip(names, places)), heap)


def _symbolic_heap(rng: random.Random, makers: list[Maker], pure: bool = True) -> SymbolicHeap:
    first, second = rng.choice(makers), rng.choice(makers)
    s, t, r = (rng.choice(NAMES) for _ in range(3))
    atoms: list[Atom] = [first(s, t)]
    exists: tuple[Term, ...] = ()
    if rng.random() < 0.3:
        atoms, exists = [first(s, e), second(e, t)], (e,)
    elif rng.random() < 0.6:
        atoms.append(second(r, t))
    if pure and rng.random() < 0.3:
        atoms.append(Diseq(*rng.sample(NAMES, 2)))
    return SymbolicHeap(exists, tuple(atoms))


def _distinct_heaps(rng: random.Random, pure: bool = True) -> Iterator[tuple[SID, SymbolicHeap]]:
    seen: set[tuple[int, SymbolicHeap]] = set()
    while True:
        index = rng.randrange(len(FAMILIES))
        sid, makers = FAMILIES[index]
        phi = _symbolic_heap(rng, makers, pure)
        if (index, phi) not in seen:
            seen.add((index, phi))
            yield sid, phi


def _core_formula(rng: random.Random) -> CoreFormula:
    binders = [var(f"b{i}") for i in range(rng.randint(0, 3))]
    terms = [*NAMES, *binders]
    atoms: list[PointsTo | Context] = []
    for _ in range(rng.randint(1, 4)):
        s, t = rng.choice(terms), rng.choice(terms)
        if rng.random() < 0.5:
            atoms.append(PointsTo(s, (t,)))
        else:
            guards = [Pred("ls", (rng.choice(terms), t)) for _ in range(rng.randint(0, 2))]
            atoms.append(Context.make(guards, Pred("ls", (s, t))))
    used = {t for a in atoms for t in a.terms()}
    bound = [b for b in binders if b in used]
    hx = [b for b in bound if rng.random() < 0.5]
    return CoreFormula.of(atoms, hx, [b for b in bound if b not in hx])


def test_canonical_form_is_a_fixpoint() -> None:
    rng = random.Random(11)
    for _ in range(CASES):
        phi = _core_formula(rng)
        canonical = canonicalize(phi, POOL)
        assert canonicalize(canonical, POOL) == canonical, f"canonical form of {phi} moves again"


def test_canonical_form_ignores_binder_names_and_atom_order() -> None:
    rng = random.Random(12)
    for _ in range(CASES):
        phi = _core_formula(rng)
        bound = [*phi.hx, *phi.ny]
        names = [var(f"c{i}") for i in range(len(bound))]
        rng.shuffle(names)
        renamed = phi.rename(dict(zip(bound, names)))
        atoms = list(renamed.atoms)
        rng.shuffle(atoms)
        hx, ny = list(renamed.hx), list(renamed.ny)
        rng.shuffle(hx)
        rng.shuffle(ny)
        variant = CoreFormula.of(atoms, hx, ny)
        assert canonicalize(variant, POOL) == canonicalize(phi, POOL), f"{variant} and {phi} differ"


@pytest.mark.slow
def test_model_filters_are_nested() -> None:
    bounds = Bounds.make(2, 4)
    heaps = _distinct_heaps(random.Random(13))
    for _ in range(CASES):
        sid, phi = next(heaps)
        every = set(enumerate_models(phi, sid, bounds, ModelFilter.ALL))
        injective = set(enumerate_models(phi, sid, bounds, ModelFilter.INJECTIVE))
        normal = set(enumerate_models(phi, sid, bounds, ModelFilter.NORMAL))
        assert normal <= injective <= every, f"filters of {phi} are not nested"
        assert all(st.injective for st in injective), f"a non-injective store among the models of {phi}"


@pytest.mark.slow
def test_core_translation_is_equivalent_on_injective_structures() -> None:
    rng = random.Random(14)
    heaps = _distinct_heaps(rng)
    checked = 0
    while checked < CASES:
        sid, phi = next(heaps)
        free = tuple(t for t in NAMES if t in phi.free_vars())
        translations = coretrans(phi, sid, POOL, ())
        structures = list(enumerate_models(phi, sid, BOUNDS, ModelFilter.INJECTIVE))[:2]
        structures += [_structure(rng, free, rng.randint(0, 3)) for _ in range(2)]
        for st in structures:
            expected = sat_symbolic_heap(st, phi, sid, BOUNDS)
            found = any(sat_core_formula(st, psi, sid, BOUNDS) for psi in translations)
            assert found == expected, f"{phi} and its translations disagree on {st}"
            checked += 1


@pytest.mark.slow
def test_consequences_hold_where_their_premise_holds() -> None:
    rng = random.Random(15)
    for i in range(CASES):
        sid = FAMILIES[i % len(FAMILIES)][0]
        st = _structure(rng, NAMES, rng.randint(1, 3))
        for phi in core_abstraction(st, POOL, sid, BOUNDS):
            for psi in consequence_closure([phi]):
                assert sat_core_formula(st, psi, sid, BOUNDS), f"{psi} follows from {phi} but fails in {st}"


@pytest.mark.slow
def test_adding_a_fresh_variable() -> None:
    rng = random.Random(16)
    for i in range(CASES):
        sid = FAMILIES[i % len(FAMILIES)][0]
        st = _structure(rng, (u, v), rng.randint(1, 3))
        extended = Structure.make({**st.s, w: st.spare()[0]}, st.h)
        expected = add_vars(core_abstraction(st, POOL, sid, BOUNDS), {w}, sid, POOL)
        assert core_abstraction(extended, POOL, sid, BOUNDS) == expected, f"add disagrees on {extended}"


@pytest.mark.slow
def test_removing_an_allocated_variable() -> None:
    rng = random.Random(17)
    checked = 0
    while checked < CASES:
        sid = FAMILIES[checked % len(FAMILIES)][0]
        st = _structure(rng, NAMES, rng.randint(1, 3))
        if st.s[u] not in st.dom():
            continue
        dropped = st.restrict([v, w])
        expected = rem_var(core_abstraction(st, POOL, sid, BOUNDS), u, sid, POOL)
        assert core_abstraction(dropped, POOL, sid, BOUNDS) == expected, f"rem disagrees on {dropped}"
        checked += 1


def _split(rng: random.Random) -> tuple[Structure, frozenset[Term], frozenset[Term], frozenset[int]] | None:
    """a structure, the free variables of its two parts and the cells of the first part"""
    st = _structure(rng, NAMES, rng.randint(2, 3))
    cells = sorted(st.dom())
    first = frozenset(rng.sample(cells, rng.randint(1, len(cells) - 1)))
    h1 = {ell: st.h[ell] for ell in first}
    h2 = {ell: st.h[ell] for ell in cells if ell not in first}
    fv1 = frozenset(t for t in NAMES if rng.random() < 0.7)
    fv2 = frozenset(NAMES) - fv1 | frozenset(t for t in fv1 if rng.random() < 0.5)
    if not fv1 or not fv2:
        return None
    loc1 = Structure.make({}, h1).loc()
    loc2 = Structure.make({}, h2).loc()
    store = st.s
    if not loc1 & loc2 <= {store[t] for t in fv1 & fv2}:
        return None
    if any(store[t] in loc1 for t in fv2 - fv1) or any(store[t] in loc2 for t in fv1 - fv2):
        return None
    return st, fv1, fv2, first


@pytest.mark.slow
def test_abstraction_of_a_disjoint_union_is_the_composition() -> None:
    rng = random.Random(18)
    checked = 0
    while checked < CASES:
        sid = FAMILIES[checked % len(FAMILIES)][0]
        split = _split(rng)
        if split is None:
            continue
        st, fv1, fv2, first = split
        store, heap = st.s, st.h
        st1 = Structure.make({t: store[t] for t in fv1}, {ell: heap[ell] for ell in first})
        st2 = Structure.make({t: store[t] for t in fv2}, {ell: heap[ell] for ell in heap if ell not in first})
        frontier = frozenset(t for t in fv1 & fv2 if store[t] in st.dom())
        left = add_vars(core_abstraction(st1, POOL, sid, BOUNDS), fv2 - fv1, sid, POOL)
        right = add_vars(core_abstraction(st2, POOL, sid, BOUNDS), fv1 - fv2, sid, POOL)
        composed = compose(left, right, frontier, sid, POOL)
        assert core_abstraction(st, POOL, sid, BOUNDS) == composed, f"composition disagrees on {st1} and {st2}"
        checked += 1


@pytest.mark.slow
def test_frontier_of_a_normal_model_is_named() -> None:
    rng = random.Random(19)
    heaps = _distinct_heaps(rng, pure=False)
    checked = 0
    while checked < CASES:
        sid, phi1 = next(heaps)
        makers = next(found for family, found in FAMILIES if family is sid)
        phi2 = _symbolic_heap(rng, makers, pure=False)
        if set(phi1.exists) & set(phi2.exists):
            phi2 = phi2.rename_bound({e: var("e2")})
        both = SymbolicHeap((*phi1.exists, *phi2.exists), (*phi1.atoms, *phi2.atoms))
        shared = phi1.free_vars() & phi2.free_vars()
        for st in enumerate_models(both, sid, BOUNDS, ModelFilter.NORMAL):
            store, heap = st.s, st.h
            named = {store[t] for t in shared}
            for size in range(len(heap) + 1):
                for first in combinations(sorted(heap), size):
                    h1 = {ell: heap[ell] for ell in first}
                    h2 = {ell: heap[ell] for ell in heap if ell not in h1}
                    st1, st2 = Structure.make(store, h1), Structure.make(store, h2)
                    if not (sat_symbolic_heap(st1, phi1, sid, BOUNDS) and sat_symbolic_heap(st2, phi2, sid, BOUNDS)):
                        continue
                    frontier = st1.loc() & st2.loc()
                    assert frontier <= named, f"frontier {sorted(frontier)} of {both} is not named in {st}"
                    checked += 1
