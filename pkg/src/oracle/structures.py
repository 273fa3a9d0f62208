from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from itertools import permutations
from typing import Any

from ..config import CONFIG
from ..formula.terms import Term
from ..sl_entail.Types import Heap, Location, Store


@dataclass(frozen=True, slots=True)
class Structure:
    """a store and a heap over integer locations, kept as sorted tuples so it can be hashed"""

    store: tuple[tuple[Term, Location], ...]
    heap: tuple[tuple[Location, tuple[Location, ...]], ...] = ()

    @classmethod
    def make(
        cls, store: Mapping[Term, Location], heap: Mapping[Location, Iterable[Location]] | None = None
    ) -> Structure:
        heap = heap or {}
        return cls(
            tuple(sorted(store.items(), key=lambda item: item[0].key)),
            tuple(sorted((src, tuple(dests)) for src, dests in heap.items())),
        )

    @property
    def s(self) -> Store:
        return dict(self.store)

    @property
    def h(self) -> Heap:
        return dict(self.heap)

    def dom(self) -> frozenset[Location]:
        return frozenset(src for src, _ in self.heap)

    def loc(self) -> frozenset[Location]:
        """every location the heap mentions, allocated or not"""
        return frozenset(ell for src, dests in self.heap for ell in (src, *dests))

    def image(self) -> frozenset[Location]:
        return frozenset(ell for _, ell in self.store)

    @property
    def cells(self) -> int:
        return len(self.heap)

    @property
    def injective(self) -> bool:
        return len(self.image()) == len(self.store)

    def constants_distinct(self) -> bool:
        values = [ell for t, ell in self.store if t.const]
        return len(values) == len(set(values))

    def spare(self, count: int = 1, avoid: Iterable[Location] = ()) -> list[Location]:
        """locations outside the heap, the store image and avoid"""
        used = self.loc() | self.image() | set(avoid)
        start = max(used, default=-1) + 1
        return list(range(start, start + count))

    def restrict(self, terms: Iterable[Term]) -> Structure:
        keep = set(terms)
        return Structure(tuple(item for item in self.store if item[0] in keep), self.heap)

    def as_dict(self) -> dict[str, Any]:
        return {
            "store": {str(t): f"l{ell}" for t, ell in self.store},
            "heap": {f"l{src}": [f"l{d}" for d in dests] for src, dests in self.heap},
        }

    def __str__(self) -> str:
        store = ", ".join(f"{t}↦l{ell}" for t, ell in self.store)
        heap = ", ".join(f"l{src}↦({', '.join(f'l{d}' for d in dests)})" for src, dests in self.heap)
        return f"({{{store}}}, {{{heap}}})"


@dataclass(frozen=True, slots=True)
class Bounds:
    heap_cells: int = CONFIG.oracle.heap_bound
    unfold_depth: int = CONFIG.oracle.unfold_depth
    universe: int = 0

    @classmethod
    def make(
        cls,
        heap_cells: int | None = None,
        unfold_depth: int | None = None,
        fields: int = 1,
        terms: int = 0,
    ) -> Bounds:
        cells = heap_cells if heap_cells is not None else CONFIG.oracle.heap_bound
        depth = unfold_depth if unfold_depth is not None else CONFIG.oracle.unfold_depth
        return cls(cells, depth, cells * (fields + 1) + terms + 2)

    def universe_for(self, fields: int, terms: int) -> int:
        return self.universe or self.heap_cells * (fields + 1) + terms + 2


def _relabel(
    store: Mapping[Term, Location], heap: Mapping[Location, tuple[Location, ...]], order: list[Location]
) -> Structure:
    names = {ell: i for i, ell in enumerate(order)}
    return Structure.make(
        {t: names[ell] for t, ell in store.items()},
        {names[src]: tuple(names[d] for d in dests) for src, dests in heap.items()},
    )


def canonical_structure(store: Mapping[Term, Location], heap: Mapping[Location, tuple[Location, ...]]) -> Structure:
    """the representative of the isomorphism class of (store, heap) under location renaming"""
    order: list[Location] = []
    for t in sorted(store, key=lambda t: t.key):
        if store[t] not in order:
            order.append(store[t])
    i = 0
    while i < len(order):
        for d in heap.get(order[i], ()):
            if d not in order:
                order.append(d)
        i += 1
    rest = sorted({ell for src, dests in heap.items() for ell in (src, *dests)} - set(order))
    if not rest:
        return _relabel(store, heap, order)
    if len(rest) > 7:
        # TODO: a reachability order for large unreachable garbage instead of brute force
        return _relabel(store, heap, order + rest)
    candidates = [_relabel(store, heap, order + list(perm)) for perm in permutations(rest)]
    return min(candidates, key=lambda st: (st.store, st.heap))
