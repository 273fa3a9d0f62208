from collections.abc import Iterable, Iterator
from itertools import combinations, product
from time import time
from typing import Any, TypeVar

from loguru import logger

T = TypeVar("T")


def time_execution(func: Any) -> Any:
    """This decorator shows the execution time of the function object passed"""

    def wrap_func(*args: Any, **kwargs: Any) -> Any:
        t1 = time()
        result = func(*args, **kwargs)
        t2 = time()
        logger.debug(f"Function {func.__name__!r} executed in {(t2 - t1):.4f}s")
        return result

    wrap_func.__name__ = func.__name__
    wrap_func.__doc__ = func.__doc__
    return wrap_func


def set_partitions(items: list[T]) -> Iterator[list[list[T]]]:
    """enumerate all partitions of a list, blocks keep the input order"""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in set_partitions(rest):
        yield [[first], *partition]
        for i in range(len(partition)):
            yield [*partition[:i], [first, *partition[i]], *partition[i + 1 :]]


def partial_maps(domain: list[T], codomain: list[Any]) -> Iterator[dict[T, Any]]:
    """all partial maps from domain to codomain, by increasing domain size"""
    for size in range(len(domain) + 1):
        for keys in combinations(domain, size):
            for values in product(codomain, repeat=size):
                yield dict(zip(keys, values))


class UnionFind:
    """equivalence classes over hashable items"""

    def __init__(self, items: Iterable[Any] = ()) -> None:
        self._parent: dict[Any, Any] = {}
        for item in items:
            self._parent[item] = item

    def find(self, item: Any) -> Any:
        parent = self._parent.setdefault(item, item)
        if parent != item:
            parent = self._parent[item] = self.find(parent)
        return parent

    def union(self, a: Any, b: Any) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self._parent[ra] = rb

    def same(self, a: Any, b: Any) -> bool:
        return bool(self.find(a) == self.find(b))
