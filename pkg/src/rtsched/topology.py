"""Interference graphs and enumeration of feasible per-slot activations.

Links are indexed ``0..n-1`` in code. Config files use 1-based link numbers;
the translation happens in :mod:`rtsched.config`.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import CapacityError, InputError

DEFAULT_ENUMERATION_LIMIT = 20

Activation = tuple[int, ...]

# 1-based edge list of the 10-link stand-in graph (a relabelled Petersen graph).
# Link 1 conflicts with exactly links 2, 4 and 7; every link has three
# conflicts and the graph is 3-colourable, so with T=3 slots each link can be
# given its own slot in every frame.
TEN_LINK_EDGES: tuple[tuple[int, int], ...] = (
    (1, 2), (1, 4), (1, 7), (2, 3), (2, 6), (3, 5), (3, 8), (4, 5),
    (4, 10), (5, 9), (6, 9), (6, 10), (7, 8), (7, 9), (8, 10),
)


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class InterferenceGraph:
    """Symmetric, irreflexive conflict relation over ``link_count`` links."""

    link_count: int
    conflicts: frozenset[tuple[int, int]]
    _adj: tuple[int, ...] = field(init=False, repr=False, compare=False)
    _cache: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        try:
            n = operator.index(self.link_count)
        except TypeError:
            raise InputError(f"link_count must be an integer, got {self.link_count!r}") from None
        if n < 1:
            raise InputError(f"link_count must be positive, got {n}")
        object.__setattr__(self, "link_count", n)
        norm = set()
        adj = [0] * n
        for i, j in self.conflicts:
            if not (0 <= i < n and 0 <= j < n):
                raise InputError(f"conflict ({i}, {j}) outside links 0..{n - 1}")
            if i == j:
                raise InputError(f"link {i} cannot conflict with itself")
            norm.add((min(i, j), max(i, j)))
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        object.__setattr__(self, "conflicts", frozenset(norm))
        object.__setattr__(self, "_adj", tuple(adj))
        object.__setattr__(self, "_cache", {})

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "InterferenceGraph":
        return cls(n, frozenset((int(i), int(j)) for i, j in edges))

    @classmethod
    def colocated(cls, n: int) -> "InterferenceGraph":
        """Complete conflict graph: at most one link per slot."""
        return cls(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))

    @classmethod
    def edgeless(cls, n: int) -> "InterferenceGraph":
        return cls(n, frozenset())

    @classmethod
    def path(cls, n: int) -> "InterferenceGraph":
        return cls(n, frozenset((i, i + 1) for i in range(n - 1)))

    @classmethod
    def ten_link(cls) -> "InterferenceGraph":
        """The documented 10-link stand-in used by the experiment configs."""
        return cls.from_edges(10, [(i - 1, j - 1) for i, j in TEN_LINK_EDGES])

    @property
    def is_colocated(self) -> bool:
        n = self.link_count
        return len(self.conflicts) == n * (n - 1) // 2

    def neighbor_mask(self, link: int) -> int:
        return self._adj[link]

    def conflict(self, i: int, j: int) -> bool:
        return bool(self._adj[i] >> j & 1)

    def maximal_within(self, candidates: int) -> tuple[Activation, ...]:
        """Maximal independent subsets of the links in bitmask ``candidates``.

        Sorted lexicographically; cached per graph. Empty mask gives ``((),)``.
        """
        hit = self._cache.get(candidates)
        if hit is not None:
            return hit
        out: list[int] = []
        _bron_kerbosch(0, candidates, 0, self._adj, out)
        result = tuple(sorted(tuple(_bits(m)) for m in out))
        self._cache[candidates] = result
        return result


def _bron_kerbosch(r: int, p: int, x: int, adj: tuple[int, ...], out: list[int]) -> None:
    # Maximal cliques of the complement graph restricted to p, with pivoting.
    if not p and not x:
        out.append(r)
        return
    px = p | x
    pivot = max(_bits(px), key=lambda u: (p & ~adj[u] & ~(1 << u)).bit_count())
    for v in list(_bits(p & (adj[pivot] | (1 << pivot)))):
        bit = 1 << v
        keep = ~adj[v] & ~bit
        _bron_kerbosch(r | bit, p & keep, x & keep, adj, out)
        p &= ~bit
        x |= bit


def _check_links(links: Iterable[int], g: InterferenceGraph) -> list[int]:
    links = list(links)
    for l in links:
        if not (0 <= l < g.link_count):
            raise InputError(f"link index {l} out of range 0..{g.link_count - 1}")
    return links


def is_independent(links: Iterable[int], g: InterferenceGraph) -> bool:
    """True iff no two of ``links`` conflict in ``g``."""
    links = _check_links(links, g)
    mask = 0
    for l in links:
        mask |= 1 << l
    return all(not (g.neighbor_mask(l) & mask) for l in links)


def enumerate_activations(g: InterferenceGraph,
                          limit: int = DEFAULT_ENUMERATION_LIMIT) -> tuple[Activation, ...]:
    """Every maximal independent set of ``g`` exactly once, lexicographic order."""
    if g.link_count > limit:
        raise CapacityError(
            f"{g.link_count} links exceeds enumeration limit {limit}; use a heuristic scheduler")
    return g.maximal_within((1 << g.link_count) - 1)
