"""Kernel network semantics: updates, words, kernels and fixed points.

A configuration is an ``int`` whose bit ``v`` is the state of vertex ``v``.
A word is a tuple of vertex indices. Updating vertex ``v`` sets its state to
1 exactly when none of its neighbours is in state 1.
"""

from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import structlog

from .graph_core import (
    BoundExceededError,
    Graph,
    GraphError,
    VertexSet,
    iter_bits,
    mask_of,
)

logger = structlog.get_logger()

Configuration = int
Word = tuple[int, ...]

FIXED_POINT_SCAN_LIMIT = 30


@dataclass(frozen=True)
class Trajectory:
    """Configurations ``y^0 = x, y^1, ..., y^l`` visited while applying a word."""

    word: Word
    states: tuple[Configuration, ...]

    def __len__(self) -> int:
        return len(self.states)

    def is_local(self) -> bool:
        """Consecutive states differ at most at the letter applied between them."""
        for a, v in enumerate(self.word, start=1):
            if (self.states[a] ^ self.states[a - 1]) & ~(1 << v):
                return False
        return True


def visited(word: Sequence[int]) -> VertexSet:
    """The set [w] of vertices a word visits."""
    return mask_of(word)


def check_word(g: Graph, word: Sequence[int]) -> Word:
    for v in word:
        g.check_vertex(v)
    return tuple(word)


def check_config(g: Graph, x: Configuration) -> None:
    if x < 0 or x & ~g.full_mask:
        raise GraphError(f"Configuration {x} is wider than n={g.n}")


def run_word(adj: Sequence[int], x: Configuration, word: Sequence[int]) -> Configuration:
    """Apply ``word`` to ``x`` without validation; the shared hot loop."""
    for v in word:
        if adj[v] & x:
            x &= ~(1 << v)
        else:
            x |= 1 << v
    return x


def kernel_update(g: Graph, x: Configuration, v: int) -> Configuration:
    """Update vertex ``v``: it becomes 1 iff no neighbour is 1."""
    g.check_vertex(v)
    if g.adj[v] & x:
        return x & ~(1 << v)
    return x | 1 << v


def apply_word(
    g: Graph, x: Configuration, word: Sequence[int], *, record: bool = False
) -> tuple[Configuration, Trajectory | None]:
    """Apply the letters of ``word`` left to right.

    Returns the final configuration and, when ``record`` is set, the full
    trajectory of ``len(word) + 1`` states.
    """
    check_config(g, x)
    letters = check_word(g, word)
    if not record:
        return run_word(g.adj, x, letters), None
    states = [x]
    for v in letters:
        x = run_word(g.adj, x, (v,))
        states.append(x)
    return x, Trajectory(letters, tuple(states))


def parallel_update(g: Graph, x: Configuration) -> Configuration:
    """The simultaneous kernel map: every vertex updated from the same ``x``."""
    return mask_of(v for v in range(g.n) if not g.adj[v] & x)


def is_independent(g: Graph, x: Configuration) -> bool:
    return all(not g.adj[v] & x for v in iter_bits(x))


def is_kernel(g: Graph, x: Configuration) -> bool:
    """Independent and dominating, i.e. a maximal independent set."""
    for v in range(g.n):
        if x >> v & 1:
            if g.adj[v] & x:
                return False
        elif not g.adj[v] & x:
            return False
    return True


def _maximal_independent_sets(g: Graph, candidates: VertexSet) -> list[VertexSet]:
    """Maximal independent sets of ``G[candidates]`` (Bron-Kerbosch with pivot)."""
    compatible = [candidates & ~row & ~(1 << v) for v, row in enumerate(g.adj)]
    found: list[VertexSet] = []

    def expand(chosen: int, pool: int, excluded: int) -> None:
        if not pool:
            if not excluded:
                found.append(chosen)
            return
        pivot = max(
            iter_bits(pool | excluded),
            key=lambda u: (pool & compatible[u]).bit_count(),
        )
        for v in iter_bits(pool & ~compatible[pivot]):
            bit = 1 << v
            expand(chosen | bit, pool & compatible[v], excluded & compatible[v])
            pool &= ~bit
            excluded |= bit

    expand(0, candidates, 0)
    return sorted(found)


def maximal_independent_sets_within(g: Graph, candidates: VertexSet) -> list[VertexSet]:
    """Maximal independent sets of the subgraph induced by ``candidates``, ascending."""
    g.check_set(candidates)
    return _maximal_independent_sets(g, candidates)


def enumerate_kernels(g: Graph) -> list[Configuration]:
    """All kernels of ``g`` in increasing order."""
    return _maximal_independent_sets(g, g.full_mask)


def fixed_points(g: Graph) -> list[Configuration]:
    """Configurations with ``K(x) = x``, by a scan over all ``2^n`` configurations."""
    if g.n > FIXED_POINT_SCAN_LIMIT:
        raise BoundExceededError("fixed_points", g.n, FIXED_POINT_SCAN_LIMIT)
    return [x for x in range(1 << g.n) if parallel_update(g, x) == x]


def independent_configurations(g: Graph) -> Iterator[Configuration]:
    """All independent configurations, in increasing order."""
    found: list[Configuration] = []

    def grow(chosen: int, start: int, blocked: int) -> None:
        found.append(chosen)
        for v in range(start, g.n):
            if not blocked >> v & 1:
                grow(chosen | 1 << v, v + 1, blocked | g.adj[v])

    grow(0, 0, 0)
    yield from sorted(found)


def greedy_kernel(g: Graph, order: Sequence[int]) -> Configuration:
    """Greedy maximal independent set: ``order`` applied to the all-zero configuration."""
    return apply_word(g, 0, order)[0]


# text forms


def vertex_name(v: int, n: int) -> str:
    """Letter names a, b, c, ... when the graph has at most 26 vertices."""
    return chr(ord("a") + v) if n <= 26 else str(v)


def format_config(x: Configuration, n: int) -> str:
    """Binary string with vertex 0 leftmost."""
    return "".join("1" if x >> v & 1 else "0" for v in range(n))


def parse_config(text: str, n: int) -> Configuration:
    data = text.strip()
    if len(data) != n or any(ch not in "01" for ch in data):
        raise GraphError(f"Configuration {text!r} is not a {n}-character binary string")
    return mask_of(v for v, ch in enumerate(data) if ch == "1")


def format_word(word: Sequence[int]) -> str:
    return " ".join(str(v) for v in word)


def parse_word(text: str, n: int) -> Word:
    """Space-separated vertex indices; the empty string is the empty word."""
    try:
        word = tuple(int(tok) for tok in text.split())
    except ValueError as e:
        raise GraphError(f"Invalid word {text!r}: {e}") from e
    for v in word:
        if not 0 <= v < n:
            raise GraphError(f"Letter {v} out of range for n={n}")
    return word
