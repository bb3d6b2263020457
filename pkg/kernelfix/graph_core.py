"""Graph representation, generators, composition and graph6 I/O.

Vertices are dense integers ``0..n-1``. Every set-like value (vertex sets,
configurations, neighbourhoods) is an ``int`` bit vector where bit ``v``
stands for vertex ``v``.
"""

import json
import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from functools import lru_cache
from typing import Any

import structlog
from pydantic import BaseModel, ValidationError, field_validator

logger = structlog.get_logger()

VertexSet = int
Edge = tuple[int, int]

GRAPH6_MAX_N = 62
ENUMERATE_MAX_N = 8


class KernelFixError(Exception):
    """Base exception for kernelfix errors."""

    pass


class GraphError(KernelFixError, ValueError):
    """Invalid graph, vertex, set, word or configuration input."""

    pass


class BoundExceededError(KernelFixError):
    """An exhaustive operation was called beyond its size bound."""

    def __init__(self, operation: str, size: int, limit: int):
        self.operation = operation
        self.size = size
        self.limit = limit
        super().__init__(f"{operation}: size {size} exceeds limit {limit}")


class WitnessError(KernelFixError):
    """A witness or constructed word failed independent re-validation."""

    pass


class ReductionError(KernelFixError):
    """A reduction gadget failed its structural audit, or the instance is invalid."""

    pass


def mask_of(vertices: Iterable[int]) -> VertexSet:
    """Bit vector of a collection of vertices."""
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def vertices_of(mask: VertexSet) -> list[int]:
    """Ascending list of the vertices in a bit vector."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def iter_bits(mask: VertexSet) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with per-vertex neighbour bit vectors."""

    n: int
    adj: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 0:
            raise GraphError(f"Vertex count must be non-negative, got {self.n}")
        if len(self.adj) != self.n:
            raise GraphError(
                f"Adjacency has {len(self.adj)} rows for {self.n} vertices"
            )
        full = (1 << self.n) - 1
        for v, row in enumerate(self.adj):
            if row & ~full:
                raise GraphError(f"Vertex {v} has a neighbour outside 0..{self.n - 1}")
            if row >> v & 1:
                raise GraphError(f"Self-loop at vertex {v}")
            for u in iter_bits(row):
                if not self.adj[u] >> v & 1:
                    raise GraphError(f"Asymmetric adjacency between {v} and {u}")

    @property
    def full_mask(self) -> VertexSet:
        return (1 << self.n) - 1

    def neighbors(self, v: int) -> VertexSet:
        return self.adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def edges(self) -> list[Edge]:
        """Edges as ``(u, v)`` pairs with ``u < v``, sorted."""
        return [
            (u, v) for v in range(self.n) for u in iter_bits(self.adj[v]) if u < v
        ]

    @property
    def edge_count(self) -> int:
        return sum(row.bit_count() for row in self.adj) // 2

    def check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise GraphError(f"Vertex {v} out of range for n={self.n}")

    def check_set(self, mask: VertexSet) -> None:
        if mask < 0 or mask & ~self.full_mask:
            raise GraphError(f"Vertex set {bin(mask)} is not a subset of 0..{self.n - 1}")


@dataclass(frozen=True)
class Composition:
    """A composed graph together with the vertex blocks of its parts."""

    graph: Graph
    blocks: tuple[tuple[int, ...], ...]


def build_graph(n: int, edges: Iterable[Sequence[int]]) -> Graph:
    """Build a graph on ``n`` vertices; duplicate pairs collapse."""
    if n < 0:
        raise GraphError(f"Vertex count must be non-negative, got {n}")
    adj = [0] * n
    for pair in edges:
        if len(pair) != 2:
            raise GraphError(f"Edge must be a pair, got {list(pair)}")
        u, v = int(pair[0]), int(pair[1])
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"Edge ({u}, {v}) out of range for n={n}")
        if u == v:
            raise GraphError(f"Self-loop at vertex {u}")
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    return Graph(n, tuple(adj))


def _require(name: str, n: int, minimum: int) -> None:
    if n < minimum:
        raise GraphError(f"{name} needs n >= {minimum}, got {n}")


def path(n: int) -> Graph:
    _require("path", n, 1)
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> Graph:
    _require("cycle", n, 3)
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n: int) -> Graph:
    _require("complete", n, 1)
    return build_graph(n, [(u, v) for v in range(n) for u in range(v)])


def empty(n: int) -> Graph:
    """Edgeless graph; ``n = 0`` is allowed and gives the null graph."""
    _require("empty", n, 0)
    return Graph(n, (0,) * n)


def star(n: int) -> Graph:
    """Star K_{1,n-1} with centre 0."""
    _require("star", n, 1)
    return build_graph(n, [(0, v) for v in range(1, n)])


def wheel(m: int) -> Graph:
    """Wheel on ``m`` vertices: rim ``0..m-2`` and hub ``m-1``.

    Equal vertex for vertex to ``compose(complete(2), [cycle(m-1), complete(1)])``.
    """
    _require("wheel", m, 4)
    return compose(complete(2), [cycle(m - 1), complete(1)]).graph


def compose(h: Graph, parts: Sequence[Graph]) -> Composition:
    """Substitute ``parts[v]`` for each vertex ``v`` of ``h``.

    Part ``v`` occupies a contiguous block of vertices, in part order. Edges
    of ``h`` become complete bipartite joins between the corresponding blocks.
    """
    if len(parts) != h.n:
        raise GraphError(f"compose needs {h.n} parts, got {len(parts)}")
    offsets = []
    total = 0
    for part in parts:
        offsets.append(total)
        total += part.n
    block_masks = [((1 << part.n) - 1) << off for part, off in zip(parts, offsets)]
    adj = [0] * total
    for i, (part, off) in enumerate(zip(parts, offsets)):
        outer = 0
        for j in iter_bits(h.adj[i]):
            outer |= block_masks[j]
        for v in range(part.n):
            adj[off + v] = (part.adj[v] << off) | outer
    blocks = tuple(
        tuple(range(off, off + part.n)) for part, off in zip(parts, offsets)
    )
    return Composition(Graph(total, tuple(adj)), blocks)


def open_twin(h: Graph, v: int) -> Graph:
    """Add a vertex with the same open neighbourhood as ``v``."""
    h.check_vertex(v)
    parts = [empty(2) if u == v else complete(1) for u in range(h.n)]
    return compose(h, parts).graph


def closed_twin(h: Graph, v: int) -> Graph:
    """Add a vertex with the same closed neighbourhood as ``v``."""
    h.check_vertex(v)
    parts = [complete(2) if u == v else complete(1) for u in range(h.n)]
    return compose(h, parts).graph


def heptagon_join(h: Graph) -> Composition:
    """``K2(C7, h)``: a heptagon fully joined to ``h``."""
    return compose(complete(2), [cycle(7), h])


def add_pendant_to_each(h: Graph) -> Graph:
    """Attach a pendant vertex ``n + v`` to every vertex ``v``."""
    n = h.n
    adj = [row | 1 << (n + v) for v, row in enumerate(h.adj)]
    adj.extend(1 << v for v in range(n))
    return Graph(2 * n, tuple(adj))


def neighborhood(g: Graph, s: VertexSet) -> VertexSet:
    """Open neighbourhood N(S): vertices adjacent to some vertex of S."""
    out = 0
    for v in iter_bits(s):
        out |= g.adj[v]
    return out


def is_dominating(g: Graph, s: VertexSet) -> bool:
    return (s | neighborhood(g, s)) == g.full_mask


def is_clique(g: Graph, s: VertexSet) -> bool:
    return all((g.adj[v] | 1 << v) & s == s for v in iter_bits(s))


def simplicial_vertices(g: Graph) -> VertexSet:
    """Vertices whose neighbourhood is a clique; isolated vertices included."""
    return mask_of(v for v in range(g.n) if is_clique(g, g.adj[v]))


def is_tethered(g: Graph, s: VertexSet) -> bool:
    """True iff every vertex of S is adjacent to every vertex of N(S) minus S."""
    g.check_set(s)
    boundary = neighborhood(g, s) & ~s
    return all(g.adj[v] & boundary == boundary for v in iter_bits(s))


def is_connected_subset(g: Graph, s: VertexSet) -> bool:
    """True iff ``G[S]`` is connected; the empty set is not."""
    if not s:
        return False
    seen = s & -s
    frontier = seen
    while frontier:
        grow = neighborhood(g, frontier) & s & ~seen
        seen |= grow
        frontier = grow
    return seen == s


def induced_subgraph(g: Graph, s: VertexSet) -> tuple[Graph, tuple[int, ...]]:
    """``G[S]`` and the map from its vertex indices to original indices."""
    g.check_set(s)
    index_map = tuple(vertices_of(s))
    position = {v: i for i, v in enumerate(index_map)}
    adj = []
    for v in index_map:
        adj.append(mask_of(position[u] for u in iter_bits(g.adj[v] & s)))
    return Graph(len(index_map), tuple(adj)), index_map


def remove_vertex(g: Graph, v: int) -> tuple[Graph, tuple[int, ...]]:
    """``G - v`` with its index map."""
    g.check_vertex(v)
    return induced_subgraph(g, g.full_mask & ~(1 << v))


def relabel(g: Graph, order: Sequence[int]) -> Graph:
    """Graph whose vertex ``i`` is vertex ``order[i]`` of ``g``."""
    position = {v: i for i, v in enumerate(order)}
    adj = [mask_of(position[u] for u in iter_bits(g.adj[v])) for v in order]
    return Graph(g.n, tuple(adj))


# graph6


def _upper_triangle_bits(g: Graph) -> Iterator[int]:
    for j in range(1, g.n):
        row = g.adj[j]
        for i in range(j):
            yield row >> i & 1


def write_graph6(g: Graph) -> str:
    """Encode ``g`` in the graph6 short form (n <= 62)."""
    if g.n > GRAPH6_MAX_N:
        raise GraphError(f"graph6 short form supports n <= {GRAPH6_MAX_N}, got {g.n}")
    chars = [chr(63 + g.n)]
    chunk = 0
    filled = 0
    for bit in _upper_triangle_bits(g):
        chunk = chunk << 1 | bit
        filled += 1
        if filled == 6:
            chars.append(chr(63 + chunk))
            chunk = 0
            filled = 0
    if filled:
        chars.append(chr(63 + (chunk << (6 - filled))))
    return "".join(chars)


def parse_graph6(text: str) -> Graph:
    """Decode a graph6 short-form string; an optional ``>>graph6<<`` header is skipped."""
    data = text.strip()
    if data.startswith(">>graph6<<"):
        data = data[len(">>graph6<<") :]
    if not data:
        raise GraphError("Empty graph6 string")
    for ch in data:
        if not 63 <= ord(ch) <= 126:
            raise GraphError(f"Invalid graph6 character {ch!r}")
    n = ord(data[0]) - 63
    if n > GRAPH6_MAX_N:
        raise GraphError("graph6 long-form length header is not supported")
    nbits = n * (n - 1) // 2
    expected = (nbits + 5) // 6
    body = data[1:]
    if len(body) != expected:
        raise GraphError(
            f"graph6 body has {len(body)} characters, expected {expected} for n={n}"
        )
    value = 0
    for ch in body:
        value = value << 6 | (ord(ch) - 63)
    pad = expected * 6 - nbits
    if value & ((1 << pad) - 1):
        raise GraphError("graph6 padding bits are not zero")
    value >>= pad
    adj = [0] * n
    position = nbits - 1
    for j in range(1, n):
        for i in range(j):
            if value >> position & 1:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
            position -= 1
    return Graph(n, tuple(adj))


# JSON edge-list form


class GraphModel(BaseModel):
    """JSON edge-list form ``{"n": int, "edges": [[u, v], ...]}``."""

    n: int
    edges: list[tuple[int, int]] = []

    @field_validator("n")
    @classmethod
    def _non_negative(cls, value: int) -> int:
        if value < 0:
            raise ValueError("n must be non-negative")
        return value


def graph_from_json(obj: Any) -> Graph:
    try:
        model = GraphModel.model_validate(obj)
    except ValidationError as e:
        raise GraphError(f"Invalid edge-list graph: {e}") from e
    return build_graph(model.n, model.edges)


def graph_to_json(g: Graph) -> dict[str, Any]:
    return {"n": g.n, "edges": [list(e) for e in g.edges()]}


_NAMED = re.compile(r"^([PCKESW])(\d+)$")
_FAMILIES = {
    "P": path,
    "C": cycle,
    "K": complete,
    "E": empty,
    "S": star,
    "W": wheel,
}


def load_graph(text: str) -> Graph:
    """Parse a graph given as graph6, JSON edge list or a family shorthand.

    Shorthands: ``P3`` path, ``C7`` cycle, ``K4`` complete, ``E5`` empty,
    ``S4`` star, ``W8`` wheel (the number is the vertex count).
    """
    data = text.strip()
    named = _NAMED.match(data)
    if named:
        return _FAMILIES[named.group(1)](int(named.group(2)))
    if data.startswith("{"):
        try:
            obj = json.loads(data)
        except json.JSONDecodeError as e:
            raise GraphError(f"Invalid JSON graph: {e}") from e
        return graph_from_json(obj)
    return parse_graph6(data)


# canonical forms and enumeration


def canonical_form(g: Graph) -> tuple[int, Graph]:
    """Minimal adjacency string over all vertex orderings, and the relabelled graph.

    The string is the upper triangle in column order (as in graph6) read as
    an integer. Orderings are grown one position at a time; only partial
    orderings whose string prefix is minimal survive each level, which
    yields the same minimum as scanning all ``n!`` orderings.
    """
    frontier: list[tuple[tuple[int, ...], int]] = [((), g.full_mask)]
    key = 0
    for level in range(g.n):
        best = -1
        survivors: list[tuple[tuple[int, ...], int]] = []
        for order, remaining in frontier:
            for v in iter_bits(remaining):
                row = g.adj[v]
                column = 0
                for u in order:
                    column = column << 1 | (row >> u & 1)
                if best < 0 or column < best:
                    best = column
                    survivors = [(order + (v,), remaining & ~(1 << v))]
                elif column == best:
                    survivors.append((order + (v,), remaining & ~(1 << v)))
        key = key << level | best
        frontier = survivors
    order = frontier[0][0] if frontier else ()
    return key, relabel(g, order)


def canonical_key(g: Graph) -> tuple[int, int]:
    """Hashable isomorphism-invariant key ``(n, canonical string)``."""
    return g.n, canonical_form(g)[0]


def are_isomorphic(g: Graph, h: Graph) -> bool:
    return g.n == h.n and g.edge_count == h.edge_count and canonical_key(g) == canonical_key(h)


@lru_cache(maxsize=None)
def _graph_classes(n: int) -> tuple[Graph, ...]:
    if n == 1:
        return (Graph(1, (0,)),)
    found: dict[int, Graph] = {}
    for parent in _graph_classes(n - 1):
        # every graph arises from a parent by adding a vertex of maximum degree
        max_degree = max((parent.degree(v) for v in range(parent.n)), default=0)
        for attach in range(1 << parent.n):
            if attach.bit_count() < max_degree:
                continue
            adj = [row | (attach >> v & 1) << parent.n for v, row in enumerate(parent.adj)]
            adj.append(attach)
            key, canonical = canonical_form(Graph(n, tuple(adj)))
            if key not in found:
                found[key] = canonical
    logger.debug("Enumerated graph classes", n=n, classes=len(found))
    return tuple(found[key] for key in sorted(found))


def enumerate_graphs(n: int) -> Iterator[Graph]:
    """One canonically labelled graph per isomorphism class on ``n`` vertices.

    Classes come in increasing order of their canonical string.
    """
    if not 1 <= n <= ENUMERATE_MAX_N:
        raise GraphError(f"enumerate_graphs supports 1 <= n <= {ENUMERATE_MAX_N}, got {n}")
    yield from _graph_classes(n)
