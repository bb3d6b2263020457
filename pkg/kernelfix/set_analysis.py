"""Vertex covers, colonies and dominions, with independently checked witnesses.

A set S is a colony when some independent set I has S inside N(I);
equivalently V minus S contains a maximal independent set. A set W is a
dominion when, for some vertex v outside W, an independent set avoiding
``N[v]`` has ``W & N(v)`` inside its neighbourhood.
"""

from dataclasses import dataclass
from typing import Any

import structlog

from .dynamics import (
    independent_configurations,
    is_independent,
    maximal_independent_sets_within,
)
from .graph_core import (
    BoundExceededError,
    Edge,
    Graph,
    VertexSet,
    WitnessError,
    neighborhood,
    vertices_of,
)

logger = structlog.get_logger()

COLONY_LIMIT = 25


@dataclass(frozen=True)
class ColonyWitness:
    """Independent set ``independent`` with S inside its neighbourhood.

    ``kernel`` is the maximal independent set avoiding S it was taken from.
    """

    independent: VertexSet
    kernel: VertexSet

    def to_json(self) -> dict[str, Any]:
        return {"kind": "colony", "I": vertices_of(self.independent)}


@dataclass(frozen=True)
class DominionWitness:
    """Vertex ``v`` outside W and an independent set avoiding ``N[v]`` covering ``W & N(v)``."""

    v: int
    independent: VertexSet

    def to_json(self) -> dict[str, Any]:
        return {"kind": "dominion", "v": self.v, "I": vertices_of(self.independent)}


def uncovered_edge(g: Graph, s: VertexSet) -> Edge | None:
    """First edge (in sorted order) with no endpoint in S."""
    g.check_set(s)
    for u, v in g.edges():
        if not (s >> u & 1 or s >> v & 1):
            return u, v
    return None


def is_vertex_cover(g: Graph, s: VertexSet) -> bool:
    return uncovered_edge(g, s) is None


def validate_colony_witness(g: Graph, s: VertexSet, witness: ColonyWitness) -> None:
    """Raise ``WitnessError`` unless the witness independently proves S a colony."""
    if not is_independent(g, witness.independent):
        raise WitnessError("Colony witness is not an independent set")
    if s & ~neighborhood(g, witness.independent):
        raise WitnessError("Colony witness does not dominate the target set")


def validate_dominion_witness(g: Graph, w: VertexSet, witness: DominionWitness) -> None:
    """Raise ``WitnessError`` unless the witness independently proves W a dominion."""
    v = witness.v
    if w >> v & 1:
        raise WitnessError(f"Dominion witness vertex {v} lies inside the set")
    if witness.independent & (g.adj[v] | 1 << v):
        raise WitnessError(f"Dominion witness set meets the closed neighbourhood of {v}")
    if not is_independent(g, witness.independent):
        raise WitnessError("Dominion witness is not an independent set")
    target = w & g.adj[v]
    if target & ~neighborhood(g, witness.independent):
        raise WitnessError("Dominion witness does not dominate W & N(v)")


def _check_bound(g: Graph, operation: str) -> None:
    if g.n > COLONY_LIMIT:
        raise BoundExceededError(operation, g.n, COLONY_LIMIT)


def is_colony(g: Graph, s: VertexSet) -> ColonyWitness | None:
    """Decide whether S is a colony of ``g``.

    Enumerates maximal independent sets of ``G[V - S]``; one that also
    dominates S is a maximal independent set of ``g`` avoiding S. The
    reported ``I`` keeps only its vertices adjacent to S. Among all such
    sets the one with the lexicographically least vertex list wins.
    """
    g.check_set(s)
    _check_bound(g, "is_colony")
    best: ColonyWitness | None = None
    best_key: list[int] | None = None
    for kernel in maximal_independent_sets_within(g, g.full_mask & ~s):
        if s & ~neighborhood(g, kernel):
            continue
        independent = kernel & neighborhood(g, s) if s else 0
        key = vertices_of(independent)
        if best_key is None or key < best_key:
            best = ColonyWitness(independent, kernel)
            best_key = key
    if best is not None:
        validate_colony_witness(g, s, best)
    return best


def is_colony_primal(g: Graph, s: VertexSet) -> bool:
    """Oracle form: search every independent set I for S inside N(I)."""
    g.check_set(s)
    _check_bound(g, "is_colony_primal")
    return any(not s & ~neighborhood(g, i) for i in independent_configurations(g))


def is_dominion(g: Graph, w: VertexSet) -> DominionWitness | None:
    """Witness that W is a dominion, or ``None`` for a non-dominion.

    For each ``v`` outside W (ascending) the independent set must avoid the
    closed neighbourhood of ``v``, so ``v`` and its unvisited neighbours stay
    0 under any word visiting W. This is searched in dual form: some maximal
    independent set of ``G - N[v]`` dominates ``W & N(v)``. The first ``v``
    that succeeds wins, with the lexicographically least vertex list for I.
    """
    g.check_set(w)
    _check_bound(g, "is_dominion")
    for v in range(g.n):
        if w >> v & 1:
            continue
        target = w & g.adj[v]
        candidates = g.full_mask & ~(g.adj[v] | 1 << v)
        best: DominionWitness | None = None
        best_key: list[int] | None = None
        for kernel in maximal_independent_sets_within(g, candidates):
            if target & ~neighborhood(g, kernel):
                continue
            independent = kernel & neighborhood(g, target) if target else 0
            key = vertices_of(independent)
            if best_key is None or key < best_key:
                best = DominionWitness(v, independent)
                best_key = key
        if best is not None:
            validate_dominion_witness(g, w, best)
            return best
    return None


def is_non_dominion(g: Graph, w: VertexSet) -> bool:
    return is_dominion(g, w) is None
