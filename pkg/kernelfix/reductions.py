"""Reduction gadgets Set Cover -> Colony -> Dominion, Non-Dominion -> Fixing Set -> Fixing Word.

Each constructor audits its output against the construction rules and every
reduction can be checked end to end on small instances by comparing the
source and target answers computed with the exact deciders.
"""

import itertools
import time
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from enum import Enum
from multiprocessing import Pool
from typing import Any

import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .dynamics import Word
from .graph_core import (
    BoundExceededError,
    Graph,
    GraphModel,
    ReductionError,
    VertexSet,
    build_graph,
    cycle,
    enumerate_graphs,
    graph_from_json,
    load_graph,
    mask_of,
    path,
    vertices_of,
    write_graph6,
)
from .set_analysis import is_colony, is_dominion, is_vertex_cover
from .word_analysis import doubled_word, fixes, fixing_set

logger = structlog.get_logger()

ORACLE_LIMIT = 25


class SetCoverInstance(BaseModel):
    """Set Cover instance, JSON ``{"n": int, "subsets": [[...], ...], "k": int}``.

    Elements are ``0..n-1``; the question is whether at most ``k`` of the
    subsets cover every element.
    """

    n: int = Field(ge=0)
    subsets: list[list[int]] = []
    k: int = Field(ge=0)

    @model_validator(mode="after")
    def _subsets_in_range(self) -> "SetCoverInstance":
        for j, subset in enumerate(self.subsets):
            for x in subset:
                if not 0 <= x < self.n:
                    raise ValueError(f"subset {j} holds element {x} outside 0..{self.n - 1}")
        return self

    @property
    def m(self) -> int:
        return len(self.subsets)


class GraphSetInstance(BaseModel):
    """A graph with a vertex set, JSON ``{"graph": <g6|shorthand|edge list>, "set": [...]}``."""

    model_config = ConfigDict(populate_by_name=True)

    graph: str | GraphModel
    vertices: list[int] = Field(default_factory=list, alias="set")

    @field_validator("vertices")
    @classmethod
    def _distinct(cls, value: list[int]) -> list[int]:
        if len(set(value)) != len(value):
            raise ValueError("set lists a vertex twice")
        return value

    def resolve(self) -> tuple[Graph, VertexSet]:
        if isinstance(self.graph, str):
            g = load_graph(self.graph)
        else:
            g = graph_from_json(self.graph.model_dump())
        s = mask_of(self.vertices)
        g.check_set(s)
        return g, s


@dataclass
class TargetedGraph:
    """Gadget output: a graph, a target vertex set and the role of each vertex."""

    graph: Graph
    target: VertexSet
    labels: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {
            "graph6": write_graph6(self.graph),
            "n": self.graph.n,
            "target": vertices_of(self.target),
            "labels": self.labels,
        }


class ReductionKind(Enum):
    SETCOVER_COLONY = "setcover-colony"
    COLONY_DOMINION = "colony-dominion"
    NONDOMINION_FIXINGSET = "nondominion-fixingset"
    FIXINGSET_WORD = "fixingset-word"


def _check_labels(labels: dict[str, int], n: int) -> None:
    if sorted(labels.values()) != list(range(n)):
        raise ReductionError("Gadget labels are not a bijection onto the vertices")


# Set Cover -> Colony


def set_cover_exists(inst: SetCoverInstance) -> tuple[int, ...] | None:
    """Indices of at most ``k`` subsets covering every element, fewest first."""
    universe = (1 << inst.n) - 1
    masks = [mask_of(subset) for subset in inst.subsets]
    for size in range(min(inst.k, inst.m) + 1):
        for chosen in itertools.combinations(range(inst.m), size):
            covered = 0
            for j in chosen:
                covered |= masks[j]
            if covered == universe:
                return chosen
    return None


def _q(inst: SetCoverInstance, j: int, level: int) -> int:
    return inst.n + j * inst.k + level


def setcover_to_colony(inst: SetCoverInstance) -> TargetedGraph:
    """Element vertices ``v_i`` then blocks ``Q_j`` of ``k`` vertices per subset.

    ``q_j^l`` is joined to ``v_i`` whenever element i lies in subset j, and
    the vertices of one level ``l`` across all blocks form a clique. The
    target is the set of element vertices.
    """
    n, m, k = inst.n, inst.m, inst.k
    edges: list[tuple[int, int]] = []
    for j, subset in enumerate(inst.subsets):
        for level in range(k):
            edges.extend((_q(inst, j, level), i) for i in sorted(set(subset)))
    for level in range(k):
        for j1, j2 in itertools.combinations(range(m), 2):
            edges.append((_q(inst, j1, level), _q(inst, j2, level)))
    g = build_graph(n + m * k, edges)
    labels = {f"v_{i + 1}": i for i in range(n)}
    for j in range(m):
        for level in range(k):
            labels[f"q_{j + 1}^{level + 1}"] = _q(inst, j, level)
    out = TargetedGraph(g, (1 << n) - 1, labels)
    audit_setcover_to_colony(inst, out)
    return out


def audit_setcover_to_colony(inst: SetCoverInstance, out: TargetedGraph) -> None:
    g = out.graph
    n, m, k = inst.n, inst.m, inst.k
    if g.n != n + m * k:
        raise ReductionError(f"Expected {n + m * k} vertices, got {g.n}")
    if out.target != (1 << n) - 1:
        raise ReductionError("Target must be exactly the element vertices")
    _check_labels(out.labels, g.n)
    for i1, i2 in itertools.combinations(range(n), 2):
        if g.has_edge(i1, i2):
            raise ReductionError(f"Element vertices {i1}, {i2} are adjacent")
    blocks = [(j, level, _q(inst, j, level)) for j in range(m) for level in range(k)]
    for j, level, q in blocks:
        subset = set(inst.subsets[j])
        for i in range(n):
            if g.has_edge(q, i) != (i in subset):
                raise ReductionError(f"Edge q_{j + 1}^{level + 1} v_{i + 1} does not match subset")
    for (j1, l1, q1), (j2, l2, q2) in itertools.combinations(blocks, 2):
        if g.has_edge(q1, q2) != (l1 == l2):
            raise ReductionError(f"Level rule broken between vertices {q1} and {q2}")


# Colony -> Dominion


def colony_to_dominion(g: Graph, s: VertexSet) -> TargetedGraph:
    """Add a pendant ``t'`` on every ``t`` outside S and a vertex ``v^`` joined to S.

    Layout: the original vertices, then the pendants in increasing order of
    ``t``, then ``v^``. The target is S together with the pendants.
    """
    g.check_set(s)
    outside = [t for t in range(g.n) if not s >> t & 1]
    hub = g.n + len(outside)
    edges: list[tuple[int, int]] = list(g.edges())
    edges.extend((t, g.n + i) for i, t in enumerate(outside))
    edges.extend((u, hub) for u in vertices_of(s))
    gadget = build_graph(hub + 1, edges)
    pendants = mask_of(g.n + i for i in range(len(outside)))
    labels = {f"v{u}": u for u in range(g.n)}
    labels.update({f"t'{t}": g.n + i for i, t in enumerate(outside)})
    labels["v^"] = hub
    out = TargetedGraph(gadget, s | pendants, labels)
    audit_colony_to_dominion(g, s, out)
    return out


def audit_colony_to_dominion(g: Graph, s: VertexSet, out: TargetedGraph) -> None:
    gadget = out.graph
    outside = [t for t in range(g.n) if not s >> t & 1]
    if gadget.n != g.n + len(outside) + 1:
        raise ReductionError(f"Expected {g.n + len(outside) + 1} vertices, got {gadget.n}")
    _check_labels(out.labels, gadget.n)
    for u in range(g.n):
        if gadget.adj[u] & g.full_mask != g.adj[u]:
            raise ReductionError(f"Original adjacency of vertex {u} changed")
    for i, t in enumerate(outside):
        pendant = g.n + i
        if gadget.adj[pendant] != 1 << t:
            raise ReductionError(f"Pendant copy of {t} is not a degree-one leaf on {t}")
    hub = gadget.n - 1
    if gadget.adj[hub] != s:
        raise ReductionError("N(v^) differs from S")
    if out.target != s | mask_of(range(g.n, hub)):
        raise ReductionError("Target must be S plus the pendant copies")


# Non-Dominion -> Fixing Set


def _block_members(g: Graph, s: VertexSet, t: int) -> list[int]:
    """Vertices copied into the block of ``t``: all but t and its neighbours outside S."""
    dropped = (g.adj[t] & ~s) | 1 << t
    return [u for u in range(g.n) if not dropped >> u & 1]


def nondominion_to_fixingset(g: Graph, s: VertexSet) -> TargetedGraph:
    """Disjoint union of one block ``G_t`` per vertex t outside S.

    ``G_t`` copies ``g`` without t and without t's neighbours outside S
    (members in increasing order), then adds ``t^`` joined to the copies of
    t's neighbours inside S. The target is every copy except the hatted
    vertices. With S = V the reduction is the identity.
    """
    g.check_set(s)
    outside = [t for t in range(g.n) if not s >> t & 1]
    if not outside:
        out = TargetedGraph(g, s, {f"v{u}": u for u in range(g.n)})
        audit_nondominion_to_fixingset(g, s, out)
        return out
    edges: list[tuple[int, int]] = []
    labels: dict[str, int] = {}
    target = 0
    base = 0
    for t in outside:
        members = _block_members(g, s, t)
        index = {u: base + i for i, u in enumerate(members)}
        hat = base + len(members)
        for u, v in g.edges():
            if u in index and v in index:
                edges.append((index[u], index[v]))
        edges.extend((index[u], hat) for u in vertices_of(g.adj[t] & s))
        for u in members:
            labels[f"{u}_{t}"] = index[u]
            target |= 1 << index[u]
        labels[f"{t}^"] = hat
        base = hat + 1
    out = TargetedGraph(build_graph(base, edges), target, labels)
    audit_nondominion_to_fixingset(g, s, out)
    return out


def audit_nondominion_to_fixingset(g: Graph, s: VertexSet, out: TargetedGraph) -> None:
    gadget = out.graph
    outside = [t for t in range(g.n) if not s >> t & 1]
    _check_labels(out.labels, gadget.n)
    if not outside:
        if gadget != g or out.target != s:
            raise ReductionError("S = V must reduce to itself")
        return
    expected_n = sum(len(_block_members(g, s, t)) + 1 for t in outside)
    if gadget.n != expected_n:
        raise ReductionError(f"Expected {expected_n} vertices, got {gadget.n}")
    if not is_vertex_cover(gadget, out.target):
        raise ReductionError("Target is not a vertex cover of the gadget")
    base = 0
    for t in outside:
        members = _block_members(g, s, t)
        hat = base + len(members)
        block_mask = ((1 << (len(members) + 1)) - 1) << base
        position = {u: base + i for i, u in enumerate(members)}
        for u in members:
            expected = mask_of(position[w] for w in vertices_of(g.adj[u]) if w in position)
            if g.has_edge(u, t):
                expected |= 1 << hat
            if gadget.adj[position[u]] != expected:
                raise ReductionError(f"Adjacency of copy {u}_{t} is wrong")
        if gadget.adj[hat] != mask_of(position[u] for u in vertices_of(g.adj[t] & s)):
            raise ReductionError(f"N({t}^) differs from the copies of N({t}) inside S")
        if gadget.adj[hat] & ~block_mask:
            raise ReductionError(f"Copy {t}^ leaks outside its block")
        if out.target >> hat & 1:
            raise ReductionError(f"Copy {t}^ must stay outside the target")
        base = hat + 1


# Fixing Set -> Fixing Word


def fixingset_to_fixingword(g: Graph, s: VertexSet) -> tuple[Graph, Word]:
    """``(G, ww)`` with ``w`` the increasing enumeration of S."""
    g.check_set(s)
    return g, doubled_word(s)


# preservation checks

Instance = SetCoverInstance | tuple[Graph, VertexSet]


@dataclass
class PreservationReport:
    """Source and target answers of one reduced instance, with their evidence."""

    kind: ReductionKind
    source_answer: bool
    target_answer: bool
    target_size: int
    source_witness: Any = None
    target_witness: Any = None

    @property
    def preserved(self) -> bool:
        return self.source_answer == self.target_answer

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "source": self.source_answer,
            "target": self.target_answer,
            "preserved": self.preserved,
            "target_n": self.target_size,
            "source_witness": _witness_json(self.source_witness),
            "target_witness": _witness_json(self.target_witness),
        }


def _witness_json(witness: Any) -> Any:
    if witness is None:
        return None
    if hasattr(witness, "to_json"):
        return witness.to_json()
    return list(witness)


def _check_oracle_bound(n: int) -> None:
    if n > ORACLE_LIMIT:
        raise BoundExceededError("verify_preservation", n, ORACLE_LIMIT)


def _graph_instance(kind: ReductionKind, instance: Instance) -> tuple[Graph, VertexSet]:
    if isinstance(instance, SetCoverInstance):
        raise ReductionError(f"{kind.value} expects a graph with a vertex set")
    return instance


def verify_preservation(kind: ReductionKind, instance: Instance) -> PreservationReport:
    """Reduce ``instance`` and decide both sides with the exact deciders."""
    if kind is ReductionKind.SETCOVER_COLONY:
        if not isinstance(instance, SetCoverInstance):
            raise ReductionError("setcover-colony expects a Set Cover instance")
        out = setcover_to_colony(instance)
        _check_oracle_bound(out.graph.n)
        cover = set_cover_exists(instance)
        colony = is_colony(out.graph, out.target)
        return PreservationReport(
            kind, cover is not None, colony is not None, out.graph.n, cover, colony
        )

    g, s = _graph_instance(kind, instance)
    if kind is ReductionKind.COLONY_DOMINION:
        out = colony_to_dominion(g, s)
        _check_oracle_bound(out.graph.n)
        colony = is_colony(g, s)
        dominion = is_dominion(out.graph, out.target)
        return PreservationReport(
            kind, colony is not None, dominion is not None, out.graph.n, colony, dominion
        )
    if kind is ReductionKind.NONDOMINION_FIXINGSET:
        out = nondominion_to_fixingset(g, s)
        _check_oracle_bound(out.graph.n)
        source = is_dominion(g, s)
        target = fixing_set(out.graph, out.target)
        return PreservationReport(
            kind, source is None, target.answer, out.graph.n, source, target.witness
        )
    _check_oracle_bound(g.n)
    source_verdict = fixing_set(g, s)
    _, word = fixingset_to_fixingword(g, s)
    target_verdict = fixes(g, word)
    return PreservationReport(
        kind,
        source_verdict.answer,
        target_verdict.answer,
        g.n,
        source_verdict.witness,
        target_verdict.witness,
    )


def setcover_instances(max_n: int, max_m: int, max_k: int) -> Iterator[SetCoverInstance]:
    """Every instance with up to ``max_n`` elements, ``max_m`` subsets and bound ``max_k``."""
    for n in range(max_n + 1):
        subsets = [vertices_of(mask) for mask in range(1 << n)]
        for m in range(max_m + 1):
            for chosen in itertools.product(subsets, repeat=m):
                for k in range(max_k + 1):
                    yield SetCoverInstance(n=n, subsets=list(chosen), k=k)


def graph_set_instances(max_n: int) -> Iterator[tuple[Graph, VertexSet]]:
    """Every isomorphism class with 1..max_n vertices paired with every vertex set."""
    for n in range(1, max_n + 1):
        for g in enumerate_graphs(n):
            for s in range(1 << n):
                yield g, s


def _verify_task(task: tuple[ReductionKind, Instance]) -> PreservationReport:
    return verify_preservation(*task)


@dataclass
class SweepReport:
    kind: ReductionKind
    total: int = 0
    failures: list[PreservationReport] = field(default_factory=list)

    @property
    def preserved(self) -> int:
        return self.total - len(self.failures)

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "total": self.total,
            "preserved": self.preserved,
            "failures": [f.to_json() for f in self.failures],
        }


def sweep_preservation(
    kind: ReductionKind, instances: Iterable[Instance], *, workers: int = 1
) -> SweepReport:
    """Run ``verify_preservation`` on every instance and collect the failures."""
    start_time = time.time()
    report = SweepReport(kind)
    tasks = ((kind, instance) for instance in instances)
    if workers <= 1:
        results: Iterable[PreservationReport] = map(_verify_task, tasks)
        for result in results:
            _record(report, result)
    else:
        with Pool(processes=workers) as pool:
            for result in pool.imap(_verify_task, tasks, chunksize=32):
                _record(report, result)
    log = logger.error if report.failures else logger.info
    log(
        "Preservation sweep finished",
        kind=kind.value,
        total=report.total,
        failures=len(report.failures),
        duration_ms=round((time.time() - start_time) * 1000, 2),
    )
    return report


def _record(report: SweepReport, result: PreservationReport) -> None:
    report.total += 1
    if not result.preserved:
        report.failures.append(result)


# instances drawn from the worked examples


def worked_setcover_instance() -> SetCoverInstance:
    """Four elements, subsets {}, {x1}, {x2, x3}, {x4}, k = 2: a no-instance."""
    return SetCoverInstance(n=4, subsets=[[], [0], [1, 2], [3]], k=2)


def worked_colony_instance() -> tuple[Graph, VertexSet]:
    """Path a-b-c with S = {a, b}: not a colony."""
    return path(3), mask_of([0, 1])


def worked_nondominion_instance() -> tuple[Graph, VertexSet]:
    """Pentagon a..e with S = {a, b}, T = {c, d, e}: S is a dominion."""
    return cycle(5), mask_of([0, 1])


def reduce_instance(kind: ReductionKind, instance: Instance) -> dict[str, Any]:
    """JSON form of the reduced instance for ``kind``."""
    if kind is ReductionKind.SETCOVER_COLONY:
        if not isinstance(instance, SetCoverInstance):
            raise ReductionError("setcover-colony expects a Set Cover instance")
        return setcover_to_colony(instance).to_json()
    g, s = _graph_instance(kind, instance)
    if kind is ReductionKind.COLONY_DOMINION:
        return colony_to_dominion(g, s).to_json()
    if kind is ReductionKind.NONDOMINION_FIXINGSET:
        return nondominion_to_fixingset(g, s).to_json()
    g, word = fixingset_to_fixingword(g, s)
    return {"graph6": write_graph6(g), "n": g.n, "word": list(word)}


def load_instance(kind: ReductionKind, obj: Any) -> Instance:
    """Validate the JSON input of a ``reduce`` run."""
    if kind is ReductionKind.SETCOVER_COLONY:
        return SetCoverInstance.model_validate(obj)
    return GraphSetInstance.model_validate(obj).resolve()
