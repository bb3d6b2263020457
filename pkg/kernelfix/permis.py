"""Permis search, constructive permis routes and non-existence certificates.

A permis is a permutation of the vertices that fixes the kernel network.
"""

import itertools
import time
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from enum import Enum
from multiprocessing import Pool
from typing import Any

import structlog

from .dynamics import (
    Configuration,
    Word,
    enumerate_kernels,
    is_kernel,
    run_word,
)
from .graph_core import (
    BoundExceededError,
    Graph,
    GraphError,
    VertexSet,
    WitnessError,
    canonical_key,
    compose,
    cycle,
    enumerate_graphs,
    induced_subgraph,
    is_connected_subset,
    is_dominating,
    is_tethered,
    iter_bits,
    mask_of,
    simplicial_vertices,
    vertices_of,
    write_graph6,
)
from .word_analysis import fixes

logger = structlog.get_logger()

PERMIS_LIMIT = 10
TETHERED_LIMIT = 14
CENSUS_LIMIT = 7
ORIENTATION_BRUTEFORCE_EDGES = 20


class PermisStatus(Enum):
    EXISTS = "exists"
    NOT_EXISTS = "not_exists"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Certificate:
    """Evidence that no permis exists.

    ``kind`` is ``"exhaustive"`` (every permutation refuted) or
    ``"tethered"``; a tethered certificate names the set S and carries the
    verdict for ``G[S]``.
    """

    kind: str
    subset: VertexSet = 0
    inner: "PermisVerdict | None" = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind == "tethered":
            out["S"] = vertices_of(self.subset)
            out["inner"] = self.inner.to_json() if self.inner else None
        return out


@dataclass(frozen=True)
class PermisVerdict:
    status: PermisStatus
    word: Word | None = None
    certificate: Certificate | None = None
    tested: int = 0

    def to_json(self) -> dict[str, Any]:
        return {
            "answer": self.status.value,
            "permis": list(self.word) if self.word is not None else None,
            "certificate": self.certificate.to_json() if self.certificate else None,
        }


def _verify_permis(g: Graph, word: Sequence[int], route: str) -> Word:
    """Postcondition shared by every constructive route."""
    letters = tuple(word)
    if sorted(letters) != list(range(g.n)):
        raise WitnessError(f"{route} produced a word that is not a permutation")
    if not fixes(g, letters):
        raise WitnessError(f"{route} produced a permutation that does not fix K(G)")
    return letters


def is_permis(g: Graph, word: Sequence[int]) -> bool:
    return sorted(word) == list(range(g.n)) and bool(fixes(g, word))


def find_permis(g: Graph, *, limit: int = PERMIS_LIMIT) -> PermisVerdict:
    """Search all permutations in lexicographic order for a permis.

    Every refuted permutation leaves its least counterexample in a cache;
    later permutations replay the cache first (most recent hit first) and
    only fall back to the full ``2^n`` scan when no cached configuration
    refutes them. The cache never changes the answer, only the work.
    """
    if g.n > limit:
        logger.info("Permis search skipped", n=g.n, limit=limit)
        return PermisVerdict(PermisStatus.UNKNOWN)
    start_time = time.time()
    adj = g.adj
    kernels = frozenset(enumerate_kernels(g))
    configs = range(1 << g.n)
    cache: list[Configuration] = []
    tested = 0
    for word in itertools.permutations(range(g.n)):
        tested += 1
        refuted = False
        for i, x in enumerate(cache):
            if run_word(adj, x, word) not in kernels:
                if i:
                    cache.insert(0, cache.pop(i))
                refuted = True
                break
        if refuted:
            continue
        for x in configs:
            if run_word(adj, x, word) not in kernels:
                cache.insert(0, x)
                refuted = True
                break
        if not refuted:
            logger.info(
                "Permis found",
                n=g.n,
                tested=tested,
                cache_size=len(cache),
                duration_ms=round((time.time() - start_time) * 1000, 2),
            )
            return PermisVerdict(PermisStatus.EXISTS, word, tested=tested)
    logger.info(
        "No permis exists",
        n=g.n,
        tested=tested,
        cache_size=len(cache),
        duration_ms=round((time.time() - start_time) * 1000, 2),
    )
    return PermisVerdict(
        PermisStatus.NOT_EXISTS, certificate=Certificate("exhaustive"), tested=tested
    )


# comparability route

Arc = tuple[int, int]


def _is_transitive(g: Graph, arcs: set[Arc]) -> bool:
    out: dict[int, set[int]] = {v: set() for v in range(g.n)}
    for a, b in arcs:
        out[a].add(b)
    return all(c in out[a] for a, b in arcs for c in out[b])


def transitive_orientation(g: Graph) -> set[Arc] | None:
    """Transitive orientation by implication-class decomposition, or ``None``.

    Repeatedly orients the implication class of the least remaining edge
    within the graph of remaining edges, using the forcing rule: an arc
    ``a -> b`` forces ``a -> c`` when ``ac`` remains and ``bc`` does not,
    and ``c -> b`` when ``cb`` remains and ``ac`` does not. A class that
    forces both directions of an edge means no transitive orientation.
    """
    remaining = {frozenset(e) for e in g.edges()}
    orientation: set[Arc] = set()
    while remaining:
        u, v = min(tuple(sorted(e)) for e in remaining)
        implied: set[Arc] = {(u, v)}
        stack: list[Arc] = [(u, v)]
        while stack:
            a, b = stack.pop()
            for c in range(g.n):
                if c in (a, b):
                    continue
                forced = []
                if frozenset((a, c)) in remaining and frozenset((b, c)) not in remaining:
                    forced.append((a, c))
                if frozenset((c, b)) in remaining and frozenset((a, c)) not in remaining:
                    forced.append((c, b))
                for arc in forced:
                    if arc not in implied:
                        implied.add(arc)
                        stack.append(arc)
        if any((b, a) in implied for a, b in implied):
            return None
        orientation |= implied
        remaining -= {frozenset(arc) for arc in implied}
    if not _is_transitive(g, orientation):
        raise WitnessError("Implication-class decomposition gave a non-transitive orientation")
    return orientation


def transitive_orientation_bruteforce(g: Graph) -> set[Arc] | None:
    """Backtracking over edge orientations (at most 20 edges).

    A partial orientation is abandoned as soon as it holds a path
    ``a -> b -> c`` with ``ac`` missing or oriented ``c -> a``.
    """
    edges = g.edges()
    if len(edges) > ORIENTATION_BRUTEFORCE_EDGES:
        raise BoundExceededError(
            "transitive_orientation_bruteforce", len(edges), ORIENTATION_BRUTEFORCE_EDGES
        )
    direction: dict[Arc, bool] = {}

    def oriented(a: int, b: int) -> bool:
        if a < b:
            return direction.get((a, b)) is True
        return direction.get((b, a)) is False

    def consistent(a: int, b: int) -> bool:
        for c in range(g.n):
            if c in (a, b):
                continue
            # a -> b -> c
            if oriented(b, c) and (not g.has_edge(a, c) or oriented(c, a)):
                return False
            # c -> a -> b
            if oriented(c, a) and (not g.has_edge(c, b) or oriented(b, c)):
                return False
        return True

    def assign(i: int) -> bool:
        if i == len(edges):
            return True
        u, v = edges[i]
        for forward in (True, False):
            direction[(u, v)] = forward
            a, b = (u, v) if forward else (v, u)
            if consistent(a, b) and assign(i + 1):
                return True
            del direction[(u, v)]
        return False

    if not assign(0):
        return None
    arcs = {(u, v) if forward else (v, u) for (u, v), forward in direction.items()}
    if not _is_transitive(g, arcs):
        raise WitnessError("Backtracking produced a non-transitive orientation")
    return arcs


def is_comparability(g: Graph) -> bool:
    return transitive_orientation(g) is not None


def linear_extension(n: int, arcs: set[Arc]) -> Word:
    """Topological order of a strict partial order, least vertex first among ties."""
    below = [0] * n
    for a, b in arcs:
        below[b] |= 1 << a
    placed = 0
    order: list[int] = []
    while len(order) < n:
        v = next(v for v in range(n) if not placed >> v & 1 and not below[v] & ~placed)
        order.append(v)
        placed |= 1 << v
    return tuple(order)


def comparability_permis(g: Graph) -> Word | None:
    """Permis listing the vertices from lowest to highest in a transitive orientation."""
    arcs = transitive_orientation(g)
    if arcs is None:
        return None
    return _verify_permis(g, linear_extension(g.n, arcs), "comparability_permis")


# simplicial route


def simplicial_kernel(g: Graph) -> VertexSet | None:
    """Maximal independent set made of simplicial vertices, when they dominate.

    Shrinks the simplicial vertices to a minimal dominating subset, then
    drops one of any two adjacent members (adjacent simplicial vertices are
    closed twins, so domination survives) until the subset is independent.
    """
    simplicial = simplicial_vertices(g)
    if not is_dominating(g, simplicial):
        return None
    chosen = simplicial

    def minimize(s: VertexSet) -> VertexSet:
        for v in vertices_of(s):
            if is_dominating(g, s & ~(1 << v)):
                s &= ~(1 << v)
        return s

    chosen = minimize(chosen)
    while True:
        clash = next(
            ((t, u) for t in iter_bits(chosen) for u in iter_bits(g.adj[t] & chosen) if t < u),
            None,
        )
        if clash is None:
            break
        t, u = clash
        if g.adj[t] | 1 << t != g.adj[u] | 1 << u:
            raise WitnessError(f"Adjacent simplicial vertices {t}, {u} are not closed twins")
        chosen = minimize(chosen & ~(1 << u))
    return chosen


def simplicial_permis(g: Graph) -> Word | None:
    """Permis visiting a maximal independent set of simplicial vertices last."""
    kernel = simplicial_kernel(g)
    if kernel is None:
        return None
    rest = [v for v in range(g.n) if not kernel >> v & 1]
    return _verify_permis(g, (*rest, *vertices_of(kernel)), "simplicial_permis")


# composition route


def composition_permis(
    h: Graph,
    parts: Sequence[Graph],
    part_permises: Sequence[Sequence[int]],
    h_permis: Sequence[int],
) -> Word:
    """Permis of ``compose(h, parts)`` from permises of ``h`` and every part.

    Walks ``h_permis`` and replaces each letter by the permis of the
    corresponding part, shifted into that part's block.
    """
    if len(parts) != h.n or len(part_permises) != h.n:
        raise GraphError(
            f"composition_permis needs {h.n} parts and permises, "
            f"got {len(parts)} and {len(part_permises)}"
        )
    if not is_permis(h, h_permis):
        raise GraphError("Outer word is not a verified permis")
    for i, (part, word) in enumerate(zip(parts, part_permises)):
        if not is_permis(part, word):
            raise GraphError(f"Word for part {i} is not a verified permis")
    composition = compose(h, parts)
    spliced: list[int] = []
    for b in h_permis:
        block = composition.blocks[b]
        spliced.extend(block[v] for v in part_permises[b])
    return _verify_permis(composition.graph, spliced, "composition_permis")


def construct_permis(g: Graph) -> tuple[str, Word] | None:
    """First constructive route that applies: comparability, then simplicial."""
    word = comparability_permis(g)
    if word is not None:
        return "comparability", word
    word = simplicial_permis(g)
    if word is not None:
        return "simplicial", word
    return None


# tethered certificates

# Only refutations are memoized: NOT_EXISTS holds for every labeling of a
# class, a found word only for the labeling it was searched on.
_no_permis_memo: dict[tuple[int, int], PermisVerdict] = {}


def _memoized_find_permis(g: Graph, *, limit: int = PERMIS_LIMIT) -> PermisVerdict:
    key = canonical_key(g)
    cached = _no_permis_memo.get(key)
    if cached is not None:
        return cached
    verdict = find_permis(g, limit=limit)
    if verdict.status is PermisStatus.NOT_EXISTS:
        _no_permis_memo[key] = verdict
    return verdict


def certify_no_permis_tethered(
    g: Graph, *, limit: int = TETHERED_LIMIT, permis_limit: int = PERMIS_LIMIT
) -> Certificate | None:
    """Find a tethered set S whose induced subgraph provably has no permis.

    Candidates are the connected proper vertex subsets, smallest first and
    then in increasing bit order. ``None`` only means no certificate was
    found; it does not show that a permis exists.
    """
    if g.n > limit:
        raise BoundExceededError("certify_no_permis_tethered", g.n, limit)
    start_time = time.time()
    candidates = sorted(
        (s for s in range(1, g.full_mask) if is_connected_subset(g, s)),
        key=lambda s: (s.bit_count(), s),
    )
    checked = 0
    for s in candidates:
        if s.bit_count() > permis_limit or not is_tethered(g, s):
            continue
        checked += 1
        inner_graph, _ = induced_subgraph(g, s)
        verdict = _memoized_find_permis(inner_graph, limit=permis_limit)
        if verdict.status is PermisStatus.NOT_EXISTS:
            logger.info(
                "Tethered certificate found",
                n=g.n,
                subset=vertices_of(s),
                checked=checked,
                duration_ms=round((time.time() - start_time) * 1000, 2),
            )
            return Certificate("tethered", s, verdict)
    logger.info("No tethered certificate", n=g.n, checked=checked)
    return None


def lift_counterexample(
    g: Graph, s: VertexSet, word: Sequence[int], inner_x: Configuration
) -> Configuration:
    """Counterexample for ``word`` on ``g`` from one for its S-subsequence on ``G[S]``.

    ``inner_x`` is a configuration of ``G[S]`` (in its own numbering) that the
    subsequence of ``word`` restricted to S fails on. The lifted
    configuration copies it onto S and is 0 elsewhere; with S tethered the
    boundary stays 0 throughout, so S evolves as in ``G[S]``.
    """
    inner_graph, index_map = induced_subgraph(g, s)
    x = mask_of(index_map[i] for i in iter_bits(inner_x))
    if is_kernel(g, run_word(g.adj, x, word)):
        raise WitnessError("Lifted configuration does not refute the permutation")
    return x


def tethered_refutation(
    g: Graph, certificate: Certificate, word: Sequence[int]
) -> Configuration:
    """Refute any permutation of ``g`` using a tethered certificate."""
    inner_graph, index_map = induced_subgraph(g, certificate.subset)
    position = {v: i for i, v in enumerate(index_map)}
    inner_word = [position[v] for v in word if v in position]
    verdict = fixes(inner_graph, inner_word)
    if verdict.answer or verdict.witness is None or not hasattr(verdict.witness, "x"):
        raise WitnessError("Certificate subgraph unexpectedly fixed by the restricted word")
    return lift_counterexample(g, certificate.subset, word, verdict.witness.x)


# odd holes


@dataclass(frozen=True)
class OddHolePattern:
    """One row of the odd-hole case table on a window ``f e d c b a``.

    Window positions are 0..5 for f, e, d, c, b, a. ``before`` lists pairs
    ``(p, q)`` meaning window vertex p is updated before q. ``ones`` and
    ``zeros`` fix part of the starting configuration; afterwards d, c and b
    are all 0, so c is not dominated.
    """

    name: str
    before: tuple[tuple[int, int], ...]
    ones: tuple[int, ...]
    zeros: tuple[int, ...] = ()
    undominated: tuple[int, ...] = (2, 3, 4)


F, E, D, C, B, A = range(6)

ODD_HOLE_PATTERNS: tuple[OddHolePattern, ...] = (
    OddHolePattern("d->c", ((D, C), (C, B), (B, A)), ones=(C, B, A)),
    OddHolePattern("c->d, d->e", ((D, E), (C, D), (C, B), (B, A)), ones=(E, D, B, A)),
    OddHolePattern(
        "c->d, e->d, f->e",
        ((F, E), (E, D), (C, D), (C, B), (B, A)),
        ones=(E, B, A),
        zeros=(D,),
    ),
    OddHolePattern(
        "c->d, e->d, e->f",
        ((E, F), (E, D), (C, D), (C, B), (B, A)),
        ones=(B, A),
        zeros=(F, D),
    ),
)


def _window(n: int, start: int) -> list[int]:
    """Cycle vertices of the window f..a starting at ``start``, going backwards."""
    return [(start - i) % n for i in range(6)]


def _matches(pattern: OddHolePattern, window: Sequence[int], rank: Sequence[int]) -> bool:
    return all(rank[window[p]] < rank[window[q]] for p, q in pattern.before)


def verify_odd_hole_pattern(pattern: OddHolePattern, n: int = 7) -> int:
    """Check a case-table row by simulation on ``cycle(n)``; returns cases checked.

    Every permutation of the cycle whose order on the window matches the
    row, and every completion of the unspecified starting states, must end
    with d, c and b all 0. Raises ``WitnessError`` on the first violation.
    """
    if n < 7 or n % 2 == 0:
        raise GraphError(f"Odd holes need odd n >= 7, got {n}")
    g = cycle(n)
    window = _window(n, 5)
    fixed = {window[p] for p in pattern.ones + pattern.zeros}
    base = mask_of(window[p] for p in pattern.ones)
    free = [v for v in range(n) if v not in fixed]
    expect_zero = mask_of(window[p] for p in pattern.undominated)
    checked = 0
    for word in itertools.permutations(range(n)):
        rank = [0] * n
        for i, v in enumerate(word):
            rank[v] = i
        if not _matches(pattern, window, rank):
            continue
        for bits in range(1 << len(free)):
            x = base | mask_of(v for i, v in enumerate(free) if bits >> i & 1)
            y = run_word(g.adj, x, word)
            if y & expect_zero:
                raise WitnessError(
                    f"Pattern {pattern.name} fails for word {word} from {x}"
                )
            checked += 1
    return checked


def odd_hole_counterexample(n: int, word: Sequence[int]) -> Configuration:
    """Configuration refuting the permutation ``word`` of ``cycle(n)``, n odd, n >= 7.

    An odd cycle always holds two consecutive arcs in the same direction;
    the matching case-table row gives the starting configuration (unset
    states 0).
    """
    if n < 7 or n % 2 == 0:
        raise GraphError(f"Odd holes need odd n >= 7, got {n}")
    if sorted(word) != list(range(n)):
        raise GraphError("Word is not a permutation")
    g = cycle(n)
    rank = [0] * n
    for i, v in enumerate(word):
        rank[v] = i
    for start in range(n):
        for mirrored in (False, True):
            if mirrored:
                window = [(start + i) % n for i in range(6)]
            else:
                window = _window(n, start)
            for pattern in ODD_HOLE_PATTERNS:
                if _matches(pattern, window, rank):
                    x = mask_of(window[p] for p in pattern.ones)
                    if is_kernel(g, run_word(g.adj, x, word)):
                        raise WitnessError(f"Pattern {pattern.name} did not refute {word}")
                    return x
    raise WitnessError("No case-table row matched; the permutation orientation alternates")


# census


@dataclass
class CensusEntry:
    n: int
    graph6: str
    permis: Word | None
    certificate: Certificate | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "graph6": self.graph6,
            "n": self.n,
            "permis": list(self.permis) if self.permis is not None else None,
            "certificate": self.certificate.to_json() if self.certificate else None,
        }


@dataclass
class CensusReport:
    max_n: int
    entries: list[CensusEntry] = field(default_factory=list)

    def without_permis(self) -> list[CensusEntry]:
        return [e for e in self.entries if e.permis is None]

    def counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for entry in self.entries:
            out[entry.n] = out.get(entry.n, 0) + 1
        return out


def census_entry(g: Graph) -> CensusEntry:
    """Census record for one isomorphism class."""
    verdict = _memoized_find_permis(g)
    if verdict.status is PermisStatus.EXISTS:
        if verdict.word is None or not is_permis(g, verdict.word):
            raise WitnessError(f"Census word for {write_graph6(g)} is not a permis")
        return CensusEntry(g.n, write_graph6(g), verdict.word)
    certificate = certify_no_permis_tethered(g) or verdict.certificate
    return CensusEntry(g.n, write_graph6(g), None, certificate)


def census_graphs(max_n: int) -> Iterator[Graph]:
    if not 1 <= max_n <= CENSUS_LIMIT:
        raise BoundExceededError("census", max_n, CENSUS_LIMIT)
    for k in range(1, max_n + 1):
        yield from enumerate_graphs(k)


def iter_census(
    max_n: int, *, workers: int = 1, after: str | None = None
) -> Iterator[CensusEntry]:
    """Census entries for every class with at most ``max_n`` vertices, in canonical order.

    ``after`` names the graph6 of the last class already processed; the
    census resumes with the class that follows it.
    """
    graphs = list(census_graphs(max_n))
    if after is not None:
        done = [write_graph6(g) for g in graphs]
        if after not in done:
            raise GraphError(f"Resume point {after!r} is not a census class")
        graphs = graphs[done.index(after) + 1 :]
    if workers <= 1:
        for g in graphs:
            yield census_entry(g)
        return
    with Pool(processes=workers) as pool:
        yield from pool.imap(census_entry, graphs, chunksize=8)


def census(max_n: int, *, workers: int = 1) -> CensusReport:
    start_time = time.time()
    report = CensusReport(max_n, list(iter_census(max_n, workers=workers)))
    logger.info(
        "Census complete",
        max_n=max_n,
        classes=len(report.entries),
        without_permis=len(report.without_permis()),
        duration_ms=round((time.time() - start_time) * 1000, 2),
    )
    return report
