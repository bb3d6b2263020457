"""Deciders for words that prefix, suffix or fix the kernel network.

Structural deciders (vertex cover, non-dominion) are the default; the
``*_semantic`` functions evaluate the definitions by brute force and are
kept as a separate verification path.
"""

import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum
from multiprocessing import Pool
from typing import Any

import structlog

from .dynamics import (
    Configuration,
    Word,
    check_word,
    enumerate_kernels,
    independent_configurations,
    is_independent,
    is_kernel,
    run_word,
    visited,
)
from .graph_core import (
    BoundExceededError,
    Graph,
    GraphError,
    VertexSet,
    WitnessError,
    mask_of,
    vertices_of,
)
from .set_analysis import (
    DominionWitness,
    is_dominion,
    is_vertex_cover,
    uncovered_edge,
)

logger = structlog.get_logger()

FIXES_LIMIT = 25
SHORTEST_WORD_LIMIT = 12
SHORTEST_WORD_BUDGET = 2_000_000


@dataclass(frozen=True)
class ConfigWitness:
    """A starting configuration the word fails on."""

    x: Configuration

    def to_json(self) -> dict[str, Any]:
        return {"kind": "config", "x": self.x}


@dataclass(frozen=True)
class EdgeWitness:
    """An edge the visited set misses, and the all-ones-on-the-edge configuration."""

    u: int
    v: int
    x: Configuration

    def to_json(self) -> dict[str, Any]:
        return {"kind": "edge", "edge": [self.u, self.v], "x": self.x}


@dataclass(frozen=True)
class SuffixWitness:
    """A dominion certificate together with its replayable independent start."""

    dominion: DominionWitness
    x: Configuration

    def to_json(self) -> dict[str, Any]:
        return {**self.dominion.to_json(), "x": self.x}


Witness = ConfigWitness | EdgeWitness | SuffixWitness | DominionWitness


@dataclass(frozen=True)
class WordVerdict:
    """Decision plus, on a negative answer, an independently checkable witness."""

    answer: bool
    witness: Witness | None = None

    def __post_init__(self) -> None:
        if not self.answer and self.witness is None:
            raise WitnessError("Negative verdict without a witness")

    def __bool__(self) -> bool:
        return self.answer

    def to_json(self) -> dict[str, Any]:
        return {
            "answer": self.answer,
            "witness": self.witness.to_json() if self.witness else None,
        }


def prefixes(g: Graph, word: Sequence[int]) -> WordVerdict:
    """``word`` prefixes K(G) iff the set it visits is a vertex cover."""
    letters = check_word(g, word)
    edge = uncovered_edge(g, visited(letters))
    if edge is None:
        return WordVerdict(True)
    u, v = edge
    return WordVerdict(False, EdgeWitness(u, v, 1 << u | 1 << v))


def prefixes_semantic(g: Graph, word: Sequence[int]) -> bool:
    """Every configuration is mapped to an independent one."""
    letters = check_word(g, word)
    _check_bound(g, "prefixes_semantic")
    return all(
        is_independent(g, run_word(g.adj, x, letters)) for x in range(1 << g.n)
    )


def suffixes(g: Graph, word: Sequence[int]) -> WordVerdict:
    """``word`` suffixes K(G) iff the set it visits is a non-dominion."""
    letters = check_word(g, word)
    witness = is_dominion(g, visited(letters))
    if witness is None:
        return WordVerdict(True)
    return WordVerdict(False, SuffixWitness(witness, witness.independent))


def suffixes_semantic(g: Graph, word: Sequence[int]) -> bool:
    """Every independent configuration is mapped to a kernel."""
    letters = check_word(g, word)
    _check_bound(g, "suffixes_semantic")
    return all(
        is_kernel(g, run_word(g.adj, y, letters)) for y in independent_configurations(g)
    )


def _check_bound(g: Graph, operation: str) -> None:
    if g.n > FIXES_LIMIT:
        raise BoundExceededError(operation, g.n, FIXES_LIMIT)


def _least_counterexample(
    adj: Sequence[int],
    word: Sequence[int],
    kernels: frozenset[int],
    start: int,
    stop: int,
) -> Configuration | None:
    for x in range(start, stop):
        if run_word(adj, x, word) not in kernels:
            return x
    return None


def _scan_chunk(
    args: tuple[tuple[int, ...], Word, frozenset[int], int, int],
) -> Configuration | None:
    return _least_counterexample(*args)


def fixes(g: Graph, word: Sequence[int], *, workers: int = 1) -> WordVerdict:
    """Decide whether ``word`` maps every configuration to a kernel.

    Configurations are scanned in increasing integer order (bit ``v`` is
    vertex ``v``), so the witness is the least counterexample. With
    ``workers > 1`` the range is split into contiguous chunks and the least
    per-chunk counterexample wins.
    """
    letters = check_word(g, word)
    _check_bound(g, "fixes")
    kernels = frozenset(enumerate_kernels(g))
    total = 1 << g.n
    if workers <= 1 or total < 4096:
        found = _least_counterexample(g.adj, letters, kernels, 0, total)
    else:
        step = -(-total // (workers * 4))
        chunks = [
            (g.adj, letters, kernels, start, min(start + step, total))
            for start in range(0, total, step)
        ]
        with Pool(processes=workers) as pool:
            hits = [hit for hit in pool.map(_scan_chunk, chunks) if hit is not None]
        found = min(hits) if hits else None
    if found is None:
        return WordVerdict(True)
    return WordVerdict(False, ConfigWitness(found))


def fixing_set(g: Graph, s: VertexSet) -> WordVerdict:
    """S is the visited set of some fixing word iff it is a vertex cover and a non-dominion."""
    g.check_set(s)
    edge = uncovered_edge(g, s)
    if edge is not None:
        u, v = edge
        return WordVerdict(False, EdgeWitness(u, v, 1 << u | 1 << v))
    witness = is_dominion(g, s)
    if witness is not None:
        return WordVerdict(False, witness)
    return WordVerdict(True)


def doubled_word(s: VertexSet) -> Word:
    """``ww`` for ``w`` the ascending enumeration of S."""
    omega = tuple(vertices_of(s))
    return omega + omega


def check_prefix_suffix_split(g: Graph, word: Sequence[int], a: int, b: int) -> bool:
    """Sufficient condition for ``word`` to fix K(G).

    ``w_1..w_a`` must prefix, ``w_b..w_l`` must suffix, and when ``a >= b``
    the overlap ``w_b..w_a`` must be independent (positions are 1-based;
    ``b = 0`` reads as ``b = 1``). When ``a < b`` the overlap is empty.
    """
    letters = check_word(g, word)
    length = len(letters)
    if not (0 <= a <= length and 0 <= b <= length):
        raise GraphError(f"Split indices ({a}, {b}) out of range for length {length}")
    start = max(b, 1)
    if not prefixes(g, letters[:a]):
        return False
    if not suffixes(g, letters[start - 1 :]):
        return False
    if a >= start:
        overlap = mask_of(letters[start - 1 : a])
        return is_independent(g, overlap)
    return True


def _commutes(g: Graph, u: int, v: int) -> bool:
    return u != v and not g.has_edge(u, v)


def normalize_word(g: Graph, word: Sequence[int]) -> Word:
    """Shorten and reorder ``word`` without changing the map it induces.

    Repeatedly (i) drops the second of two equal letters separated only by
    letters not adjacent to it, and (ii) swaps neighbouring letters that are
    not adjacent in ``g`` into ascending order, until neither applies.
    """
    letters = list(check_word(g, word))
    changed = True
    while changed:
        changed = False
        i = 1
        while i < len(letters):
            if _repeat_before(g, letters, i):
                del letters[i]
                changed = True
            else:
                i += 1
        for i in range(len(letters) - 1):
            u, v = letters[i], letters[i + 1]
            if u > v and _commutes(g, u, v):
                letters[i], letters[i + 1] = v, u
                changed = True
    return tuple(letters)


def _repeat_before(g: Graph, letters: Sequence[int], i: int) -> bool:
    """True if ``letters[i]`` repeats an earlier letter reachable past non-neighbours."""
    v = letters[i]
    for j in range(i - 1, -1, -1):
        if letters[j] == v:
            return True
        if g.has_edge(letters[j], v):
            return False
    return False


def _extends_normal(g: Graph, prefix: Sequence[int], v: int) -> bool:
    """Whether appending ``v`` to a normal-form ``prefix`` keeps it in normal form."""
    if prefix:
        last = prefix[-1]
        if last > v and _commutes(g, last, v):
            return False
    return not _repeat_before(g, [*prefix, v], len(prefix))


class _BudgetExhausted(Exception):
    pass


class SearchStatus(Enum):
    FOUND = "found"
    NONE = "none"
    UNKNOWN = "unknown"


@dataclass
class FixingWordSearch:
    """Outcome of a bounded shortest-fixing-word search."""

    status: SearchStatus
    bound: int
    word: Word | None = None
    explored: int = 0
    lengths_exhausted: list[int] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {
            "status": self.status.value,
            "bound": self.bound,
            "word": list(self.word) if self.word is not None else None,
            "length": len(self.word) if self.word is not None else None,
            "explored": self.explored,
        }


def shortest_fixing_word(
    g: Graph, max_len: int, *, budget: int = SHORTEST_WORD_BUDGET
) -> FixingWordSearch:
    """Iterative deepening over normal-form words of length ``0..max_len``.

    Returns FOUND with a minimum-length fixing word, NONE when every length
    up to ``max_len`` was exhausted, or UNKNOWN when the node ``budget`` ran
    out first.
    """
    if g.n > SHORTEST_WORD_LIMIT:
        raise BoundExceededError("shortest_fixing_word", g.n, SHORTEST_WORD_LIMIT)
    if max_len < 0 or max_len > 4 * max(g.n, 1):
        raise GraphError(f"max_len must lie in 0..{4 * max(g.n, 1)}, got {max_len}")

    start_time = time.time()
    kernels = frozenset(enumerate_kernels(g))
    configs = range(1 << g.n)
    set_ok: dict[int, bool] = {}
    result = FixingWordSearch(SearchStatus.NONE, max_len)

    def accepts(letters: list[int]) -> bool:
        s = mask_of(letters)
        if s not in set_ok:
            set_ok[s] = is_vertex_cover(g, s) and is_dominion(g, s) is None
        if not set_ok[s]:
            return False
        return all(run_word(g.adj, x, letters) in kernels for x in configs)

    def search(prefix: list[int], length: int) -> bool:
        result.explored += 1
        if result.explored > budget:
            raise _BudgetExhausted
        if len(prefix) == length:
            return accepts(prefix)
        for v in range(g.n):
            if _extends_normal(g, prefix, v):
                prefix.append(v)
                if search(prefix, length):
                    return True
                prefix.pop()
        return False

    try:
        for length in range(max_len + 1):
            prefix: list[int] = []
            if search(prefix, length):
                result.status = SearchStatus.FOUND
                result.word = tuple(prefix)
                break
            result.lengths_exhausted.append(length)
    except _BudgetExhausted:
        result.status = SearchStatus.UNKNOWN

    logger.info(
        "Shortest fixing word search finished",
        n=g.n,
        bound=max_len,
        status=result.status.value,
        length=len(result.word) if result.word is not None else None,
        explored=result.explored,
        duration_ms=round((time.time() - start_time) * 1000, 2),
    )
    return result

