"""Tests for prefix, suffix and fixing decisions on words."""

import itertools
import random

import pytest

from kernelfix.dynamics import apply_word, is_kernel, run_word
from kernelfix.graph_core import (
    BoundExceededError,
    Graph,
    GraphError,
    WitnessError,
    complete,
    cycle,
    empty,
    enumerate_graphs,
    path,
    vertices_of,
)
from kernelfix.set_analysis import DominionWitness
from kernelfix.word_analysis import (
    ConfigWitness,
    EdgeWitness,
    SearchStatus,
    SuffixWitness,
    WordVerdict,
    check_prefix_suffix_split,
    doubled_word,
    fixes,
    fixing_set,
    normalize_word,
    prefixes,
    prefixes_semantic,
    shortest_fixing_word,
    suffixes,
    suffixes_semantic,
)


class TestVerdict:
    """Test the verdict value type."""

    def test_negative_needs_witness(self) -> None:
        """Test that a negative answer without a witness is refused."""
        with pytest.raises(WitnessError, match="witness"):
            WordVerdict(False)

    def test_truthiness(self) -> None:
        """Test that verdicts behave as booleans."""
        assert WordVerdict(True)
        assert not WordVerdict(False, ConfigWitness(0))


class TestPrefixesAndSuffixes:
    """Test the structural deciders and their witnesses."""

    def test_prefix_needs_vertex_cover(self) -> None:
        """Test that an end of P3 alone misses the edge bc."""
        verdict = prefixes(path(3), (0,))
        assert not verdict
        assert verdict.witness == EdgeWitness(1, 2, 0b110)
        assert prefixes(path(3), (1,))

    def test_suffix_witness_replays(self) -> None:
        """Test that the suffix witness configuration is a real counterexample."""
        g = path(3)
        verdict = suffixes(g, (1,))
        assert not verdict
        assert verdict.witness == SuffixWitness(DominionWitness(0, 0b100), 0b100)
        assert not is_kernel(g, run_word(g.adj, 0b100, (1,)))

    def test_path_ends_suffix(self) -> None:
        """Test that visiting both ends of P3 suffixes."""
        assert suffixes(path(3), (0, 2))

    def test_triangle_single_letter_suffixes(self) -> None:
        """Test that one letter of a triangle suffixes."""
        assert suffixes(complete(3), (0,))
        assert suffixes_semantic(complete(3), (0,))

    @pytest.mark.slow
    def test_structural_matches_semantic(self) -> None:
        """Test both deciders against simulation for every set word up to five vertices."""
        for n in range(1, 6):
            for g in enumerate_graphs(n):
                for s in range(1 << n):
                    word = vertices_of(s)
                    assert bool(prefixes(g, word)) == prefixes_semantic(g, word)
                    assert bool(suffixes(g, word)) == suffixes_semantic(g, word)


class TestFixes:
    """Test the exhaustive fixing check."""

    def test_least_counterexample(self) -> None:
        """Test that abc on P3 fails first on 011."""
        verdict = fixes(path(3), (0, 1, 2))
        assert not verdict
        assert verdict.witness == ConfigWitness(0b110)
        y, _ = apply_word(path(3), 0b110, (0, 1, 2))
        assert not is_kernel(path(3), y)

    def test_acb_fixes_path(self) -> None:
        """Test that acb fixes P3."""
        assert fixes(path(3), (0, 2, 1))

    def test_parallel_scan_agrees(self) -> None:
        """Test that chunked scanning returns the same least counterexample."""
        g = cycle(13)
        word = tuple(range(13))
        assert fixes(g, word, workers=2) == fixes(g, word)

    def test_bound(self) -> None:
        """Test that the scan refuses graphs above the limit."""
        with pytest.raises(BoundExceededError):
            fixes(empty(26), ())


class TestFixingSets:
    """Test the fixing-set characterisation and doubled words."""

    def test_path_ends(self) -> None:
        """Test that {a, c} is a fixing set of P3."""
        assert fixing_set(path(3), 0b101)

    def test_centre_is_dominion(self) -> None:
        """Test that {b} covers P3 but is a dominion."""
        verdict = fixing_set(path(3), 0b010)
        assert verdict.witness == DominionWitness(0, 0b100)

    def test_uncovered(self) -> None:
        """Test that a set missing an edge reports it."""
        assert fixing_set(path(3), 0b001).witness == EdgeWitness(1, 2, 0b110)

    def test_doubled_word(self) -> None:
        """Test that the doubled word of a fixing set fixes."""
        word = doubled_word(0b101)
        assert word == (0, 2, 0, 2)
        assert fixes(path(3), word)

    def test_doubled_permutations_fix(self) -> None:
        """Test that every doubled permutation fixes graphs up to five vertices."""
        for n in range(1, 6):
            for g in enumerate_graphs(n):
                for omega in itertools.permutations(range(n)):
                    assert fixes(g, omega + omega)

    @pytest.mark.slow
    def test_fixing_set_matches_doubled_words(self) -> None:
        """Test that S is fixing iff every doubled ordering of S fixes, up to five vertices."""
        for n in range(1, 6):
            for g in enumerate_graphs(n):
                for s in range(1 << n):
                    expected = bool(fixing_set(g, s))
                    for omega in itertools.permutations(vertices_of(s)):
                        assert bool(fixes(g, omega + omega)) == expected


class TestPrefixSuffixSplit:
    """Test the sufficient split condition."""

    def test_overlapping_split(self) -> None:
        """Test acb on P3 with an independent overlap."""
        assert check_prefix_suffix_split(path(3), (0, 2, 1), 2, 1)
        assert check_prefix_suffix_split(path(3), (0, 2, 1), 2, 0)

    def test_suffix_dominion(self) -> None:
        """Test that a dominion suffix fails the condition."""
        assert not check_prefix_suffix_split(path(3), (0, 2, 1), 2, 2)

    def test_dependent_overlap(self) -> None:
        """Test that an overlap containing an edge fails."""
        assert not check_prefix_suffix_split(path(3), (0, 1, 2), 3, 1)

    def test_indices_out_of_range(self) -> None:
        """Test that split positions beyond the word are rejected."""
        with pytest.raises(GraphError):
            check_prefix_suffix_split(path(3), (0, 2, 1), 4, 1)

    @pytest.mark.slow
    def test_split_implies_fixes(self) -> None:
        """Test that every split passing the condition belongs to a fixing word."""
        rng = random.Random(7)
        for n in range(1, 6):
            for g in enumerate_graphs(n):
                words = [doubled_word(g.full_mask)] + [
                    tuple(rng.randrange(n) for _ in range(rng.randint(0, 2 * n)))
                    for _ in range(20)
                ]
                for word in words:
                    for a in range(len(word) + 1):
                        for b in range(len(word) + 1):
                            if check_prefix_suffix_split(g, word, a, b):
                                assert fixes(g, word)


class TestMonotoneExtension:
    """Test that prefixing and suffixing survive extending the word."""

    def test_extensions(self) -> None:
        """Test appending to a prefixing word and prepending to a suffixing one."""
        rng = random.Random(11)
        for n in range(1, 5):
            for g in enumerate_graphs(n):
                for s in range(1 << n):
                    word = tuple(vertices_of(s))
                    is_prefix = bool(prefixes(g, word))
                    is_suffix = bool(suffixes(g, word))
                    for _ in range(5):
                        omega = tuple(rng.randrange(n) for _ in range(rng.randint(1, n)))
                        if is_prefix:
                            assert prefixes(g, word + omega)
                        if is_suffix:
                            assert suffixes(g, omega + word)


class TestNormalForm:
    """Test word normalisation."""

    @pytest.mark.parametrize(
        "word,expected",
        [
            ((2, 0), (0, 2)),
            ((0, 0), (0,)),
            ((0, 1, 0), (0, 1, 0)),
            ((0, 2, 0), (0, 2)),
        ],
    )
    def test_rewrites(self, word: tuple[int, ...], expected: tuple[int, ...]) -> None:
        """Test commuting swaps and repeat removal on P3."""
        assert normalize_word(path(3), word) == expected

    def test_preserves_map(self) -> None:
        """Test that normalised words induce the same map on P4."""
        g = path(4)
        for length in range(4):
            for word in itertools.product(range(4), repeat=length):
                normal = normalize_word(g, word)
                for x in range(16):
                    assert run_word(g.adj, x, word) == run_word(g.adj, x, normal)


class TestShortestFixingWord:
    """Test the bounded search for a shortest fixing word."""

    @pytest.mark.parametrize(
        "g,expected",
        [(path(3), (0, 2)), (complete(2), (0,)), (empty(1), (0,))],
    )
    def test_found(self, g: Graph, expected: tuple[int, ...]) -> None:
        """Test minimum-length fixing words of tiny graphs."""
        result = shortest_fixing_word(g, 6)
        assert result.status is SearchStatus.FOUND
        assert result.word == expected
        assert result.lengths_exhausted == list(range(len(expected)))

    def test_none_within_bound(self) -> None:
        """Test that a bound below the answer exhausts every length."""
        result = shortest_fixing_word(path(3), 1)
        assert result.status is SearchStatus.NONE
        assert result.lengths_exhausted == [0, 1]

    def test_budget_gives_unknown(self) -> None:
        """Test that running out of budget is reported as unknown."""
        result = shortest_fixing_word(cycle(5), 20, budget=5)
        assert result.status is SearchStatus.UNKNOWN
        assert result.word is None

    def test_bounds(self) -> None:
        """Test the size and length limits."""
        with pytest.raises(GraphError):
            shortest_fixing_word(path(3), 13)
        with pytest.raises(BoundExceededError):
            shortest_fixing_word(empty(13), 1)
