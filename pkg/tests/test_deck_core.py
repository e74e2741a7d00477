"""Deck construction, shuffling, and greedy playout."""

from __future__ import annotations

import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cardguess import (
    Arrangement,
    GameOverError,
    InvalidDeckError,
    RngStream,
    balanced_deck,
    greedy_guess,
    new_deck,
    parse_deck_spec,
    play,
    uniform_arrangement,
)

from .conftest import all_arrangements, arrangement_count

small_decks = st.lists(st.integers(min_value=1, max_value=3), min_size=1, max_size=4).filter(
    lambda m: sum(m) <= 9
)


class TestDeck:
    def test_mixed_multiplicities(self):
        deck = new_deck((3, 3, 2))
        assert deck.n == 3
        assert deck.total == 8
        assert deck.max_mult == 3
        assert deck.eps == pytest.approx(2 / 3)
        assert deck.num_top_types == 2

    def test_single_type(self):
        deck = new_deck((5,))
        assert (deck.n, deck.total, deck.max_mult, deck.eps) == (1, 5, 5, 1.0)

    def test_all_distinct(self):
        deck = new_deck((1, 1, 1, 1))
        assert (deck.n, deck.total, deck.max_mult, deck.eps) == (4, 4, 1, 1.0)

    def test_empty_rejected(self):
        with pytest.raises(InvalidDeckError):
            new_deck(())

    @pytest.mark.parametrize("bad", [0, -1])
    def test_nonpositive_rejected(self, bad):
        with pytest.raises(InvalidDeckError, match="type 2"):
            new_deck((2, bad))

    def test_eps_times_n_is_the_top_type_count(self, catalog_deck):
        assert catalog_deck.eps * catalog_deck.n == pytest.approx(
            catalog_deck.num_top_types
        )
        assert catalog_deck.num_top_types >= 1


class TestParseDeckSpec:
    def test_explicit(self):
        assert parse_deck_spec("3,3,2").multiplicities == (3, 3, 2)

    def test_balanced(self):
        deck = parse_deck_spec("n=100,m=3")
        assert deck.n == 100 and deck.multiplicities == (3,) * 100

    def test_balanced_order_insensitive(self):
        assert parse_deck_spec("m=2,n=4") == balanced_deck(4, 2)

    @pytest.mark.parametrize("bad", ["", "1,x", "n=3", "n=3,m=0", "k=2,m=2", "0,2"])
    def test_bad_specs(self, bad):
        with pytest.raises(InvalidDeckError):
            parse_deck_spec(bad)


class TestRngStream:
    def test_same_seed_same_stream(self):
        a = RngStream(42)
        b = RngStream(42)
        assert list(a.random(5)) == list(b.random(5))

    def test_substream_reproducible_and_distinct(self):
        root = RngStream(7)
        x = root.substream(3).random(4)
        y = RngStream(7).substream(3).random(4)
        z = RngStream(7).substream(4).random(4)
        assert list(x) == list(y)
        assert list(x) != list(z)

    def test_substreams_independent_of_creation_order(self):
        r1 = RngStream(1)
        first = r1.substream(10).random()
        r2 = RngStream(1)
        _ = r2.substream(99).random()
        assert r2.substream(10).random() == first

    @pytest.mark.parametrize("bad", [-1, 2**64])
    def test_seed_range(self, bad):
        with pytest.raises(ValueError):
            RngStream(bad)


class TestUniformArrangement:
    def test_single_card(self):
        arr = uniform_arrangement(new_deck((1,)), RngStream(0))
        assert arr.cards == (1,)

    def test_multiset_conserved(self):
        deck = new_deck((3, 3, 2))
        arr = uniform_arrangement(deck, RngStream(5))
        assert Counter(arr.cards) == {1: 3, 2: 3, 3: 2}

    def test_deterministic(self):
        deck = new_deck((2, 2, 1))
        assert uniform_arrangement(deck, RngStream(9)) == uniform_arrangement(
            deck, RngStream(9)
        )

    def test_chi_square_uniformity(self):
        """All 6 arrangements of (2,2) equally likely: chi-square at 0.001."""
        deck = new_deck((2, 2))
        reps = 60000
        root = RngStream(2024)
        counts = Counter(
            uniform_arrangement(deck, root.substream(r)).cards for r in range(reps)
        )
        assert len(counts) == 6
        expected = reps / 6
        chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
        # critical value for 5 degrees of freedom at significance 0.001
        assert chi2 < 20.516

    @pytest.mark.parametrize("mults", [(2, 2), (1, 1, 1), (3, 1)])
    def test_small_decks_within_four_sigma(self, mults):
        deck = new_deck(mults)
        support = [a.cards for a in all_arrangements(deck)]
        k = len(support)
        assert k == arrangement_count(deck)
        reps = 100000
        root = RngStream(11)
        counts = Counter(
            uniform_arrangement(deck, root.substream(r)).cards for r in range(reps)
        )
        p = 1 / k
        se = math.sqrt(p * (1 - p) * reps)
        for cards in support:
            assert abs(counts[cards] - reps * p) < 4 * se


class TestGreedyGuess:
    def test_unique_max(self):
        assert greedy_guess({1: 1, 2: 2}, "lowest") == 2

    def test_lowest_rule_tie(self):
        assert greedy_guess({1: 2, 2: 2}, "lowest") == 1

    def test_uniform_rule_is_symmetric(self):
        rng = RngStream(3)
        picks = Counter(greedy_guess({1: 2, 2: 2}, "uniform", rng) for _ in range(100000))
        se = math.sqrt(0.25 * 100000)
        assert abs(picks[1] - 50000) < 3 * se

    def test_empty_is_game_over(self):
        with pytest.raises(GameOverError):
            greedy_guess({}, "lowest")

    def test_uniform_requires_rng(self):
        with pytest.raises(ValueError):
            greedy_guess({1: 1}, "uniform")


class TestPlay:
    def test_two_distinct_types(self):
        trace = play(Arrangement((1, 2)), "lowest")
        assert [s.correct for s in trace.steps] == [True, True]
        assert trace.score == 2

    def test_pair_deck_hand_simulated(self):
        # step 2 guesses the type with two copies left but reveals the other
        trace = play(Arrangement((1, 1, 2, 2)), "lowest")
        assert [s.correct for s in trace.steps] == [True, False, True, True]
        assert trace.score == 3

    def test_configuration_sequence_of_example_arrangement(self):
        trace = play(Arrangement((3, 2, 1, 3, 1, 2, 2, 1)), "lowest")
        assert [(s.top_mult, s.num_tied) for s in trace.steps] == [
            (3, 2), (3, 2), (3, 1), (2, 2), (2, 2), (2, 1), (1, 2), (1, 1),
        ]

    @given(small_decks, st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_playout_invariants(self, mults, seed):
        """Conservation, monotone configurations, and score bounds."""
        deck = new_deck(mults)
        rng = RngStream(seed)
        arr = uniform_arrangement(deck, rng)
        trace = play(arr, "uniform", rng)
        revealed = Counter(s.revealed for s in trace.steps)
        assert revealed == Counter(dict(enumerate(mults, start=1)))
        pairs = [(s.top_mult, s.num_tied) for s in trace.steps]
        assert pairs == sorted(pairs, reverse=True)
        assert deck.max_mult <= trace.score <= deck.total

    @given(small_decks, st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_correct_only_when_a_top_type_is_revealed(self, mults, seed):
        deck = new_deck(mults)
        rng = RngStream(seed)
        arr = uniform_arrangement(deck, rng)
        for i, step in enumerate(play(arr, "uniform", rng).steps):
            if step.correct:
                suffix = Counter(arr.cards[i:])
                assert suffix[step.revealed] == max(suffix.values())
