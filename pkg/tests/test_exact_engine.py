"""Exact score laws: three independent routes plus conditional laws."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cardguess import (
    BudgetExceededError,
    DeckTooLargeError,
    Pmf,
    Profile,
    balanced_deck,
    brute_force_pmf,
    conditional_moments,
    conditional_pmf,
    decomposition_pmf,
    exact_pmf,
    harmonic,
    harmonic2,
    new_deck,
    optimal_value,
    tv_distance,
)

from .conftest import CATALOG


def assert_pmf_equal(p: Pmf, q: Pmf, tol: float = 1e-12):
    lo = min(p.offset, q.offset)
    hi = max(p.offset + p.probs.size, q.offset + q.probs.size)
    for k in range(lo, hi):
        assert abs(p[k] - q[k]) <= tol, f"pmfs differ at {k}: {p[k]} vs {q[k]}"


class TestProfile:
    def test_from_deck(self):
        prof = Profile.from_deck(new_deck((3, 3, 2)))
        assert prof.a == (0, 1, 2)
        assert prof.cards_left == 8
        assert prof.top_mult == 3
        assert prof.num_tied == 2


class TestExactPmf:
    def test_two_distinct(self):
        assert exact_pmf(new_deck((1, 1))).as_dict() == pytest.approx(
            {1: 0.5, 2: 0.5}, abs=1e-15
        )

    @pytest.mark.parametrize("m", [1, 2, 5])
    def test_single_type_is_certain(self, m):
        pmf = exact_pmf(new_deck((m,)))
        assert pmf.as_dict() == {m: 1.0}

    def test_pair_deck_frozen_values(self):
        # hand enumeration of the 6 arrangements gives {2: 1/3, 3: 1/2, 4: 1/6}
        pmf = exact_pmf(new_deck((2, 2)))
        assert pmf[2] == pytest.approx(1 / 3, abs=1e-12)
        assert pmf[3] == pytest.approx(1 / 2, abs=1e-12)
        assert pmf[4] == pytest.approx(1 / 6, abs=1e-12)
        assert pmf.mean() == pytest.approx(17 / 6, abs=1e-12)

    def test_budget_guard(self):
        with pytest.raises(BudgetExceededError) as err:
            exact_pmf(balanced_deck(100, 3))
        assert err.value.estimate > 0

    def test_budget_can_be_raised(self):
        pmf = exact_pmf(balanced_deck(40, 2), budget=80)
        assert abs(sum(pmf.probs) - 1) < 1e-12

    def test_normalized_and_supported_above_max_mult(self):
        for mults in CATALOG:
            deck = new_deck(mults)
            pmf = exact_pmf(deck)
            assert abs(sum(pmf.probs) - 1) < 1e-12
            assert pmf.offset >= deck.max_mult
            assert pmf.offset + pmf.probs.size - 1 <= deck.total


class TestBruteForce:
    def test_matches_exact_on_pair_deck(self):
        deck = new_deck((2, 2))
        assert_pmf_equal(brute_force_pmf(deck), exact_pmf(deck))

    def test_all_distinct_three(self):
        # independent trials with success 1, 1/2, 1/3
        pmf = brute_force_pmf(new_deck((1, 1, 1)))
        assert pmf.as_dict() == pytest.approx(
            {1: 1 / 3, 2: 1 / 2, 3: 1 / 6}, abs=1e-12
        )

    def test_example_deck_bounds(self):
        pmf = brute_force_pmf(new_deck((3, 3, 2)))
        assert abs(sum(pmf.probs) - 1) < 1e-12
        assert pmf.offset >= 3
        assert pmf.offset + pmf.probs.size - 1 <= 8

    def test_tie_rule_does_not_change_the_mixture(self, catalog_deck):
        assert_pmf_equal(
            brute_force_pmf(catalog_deck, "uniform"),
            brute_force_pmf(catalog_deck, "lowest"),
        )

    def test_size_guard(self):
        with pytest.raises(DeckTooLargeError):
            brute_force_pmf(balanced_deck(7, 2))


class TestOptimalValue:
    def test_pair_deck(self):
        assert optimal_value(new_deck((2, 2))) == pytest.approx(17 / 6, abs=1e-12)

    def test_two_distinct(self):
        assert optimal_value(new_deck((1, 1))) == pytest.approx(1.5, abs=1e-15)

    @pytest.mark.parametrize("m", [1, 3, 6])
    def test_single_type(self, m):
        assert optimal_value(new_deck((m,))) == pytest.approx(m, abs=1e-12)

    def test_greedy_attains_the_optimum(self, catalog_deck):
        assert exact_pmf(catalog_deck).mean() == pytest.approx(
            optimal_value(catalog_deck), abs=1e-12
        )


class TestConditionalPmf:
    def test_one_then_pair(self):
        assert conditional_pmf((1, 2)).as_dict() == pytest.approx(
            {2: 0.5, 3: 0.5}, abs=1e-15
        )

    def test_all_ones_point_mass(self):
        pmf = conditional_pmf((1,) * 5)
        assert pmf.as_dict() == {5: 1.0}

    def test_single_pair_level(self):
        assert conditional_pmf((2,)).as_dict() == pytest.approx(
            {1: 0.5, 2: 0.5}, abs=1e-15
        )

    def test_rejects_empty_or_nonpositive(self):
        with pytest.raises(ValueError):
            conditional_pmf(())
        with pytest.raises(ValueError):
            conditional_pmf((1, 0))


class TestConditionalMoments:
    def test_one_then_pair(self):
        m = conditional_moments((1, 2))
        assert m.mean == pytest.approx(2.5, abs=1e-15)
        assert m.variance == pytest.approx(0.25, abs=1e-15)

    def test_degenerate(self):
        m = conditional_moments((1,))
        assert (m.mean, m.variance) == (1.0, 0.0)

    def test_three_pair_levels(self):
        assert conditional_moments((2, 2, 2)).mean == pytest.approx(4.5, abs=1e-15)

    @given(
        st.lists(st.integers(min_value=1, max_value=40), min_size=1, max_size=4)
    )
    @settings(max_examples=60, deadline=None)
    def test_consistent_with_pmf_moments(self, sizes):
        pmf = conditional_pmf(sizes)
        m = conditional_moments(sizes)
        assert pmf.mean() == pytest.approx(m.mean, abs=1e-12)
        assert pmf.variance() == pytest.approx(m.variance, abs=1e-12)

    @given(
        st.lists(st.integers(min_value=1, max_value=40), min_size=1, max_size=4)
    )
    @settings(max_examples=60, deadline=None)
    def test_variance_below_mean_with_bounded_gap(self, sizes):
        m = conditional_moments(sizes)
        assert m.variance < m.mean
        assert m.mean - m.variance <= len(sizes) * math.pi**2 / 6 + 1e-12
        assert m.variance == pytest.approx(
            sum(harmonic(k) - harmonic2(k) for k in sizes), abs=1e-12
        )


class TestDecomposition:
    def test_pair_deck(self):
        deck = new_deck((2, 2))
        assert_pmf_equal(decomposition_pmf(deck), exact_pmf(deck))

    def test_all_distinct(self):
        deck = new_deck((1, 1, 1))
        assert_pmf_equal(decomposition_pmf(deck), brute_force_pmf(deck))

    def test_single_type(self):
        assert decomposition_pmf(new_deck((4,))).as_dict() == {4: 1.0}

    def test_three_routes_agree_everywhere(self, catalog_deck):
        """The cornerstone cross-check: profile DP, enumeration, and the
        tie-count mixture give the same law."""
        a = exact_pmf(catalog_deck)
        b = brute_force_pmf(catalog_deck)
        c = decomposition_pmf(catalog_deck)
        assert_pmf_equal(a, b)
        assert_pmf_equal(a, c)
        assert tv_distance(a, b) < 1e-12
