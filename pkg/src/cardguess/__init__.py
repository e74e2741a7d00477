"""Exact and Monte Carlo analysis of the complete-feedback card guessing game.

A deck of ``n`` card types (type ``i`` with ``m_i`` copies) is shuffled
uniformly and dealt one card at a time; the player guesses each card before
it is revealed and is always told the truth.  This package simulates and
exactly computes the score of the greedy player, decomposes it through the
deck's bottom-up tie statistics, and stress-tests the normal and Poisson
approximations that govern large balanced decks.
"""

from .deck_core import (
    Arrangement,
    Deck,
    GameOverError,
    GameTrace,
    InvalidDeckError,
    RngStream,
    Step,
    balanced_deck,
    greedy_guess,
    new_deck,
    parse_deck_spec,
    play,
    uniform_arrangement,
)
from .exact_engine import (
    BudgetExceededError,
    ConditionalMoments,
    DeckTooLargeError,
    Profile,
    brute_force_pmf,
    conditional_moments,
    conditional_pmf,
    decomposition_pmf,
    exact_pmf,
    optimal_value,
)
from .harness import (
    ConditionalCltResult,
    ExperimentReport,
    PoissonReport,
    VarianceDecomposition,
    clt_experiment,
    conditional_clt_check,
    poisson_experiment,
    run_mc,
    variance_decomposition,
)
from .stats_math import (
    Pmf,
    asymptotic_mean,
    bernoulli_sum_pmf,
    expected_collisions,
    harmonic,
    harmonic2,
    kolmogorov_gap,
    normal_cdf,
    poisson_pmf,
    tv_distance,
)
from .tie_stats import (
    TieCounts,
    collision_count,
    collision_free_depth,
    sample_decomposed_score,
    suffix_counts,
    tie_counts,
    tie_runs,
)

__version__ = "0.1.0"

__all__ = [
    "Arrangement",
    "BudgetExceededError",
    "ConditionalCltResult",
    "ConditionalMoments",
    "Deck",
    "DeckTooLargeError",
    "ExperimentReport",
    "GameOverError",
    "GameTrace",
    "InvalidDeckError",
    "Pmf",
    "PoissonReport",
    "Profile",
    "RngStream",
    "Step",
    "TieCounts",
    "VarianceDecomposition",
    "asymptotic_mean",
    "balanced_deck",
    "bernoulli_sum_pmf",
    "brute_force_pmf",
    "clt_experiment",
    "collision_count",
    "collision_free_depth",
    "conditional_clt_check",
    "conditional_moments",
    "conditional_pmf",
    "decomposition_pmf",
    "exact_pmf",
    "expected_collisions",
    "greedy_guess",
    "harmonic",
    "harmonic2",
    "kolmogorov_gap",
    "new_deck",
    "normal_cdf",
    "optimal_value",
    "parse_deck_spec",
    "play",
    "poisson_experiment",
    "poisson_pmf",
    "run_mc",
    "sample_decomposed_score",
    "suffix_counts",
    "tie_counts",
    "tie_runs",
    "tv_distance",
    "uniform_arrangement",
    "variance_decomposition",
]
