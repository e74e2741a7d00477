"""Exact score distributions: profile DP, brute-force enumeration, optimal
play, and conditional (given tie sizes) laws.

Three independent routes to the same law keep each other honest:

* :func:`exact_pmf` runs a dynamic program over multiplicity profiles
  (the count of types per remaining multiplicity is a sufficient statistic
  of the game state under a uniform shuffle).
* :func:`brute_force_pmf` enumerates every distinct arrangement and pushes
  exact per-step success probabilities through the greedy playout.
* :func:`decomposition_pmf` mixes the conditional independent-trial law
  over the arrangement-induced tie counts.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .deck_core import Arrangement, Deck, TieRule
from .stats_math import Pmf, bernoulli_sum_pmf, harmonic, harmonic2
from .tie_stats import tie_counts

DEFAULT_DP_BUDGET = 64  # exact_pmf guard: n * max_mult must not exceed this
BRUTE_FORCE_LIMIT = 12  # enumeration guard: total cards


class BudgetExceededError(RuntimeError):
    """Profile state space too large for the configured budget."""

    def __init__(self, message: str, estimate: int):
        super().__init__(message)
        self.estimate = estimate


class DeckTooLargeError(ValueError):
    """Deck exceeds the brute-force enumeration guard."""


@dataclass(frozen=True)
class Profile:
    """Game state as counts by multiplicity: ``a[j-1]`` types hold ``j`` cards."""

    a: tuple[int, ...]

    @classmethod
    def from_deck(cls, deck: Deck) -> "Profile":
        counts = [0] * deck.max_mult
        for m in deck.multiplicities:
            counts[m - 1] += 1
        return cls(tuple(counts))

    @property
    def cards_left(self) -> int:
        return sum((j + 1) * a for j, a in enumerate(self.a))

    @property
    def top_mult(self) -> int:
        """Maximal remaining multiplicity (0 when exhausted)."""
        for j in range(len(self.a), 0, -1):
            if self.a[j - 1]:
                return j
        return 0

    @property
    def num_tied(self) -> int:
        top = self.top_mult
        return self.a[top - 1] if top else 0


def _trimmed(a: list[int]) -> tuple[int, ...]:
    while a and a[-1] == 0:
        a.pop()
    return tuple(a)


def _after_reveal(profile: tuple[int, ...], j: int) -> tuple[int, ...]:
    """Profile after a card of a multiplicity-``j`` type is revealed."""
    lst = list(profile)
    lst[j - 1] -= 1
    if j >= 2:
        lst[j - 2] += 1
    return _trimmed(lst)


def exact_pmf(deck: Deck, *, budget: int = DEFAULT_DP_BUDGET) -> Pmf:
    """Exact greedy score distribution via the profile dynamic program.

    At a profile with top multiplicity ``J`` and ``R`` cards left, the
    guess names one specific top type, so the guess is correct with
    probability ``J/R`` whatever the tie-breaking rule; revealing any other
    type leaves the score unchanged.  States are memoized bottom-up, so
    the cost is linear in the number of reachable profiles.
    """
    if deck.n * deck.max_mult > budget:
        estimate = math.comb(deck.n + deck.max_mult, deck.max_mult)
        raise BudgetExceededError(
            f"deck needs roughly {estimate} profiles; "
            f"n*max_mult = {deck.n * deck.max_mult} exceeds budget {budget}",
            estimate,
        )
    start = Profile.from_deck(deck).a

    # reachable states, then solve in order of increasing cards-left
    reachable = {start}
    stack = [start]
    while stack:
        prof = stack.pop()
        seen_j = set()
        for j in range(len(prof), 0, -1):
            if prof[j - 1] and j not in seen_j:
                seen_j.add(j)
                child = _after_reveal(prof, j)
                if child not in reachable:
                    reachable.add(child)
                    stack.append(child)

    def cards_left(p: tuple[int, ...]) -> int:
        return sum((j + 1) * a for j, a in enumerate(p))

    pmfs: dict[tuple[int, ...], np.ndarray] = {(): np.array([1.0])}
    for prof in sorted(reachable - {()}, key=cards_left):
        big_j = len(prof)
        r = cards_left(prof)
        out = np.zeros(r + 1)
        top_child = pmfs[_after_reveal(prof, big_j)]
        out[1: top_child.size + 1] += (big_j / r) * top_child  # correct guess
        if prof[big_j - 1] > 1:
            out[: top_child.size] += (big_j * (prof[big_j - 1] - 1) / r) * top_child
        for j in range(1, big_j):
            if prof[j - 1]:
                child = pmfs[_after_reveal(prof, j)]
                out[: child.size] += (j * prof[j - 1] / r) * child
        pmfs[prof] = out
    return Pmf(0, pmfs[start], normalize=True).trim_zeros()


def _multiset_permutations(counts: list[int]) -> Iterator[tuple[int, ...]]:
    """All distinct orders of a multiset; ``counts[i]`` copies of label i+1."""
    total = sum(counts)
    seq: list[int] = []

    def rec() -> Iterator[tuple[int, ...]]:
        if len(seq) == total:
            yield tuple(seq)
            return
        for t in range(len(counts)):
            if counts[t]:
                counts[t] -= 1
                seq.append(t + 1)
                yield from rec()
                seq.pop()
                counts[t] += 1

    yield from rec()


def _arrangement_count(deck: Deck) -> int:
    count = math.factorial(deck.total)
    for m in deck.multiplicities:
        count //= math.factorial(m)
    return count


def _guard_enumeration(deck: Deck, limit: int) -> None:
    if deck.total > limit:
        raise DeckTooLargeError(
            f"deck has {deck.total} cards, enumeration is guarded at {limit}"
        )


def _greedy_success_probs(cards: Sequence[int], tie_rule: TieRule) -> list[float]:
    """Per-step probability that the greedy guess matches the known reveal."""
    remaining = Counter(cards)
    probs = []
    for revealed in cards:
        top = max(remaining.values())
        if tie_rule == "uniform":
            num_tied = sum(1 for c in remaining.values() if c == top)
            probs.append(1.0 / num_tied if remaining[revealed] == top else 0.0)
        else:
            lowest = min(t for t, c in remaining.items() if c == top)
            probs.append(1.0 if revealed == lowest else 0.0)
        remaining[revealed] -= 1
        if not remaining[revealed]:
            del remaining[revealed]
    return probs


def brute_force_pmf(
    deck: Deck, tie_rule: TieRule = "uniform", *, limit: int = BRUTE_FORCE_LIMIT
) -> Pmf:
    """Score distribution by full enumeration of arrangements.

    No sampling: each arrangement contributes the exact law of its greedy
    playout (a convolution of per-step success indicators), and the mixture
    is uniform over arrangements.  Independent of :func:`exact_pmf`.
    """
    _guard_enumeration(deck, limit)
    total = deck.total
    acc = np.zeros(total + 1)
    count = 0
    for cards in _multiset_permutations(list(deck.multiplicities)):
        probs = np.zeros(total + 1)
        probs[0] = 1.0
        for p in _greedy_success_probs(cards, tie_rule):
            if p:
                probs[1:] = probs[1:] * (1.0 - p) + probs[:-1] * p
                probs[0] *= 1.0 - p
        acc += probs
        count += 1
    return Pmf(0, acc / count).trim_zeros()


@lru_cache(maxsize=None)
def _optimal_from(state: tuple[int, ...]) -> float:
    """Best expected score from a multiset of remaining counts (sorted desc)."""
    if not state:
        return 0.0
    r = sum(state)
    classes = Counter(state)
    child: dict[int, float] = {}
    for c in classes:
        nxt = list(state)
        nxt.remove(c)
        if c > 1:
            nxt.append(c - 1)
        child[c] = _optimal_from(tuple(sorted(nxt, reverse=True)))
    best = 0.0
    for g in classes:
        ev = (g / r) * (1.0 + child[g])
        for c, a in classes.items():
            others = a - (1 if c == g else 0)
            if others:
                ev += others * (c / r) * child[c]
        best = max(best, ev)
    return best


def optimal_value(deck: Deck, *, limit: int = BRUTE_FORCE_LIMIT) -> float:
    """Expected score of the best possible strategy, by exhaustive DP over
    guesses; matches the greedy mean."""
    _guard_enumeration(deck, limit)
    return _optimal_from(tuple(sorted(deck.multiplicities, reverse=True)))


@dataclass(frozen=True)
class ConditionalMoments:
    """Mean and variance of the score given the tie sizes."""

    mean: float
    variance: float


def _check_tie_sizes(sizes: Sequence[int]) -> tuple[int, ...]:
    out = tuple(int(k) for k in sizes)
    if not out or any(k < 1 for k in out):
        raise ValueError(f"tie sizes must be positive integers, got {sizes!r}")
    return out


def conditional_pmf(tie_sizes: Sequence[int]) -> Pmf:
    """Exact score law given tie sizes: for each level ``j`` the trials
    ``s = 1..tie_sizes[j-1]`` succeed independently with probability 1/s."""
    sizes = _check_tie_sizes(tie_sizes)
    ps = (1.0 / s for k in sizes for s in range(1, k + 1))
    return bernoulli_sum_pmf(ps)


def conditional_moments(tie_sizes: Sequence[int]) -> ConditionalMoments:
    """Closed-form moments of :func:`conditional_pmf` via harmonic sums."""
    sizes = _check_tie_sizes(tie_sizes)
    mean = math.fsum(harmonic(k) for k in sizes)
    var = math.fsum(harmonic(k) - harmonic2(k) for k in sizes)
    return ConditionalMoments(mean, var)


def decomposition_pmf(deck: Deck, *, limit: int = BRUTE_FORCE_LIMIT) -> Pmf:
    """Score distribution as the tie-count mixture of conditional laws.

    Enumerates arrangements, extracts each one's tie sizes, and averages
    the conditional pmfs.  Agreement with :func:`exact_pmf` and
    :func:`brute_force_pmf` is the engine's cornerstone cross-check.
    """
    _guard_enumeration(deck, limit)
    total = deck.total
    acc = np.zeros(total + 1)
    count = 0
    cache: dict[tuple[int, ...], Pmf] = {}
    for cards in _multiset_permutations(list(deck.multiplicities)):
        sizes = tie_counts(Arrangement(cards)).tie_sizes
        pmf = cache.get(sizes)
        if pmf is None:
            pmf = cache[sizes] = conditional_pmf(sizes)
        acc[pmf.offset: pmf.offset + pmf.probs.size] += pmf.probs
        count += 1
    return Pmf(0, acc / count).trim_zeros()
