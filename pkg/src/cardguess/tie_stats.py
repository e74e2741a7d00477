"""Tie statistics of an arrangement, read from the bottom of the deck.

For an arrangement and a level ``j``, the bottom of the deck is scanned for
repeats: ``collision_count(a, j, t)`` counts the (j+1)-card same-type
subsets among the last ``t`` cards, and ``collision_free_depth(a, j)`` is
the deepest ``t`` at which there are none.  The per-level tie sizes tie the
bottom-up picture to forward play: level ``j`` closes with exactly
``tie_sizes[j-1]`` types holding ``j`` copies, and a greedy playout visits
precisely the configurations ``(j, s)`` with ``s <= tie_sizes[j-1]``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .deck_core import Arrangement, GameTrace, RngStream


@dataclass(frozen=True)
class TieCounts:
    """Per-level tie sizes and collision-free depths of one arrangement.

    ``tie_sizes[j-1]`` is the number of types occurring exactly ``j`` times
    among the last ``thresholds[j]`` cards; ``thresholds[j]`` is the largest
    suffix in which no type occurs more than ``j`` times.  ``thresholds``
    has one extra leading entry, ``thresholds[0] == 0``, and ends with the
    deck size.
    """

    tie_sizes: tuple[int, ...]
    thresholds: tuple[int, ...]

    @property
    def max_mult(self) -> int:
        return len(self.tie_sizes)


def suffix_counts(arrangement: Arrangement, t: int) -> Counter:
    """Occurrence count of each type among the last ``t`` cards."""
    n = len(arrangement)
    if not 0 <= t <= n:
        raise IndexError(f"suffix length {t} outside [0, {n}]")
    return Counter(arrangement.cards[n - t:]) if t else Counter()


def collision_count(arrangement: Arrangement, j: int, t: int) -> int:
    """Number of (j+1)-element subsets of the last ``t`` positions holding
    equal types; zero exactly when no type occurs more than ``j`` times there.
    """
    if j < 0:
        raise ValueError(f"level j must be >= 0, got {j}")
    counts = suffix_counts(arrangement, t)
    return sum(math.comb(c, j + 1) for c in counts.values())


def collision_free_depth(arrangement: Arrangement, j: int) -> int:
    """Largest ``t`` such that ``collision_count(arrangement, j, t) == 0``.

    Equals 0 at ``j = 0`` and the full deck size once ``j`` reaches the
    maximal multiplicity.
    """
    if j < 0:
        raise ValueError(f"level j must be >= 0, got {j}")
    seen: Counter = Counter()
    for pos, card in enumerate(arrangement.bottom_up(), start=1):
        seen[card] += 1
        if seen[card] > j:
            return pos - 1
    return len(arrangement)


def tie_counts(arrangement: Arrangement) -> TieCounts:
    """All tie sizes and depths in one bottom-up pass.

    Level ``j`` is resolved at the first bottom-up position where some type
    reaches ``j + 1`` copies: the cards strictly below form the deepest
    suffix free of (j+1)-repeats, and the types with exactly ``j`` copies
    there are the level's ties.  The top level never resolves and its tie
    size is the number of maximal-multiplicity types in the deck.
    """
    seen: Counter = Counter()
    exactly: Counter = Counter()  # copies -> number of types with that many so far
    sizes: list[int] = []
    depths: list[int] = [0]
    for pos, card in enumerate(arrangement.bottom_up(), start=1):
        c = seen[card] + 1
        seen[card] = c
        if c > len(sizes) + 1:
            # first type to reach c copies closes level c-1
            sizes.append(exactly[c - 1])
            depths.append(pos - 1)
        exactly[c - 1] -= 1
        exactly[c] += 1
    sizes.append(exactly[len(sizes) + 1])
    depths.append(len(arrangement))
    return TieCounts(tuple(sizes), tuple(depths))


def tie_runs(trace: GameTrace) -> set[tuple[int, int]]:
    """Distinct ``(top_mult, num_tied)`` configurations visited by a playout."""
    return {(s.top_mult, s.num_tied) for s in trace.steps}


def sample_decomposed_score(tc: TieCounts, rng: RngStream) -> int:
    """Draw a score as the independent-trial sum implied by the tie counts:
    one success-probability-``1/s`` trial for every level ``j`` and every
    ``s = 1..tie_sizes[j-1]``."""
    score = 0
    for size in tc.tie_sizes:
        if size < 1:
            raise ValueError("tie sizes must all be >= 1")
        u = rng.random(size)
        score += int(np.count_nonzero(u < 1.0 / np.arange(1, size + 1)))
    return score
