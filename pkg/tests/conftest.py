"""Shared fixtures: the small-deck catalog and an independent enumerator."""

from __future__ import annotations

from itertools import permutations

import numpy as np
import pytest

from cardguess import Arrangement, Deck, new_deck

# Every deck small enough for exhaustive cross-checks across the suite.
CATALOG = [
    (1, 1),
    (2, 2),
    (2, 1),
    (1, 1, 1),
    (2, 2, 2),
    (3, 3, 2),
    (1, 1, 1, 1),
]


@pytest.fixture(params=CATALOG, ids=lambda m: ",".join(map(str, m)))
def catalog_deck(request) -> Deck:
    return new_deck(request.param)


def all_arrangements(deck: Deck) -> list[Arrangement]:
    """Every distinct arrangement, via stdlib permutations (independent of
    the package's own enumeration)."""
    expanded = tuple(int(v) for v in deck.expanded())
    return [Arrangement(cards) for cards in sorted(set(permutations(expanded)))]


def arrangement_count(deck: Deck) -> int:
    import math

    count = math.factorial(deck.total)
    for m in deck.multiplicities:
        count //= math.factorial(m)
    return count
