"""Deck model, uniform shuffling, and the greedy complete-feedback game.

A deck holds ``n`` card types, type ``i`` occurring ``multiplicities[i-1]``
times.  The deck is dealt face up one card at a time; before each reveal the
player guesses the type of the next card and is told the truth afterwards.
The greedy player always names a type with maximal remaining multiplicity,
which maximizes the expected number of correct guesses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping, NamedTuple

import numpy as np

TieRule = Literal["uniform", "lowest"]


class InvalidDeckError(ValueError):
    """Deck specification is empty or contains a nonpositive multiplicity."""


class GameOverError(RuntimeError):
    """A guess was requested from an exhausted deck."""


class RngStream:
    """Deterministic pseudo-random stream with indexed substreams.

    Wraps a PCG64 generator keyed by ``(seed, path)``.  The same seed, path
    and call sequence always reproduce the same draws, and ``substream(i)``
    yields a stream that is statistically independent of its siblings but a
    pure function of the root seed.  Concurrent tasks must each own their
    own substream; a stream itself is stateful and single-threaded.
    """

    __slots__ = ("seed", "path", "_gen")

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        if not 0 <= int(seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.path = tuple(int(i) for i in path)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def substream(self, *index: int) -> "RngStream":
        """Fresh stream at ``path + index``; creation order is irrelevant."""
        return RngStream(self.seed, self.path + index)

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def random(self, size: int | None = None):
        return self._gen.random(size)

    def integers(self, low: int, high: int | None = None, size: int | None = None):
        return self._gen.integers(low, high, size)

    def permutation(self, values):
        return self._gen.permutation(values)

    def pick_index(self, k: int) -> int:
        """Uniform index in ``[0, k)``."""
        return int(self._gen.integers(k))

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream(seed={self.seed}, path={self.path})"


@dataclass(frozen=True)
class Deck:
    """Immutable multiset of card types; type ``i`` has ``multiplicities[i-1]`` copies."""

    multiplicities: tuple[int, ...]
    n: int = field(init=False, repr=False)
    total: int = field(init=False, repr=False)
    max_mult: int = field(init=False, repr=False)
    eps: float = field(init=False, repr=False)

    def __post_init__(self):
        ms = tuple(int(v) for v in self.multiplicities)
        if not ms:
            raise InvalidDeckError("deck must contain at least one type")
        for i, v in enumerate(ms):
            if v < 1:
                raise InvalidDeckError(
                    f"multiplicity of type {i + 1} must be a positive integer, got {v}"
                )
        top = max(ms)
        object.__setattr__(self, "multiplicities", ms)
        object.__setattr__(self, "n", len(ms))
        object.__setattr__(self, "total", sum(ms))
        object.__setattr__(self, "max_mult", top)
        object.__setattr__(self, "eps", sum(1 for v in ms if v == top) / len(ms))

    @property
    def num_top_types(self) -> int:
        """Number of types attaining the maximal multiplicity."""
        return sum(1 for v in self.multiplicities if v == self.max_mult)

    def expanded(self) -> np.ndarray:
        """All cards as a flat array of type labels, grouped by type."""
        return np.repeat(np.arange(1, self.n + 1), self.multiplicities)

    def spec(self) -> str:
        """Canonical text form, e.g. ``\"3,3,2\"``."""
        return ",".join(str(v) for v in self.multiplicities)

    def arrangement(self, cards: Iterable[int], from_bottom: bool = False) -> "Arrangement":
        """Validated arrangement of exactly this deck's cards."""
        seq = tuple(int(c) for c in cards)
        if from_bottom:
            seq = seq[::-1]
        if len(seq) != self.total:
            raise InvalidDeckError(
                f"arrangement has {len(seq)} cards, deck has {self.total}"
            )
        for i, m in enumerate(self.multiplicities):
            got = seq.count(i + 1)
            if got != m:
                raise InvalidDeckError(
                    f"type {i + 1} occurs {got} times in arrangement, expected {m}"
                )
        return Arrangement(seq)


def new_deck(multiplicities: Iterable[int]) -> Deck:
    """Build a deck from per-type multiplicities (all must be >= 1)."""
    return Deck(tuple(multiplicities))


def balanced_deck(n: int, m: int) -> Deck:
    """Deck of ``n`` types, each with ``m`` copies."""
    if n < 1 or m < 1:
        raise InvalidDeckError(f"balanced deck needs n >= 1 and m >= 1, got n={n}, m={m}")
    return Deck((m,) * n)


def parse_deck_spec(text: str) -> Deck:
    """Parse ``"3,3,2"`` (explicit multiplicities) or ``"n=100,m=3"`` (balanced).

    >>> parse_deck_spec("3,3,2").multiplicities
    (3, 3, 2)
    >>> parse_deck_spec("n=4,m=2").multiplicities
    (2, 2, 2, 2)
    """
    s = text.strip()
    if not s:
        raise InvalidDeckError("empty deck spec")
    if "=" in s:
        fields = {}
        for part in s.split(","):
            key, _, value = part.partition("=")
            key = key.strip().lower()
            if key not in ("n", "m") or not _:
                raise InvalidDeckError(f"bad balanced deck spec {text!r}")
            try:
                fields[key] = int(value)
            except ValueError:
                raise InvalidDeckError(f"bad integer in deck spec {text!r}") from None
        if set(fields) != {"n", "m"}:
            raise InvalidDeckError(f"balanced spec needs both n= and m=, got {text!r}")
        return balanced_deck(fields["n"], fields["m"])
    try:
        values = [int(p) for p in s.split(",")]
    except ValueError:
        raise InvalidDeckError(f"bad multiplicity list {text!r}") from None
    return new_deck(values)


@dataclass(frozen=True)
class Arrangement:
    """One full deal order, top to bottom: ``cards[0]`` is revealed first.

    Position ``b`` from the bottom (1-based) is ``cards[len(cards) - b]``.
    """

    cards: tuple[int, ...]

    @classmethod
    def from_bottom(cls, cards: Iterable[int]) -> "Arrangement":
        """Construct from a bottom-to-top listing."""
        return cls(tuple(int(c) for c in cards)[::-1])

    def bottom_up(self) -> tuple[int, ...]:
        return self.cards[::-1]

    def __len__(self) -> int:
        return len(self.cards)


class Step(NamedTuple):
    guess: int
    revealed: int
    correct: bool
    top_mult: int  # maximal remaining multiplicity before the reveal
    num_tied: int  # number of types attaining it


@dataclass(frozen=True)
class GameTrace:
    """Full record of one greedy playout."""

    steps: tuple[Step, ...]

    @property
    def score(self) -> int:
        return sum(1 for s in self.steps if s.correct)


def uniform_arrangement(deck: Deck, rng: RngStream) -> Arrangement:
    """Uniformly random arrangement: every distinct ordering of the card
    multiset has probability ``prod(m_i!) / total!``."""
    perm = rng.permutation(deck.expanded())
    return Arrangement(tuple(int(c) for c in perm))


def greedy_guess(
    remaining: Mapping[int, int],
    tie_rule: TieRule = "uniform",
    rng: RngStream | None = None,
) -> int:
    """Pick a type with maximal remaining count.

    ``remaining`` maps type label to a positive remaining count. Ties are
    broken uniformly at random (``"uniform"``, needs ``rng``) or by the
    lowest type label (``"lowest"``).
    """
    if not remaining:
        raise GameOverError("no cards remain")
    top = max(remaining.values())
    tied = sorted(t for t, c in remaining.items() if c == top)
    if tie_rule == "lowest":
        return tied[0]
    if tie_rule == "uniform":
        if rng is None:
            raise ValueError("uniform tie-breaking requires an RngStream")
        return tied[rng.pick_index(len(tied))]
    raise ValueError(f"unknown tie rule {tie_rule!r}")


def play(
    arrangement: Arrangement,
    tie_rule: TieRule = "uniform",
    rng: RngStream | None = None,
) -> GameTrace:
    """Play the complete-feedback game greedily against a fixed arrangement.

    Each step records the pre-reveal configuration ``(top_mult, num_tied)``;
    a correct guess is only possible when the revealed card belongs to a
    type currently at maximal multiplicity.
    """
    remaining: dict[int, int] = {}
    for c in arrangement.cards:
        remaining[c] = remaining.get(c, 0) + 1
    steps = []
    for revealed in arrangement.cards:
        top = max(remaining.values())
        tied = sorted(t for t, c in remaining.items() if c == top)
        if tie_rule == "lowest":
            guess = tied[0]
        elif tie_rule == "uniform":
            if rng is None:
                raise ValueError("uniform tie-breaking requires an RngStream")
            guess = tied[rng.pick_index(len(tied))]
        else:
            raise ValueError(f"unknown tie rule {tie_rule!r}")
        steps.append(Step(guess, revealed, guess == revealed, top, len(tied)))
        left = remaining[revealed] - 1
        if left:
            remaining[revealed] = left
        else:
            del remaining[revealed]
    return GameTrace(tuple(steps))
