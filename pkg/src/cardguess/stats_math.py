"""Special functions and distribution-distance metrics used across the toolkit.

Everything here is pure and stateless: harmonic sums, exact collision
expectations, Poisson mass, total-variation distance, the standard normal
CDF, and the sup-norm gap between an integer-supported CDF and a normal fit.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping

import numpy as np

from .deck_core import Deck

_HARMONIC_LIMIT = 10**7


def harmonic(k: int) -> float:
    """Sum of 1/s for s = 1..k, accumulated exactly (compensated).

    >>> harmonic(4) == 25 / 12
    True
    """
    if not 1 <= k <= _HARMONIC_LIMIT:
        raise ValueError(f"k must be in [1, {_HARMONIC_LIMIT}], got {k}")
    return math.fsum(1.0 / s for s in range(1, k + 1))


def harmonic2(k: int) -> float:
    """Sum of 1/s^2 for s = 1..k; tends to pi^2/6 with a 1/k tail."""
    if not 1 <= k <= _HARMONIC_LIMIT:
        raise ValueError(f"k must be in [1, {_HARMONIC_LIMIT}], got {k}")
    return math.fsum(1.0 / (s * s) for s in range(1, k + 1))


def harmonic_prefix(kmax: int) -> np.ndarray:
    """Array ``h`` with ``h[k] = harmonic(k)`` for k = 0..kmax (``h[0] = 0``).

    Cumulative-sum accuracy (~1e-13 relative at k = 1e7) is plenty for the
    Monte Carlo aggregates this backs; use :func:`harmonic` when the last
    bit matters.
    """
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    return np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, kmax + 1))])


def harmonic2_prefix(kmax: int) -> np.ndarray:
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    return np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, kmax + 1) ** 2)])


def asymptotic_mean(n: int, m: int) -> float:
    """Leading-order greedy score for a balanced deck: ``harmonic(m) * ln n``."""
    if n < 2:
        raise ValueError(f"need n >= 2 types, got {n}")
    return harmonic(m) * math.log(n)


def expected_collisions(deck: Deck, j: int, t: int) -> float:
    """Exact expectation of ``collision_count(arrangement, j, t)`` under a
    uniform shuffle: ``C(t, j+1) * sum_i (m_i)_(j+1) / (|m|)_(j+1)`` with
    falling factorials.  For balanced decks this approaches
    ``t^(j+1)/n^j * C(m, j+1)/m^(j+1)`` when ``t`` grows like a power of n.
    """
    if not 1 <= j < deck.max_mult:
        raise ValueError(f"level j must satisfy 1 <= j < {deck.max_mult}, got {j}")
    if not 0 <= t <= deck.total:
        raise ValueError(f"suffix length {t} outside [0, {deck.total}]")
    k = j + 1
    num = math.comb(t, k) * sum(math.perm(m, k) for m in deck.multiplicities)
    den = math.perm(deck.total, k)
    return num / den


def poisson_pmf(lam: float, k: int) -> float:
    """P(Poisson(lam) = k), evaluated in log space.

    >>> poisson_pmf(1.0, 0) == math.exp(-1)
    True
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return math.exp(-lam + k * math.log(lam) - math.lgamma(k + 1))


def normal_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


class Pmf:
    """Probability mass function on a contiguous integer range.

    ``probs[i]`` is the mass at ``offset + i``.  Mass must be nonnegative
    and sum to 1 within 1e-9 unless ``normalize=True``.
    """

    __slots__ = ("offset", "probs")

    def __init__(self, offset: int, probs, *, normalize: bool = False):
        p = np.asarray(probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a nonempty 1-d array")
        if np.any(p < 0):
            raise ValueError("negative probability mass")
        total = float(p.sum())
        if normalize:
            if total <= 0:
                raise ValueError("cannot normalize zero mass")
            p = p / total
        elif abs(total - 1.0) > 1e-9:
            raise ValueError(f"mass sums to {total!r}, expected 1")
        self.offset = int(offset)
        self.probs = p

    @classmethod
    def point(cls, k: int) -> "Pmf":
        return cls(k, [1.0])

    @classmethod
    def from_dict(cls, masses: Mapping[int, float], *, normalize: bool = False) -> "Pmf":
        if not masses:
            raise ValueError("empty pmf")
        lo, hi = min(masses), max(masses)
        p = np.zeros(hi - lo + 1)
        for k, v in masses.items():
            p[k - lo] = v
        return cls(lo, p, normalize=normalize)

    @classmethod
    def from_counts(cls, counts: Mapping[int, int]) -> "Pmf":
        """Empirical pmf from a histogram of observed integers."""
        return cls.from_dict({k: float(v) for k, v in counts.items()}, normalize=True)

    @classmethod
    def poisson(cls, lam: float, *, tail: float = 1e-12) -> "Pmf":
        """Poisson(lam) truncated once the right tail drops below ``tail``."""
        if lam == 0:
            return cls.point(0)
        kmax = int(lam + 40.0 * math.sqrt(lam)) + 10
        p = np.array([poisson_pmf(lam, k) for k in range(kmax + 1)])
        while 1.0 - p.sum() > tail:  # pragma: no cover - 40 sigmas is plenty
            extra = np.array([poisson_pmf(lam, k) for k in range(kmax + 1, 2 * kmax + 1)])
            p = np.concatenate([p, extra])
            kmax *= 2
        return cls(0, p, normalize=True)

    def support(self) -> range:
        return range(self.offset, self.offset + self.probs.size)

    def __getitem__(self, k: int) -> float:
        i = k - self.offset
        if 0 <= i < self.probs.size:
            return float(self.probs[i])
        return 0.0

    def as_dict(self, *, keep_zero: bool = False) -> dict[int, float]:
        return {
            k: float(p)
            for k, p in zip(self.support(), self.probs)
            if keep_zero or p > 0.0
        }

    def mean(self) -> float:
        ks = np.arange(self.offset, self.offset + self.probs.size)
        return float(np.sum(ks * self.probs))

    def variance(self) -> float:
        ks = np.arange(self.offset, self.offset + self.probs.size)
        mu = float(np.sum(ks * self.probs))
        return float(np.sum((ks - mu) ** 2 * self.probs))

    def trim_zeros(self) -> "Pmf":
        """Drop structurally-zero mass at either edge of the support."""
        nz = np.flatnonzero(self.probs)
        return Pmf(self.offset + nz[0], self.probs[nz[0]: nz[-1] + 1])

    def convolve(self, other: "Pmf") -> "Pmf":
        return Pmf(
            self.offset + other.offset,
            np.convolve(self.probs, other.probs),
            normalize=True,
        )

    def __repr__(self) -> str:  # pragma: no cover
        return f"Pmf(offset={self.offset}, size={self.probs.size})"


def bernoulli_sum_pmf(ps: Iterable[float], *, trim: float = 1e-18) -> Pmf:
    """Exact pmf of a sum of independent Bernoulli trials.

    Folds one trial at a time, dropping edge mass below ``trim`` so the
    support stays O(standard deviations) wide; the result is renormalized.
    The default threshold keeps cumulative moment distortion well below
    1e-12 even after tens of thousands of folds.
    """
    probs = np.array([1.0])
    offset = 0
    for p in ps:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"Bernoulli probability {p} outside [0, 1]")
        nxt = np.zeros(probs.size + 1)
        nxt[:-1] = probs * (1.0 - p)
        nxt[1:] += probs * p
        keep = np.flatnonzero(nxt > trim)
        if keep.size == 0:  # pragma: no cover - total mass cannot vanish
            raise ValueError("all mass trimmed")
        offset += int(keep[0])
        probs = nxt[keep[0]: keep[-1] + 1]
    return Pmf(offset, probs, normalize=True)


def tv_distance(p: Pmf, q: Pmf) -> float:
    """Total variation distance: half the L1 distance over the union support."""
    lo = min(p.offset, q.offset)
    hi = max(p.offset + p.probs.size, q.offset + q.probs.size)
    a = np.zeros(hi - lo)
    b = np.zeros(hi - lo)
    a[p.offset - lo: p.offset - lo + p.probs.size] = p.probs
    b[q.offset - lo: q.offset - lo + q.probs.size] = q.probs
    return 0.5 * float(np.abs(a - b).sum())


def kolmogorov_gap(pmf: Pmf, mu: float, sigma: float) -> float:
    """Sup-norm distance between the pmf's CDF and a normal CDF fit.

    Because the CDF is a step function and the normal CDF is continuous and
    increasing, the supremum over all reals is attained at a jump; both the
    left and right limits are checked at every support point.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    cdf = np.cumsum(pmf.probs)
    ks = np.arange(pmf.offset, pmf.offset + pmf.probs.size)
    z = (ks - mu) / sigma
    phi = 0.5 * np.array([math.erfc(v) for v in -z / math.sqrt(2.0)])
    right = np.abs(cdf - phi)
    left = np.abs(cdf - pmf.probs - phi)
    return float(max(right.max(), left.max()))
