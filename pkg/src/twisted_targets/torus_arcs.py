"""
Finite unions of arcs on the circle R/Z.

An ``ArcSet`` is kept in canonical form: half-open intervals [l, r) inside
[0, 1), sorted, pairwise disjoint, with touching intervals merged. Two sets
are equal exactly when their endpoint arrays are identical. Boolean
operations only ever select existing endpoints (no arithmetic), so they are
exact in floating point; only ``normalize`` computes c - r and c + r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInput

HALF = 0.5


def circular_distance(x, y):
    """Distance on R/Z; works elementwise on arrays."""
    d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)) % 1.0
    return np.minimum(d, 1.0 - d)


@dataclass(frozen=True)
class Arc:
    center: float
    radius: float

    def __post_init__(self):
        if not (self.radius >= 0.0):
            raise InvalidInput(f"arc radius must be nonnegative, got {self.radius!r}")
        if not (0.0 <= self.center < 1.0):
            raise InvalidInput(f"arc center must lie in [0, 1), got {self.center!r}")

    @classmethod
    def wrapped(cls, center: float, radius: float) -> "Arc":
        """Build an arc after reducing ``center`` mod 1."""
        c = float(center) % 1.0
        if c >= 1.0:  # -tiny % 1.0 rounds to 1.0
            c = 0.0
        return cls(c, float(radius))

    @property
    def is_full(self) -> bool:
        return self.radius >= HALF

    def measure(self) -> float:
        return min(1.0, 2.0 * self.radius)


def _merge(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    if lo.size == 0:
        return lo, hi
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    reach = np.maximum.accumulate(hi)
    starts = np.ones(lo.size, dtype=bool)
    # touching intervals (lo == previous reach) are merged
    starts[1:] = lo[1:] > reach[:-1]
    first = np.flatnonzero(starts)
    last = np.append(first[1:] - 1, lo.size - 1)
    return lo[first], reach[last]


class ArcSet:
    """Immutable canonical union of half-open intervals of [0, 1)."""

    __slots__ = ("_lo", "_hi")

    def __init__(self, lo=(), hi=()):
        lo = np.clip(np.asarray(lo, dtype=float).ravel(), 0.0, 1.0)
        hi = np.clip(np.asarray(hi, dtype=float).ravel(), 0.0, 1.0)
        if lo.shape != hi.shape:
            raise InvalidInput("endpoint arrays must have equal length")
        if np.isnan(lo).any() or np.isnan(hi).any():
            raise InvalidInput("NaN endpoint")
        lo, hi = _merge(lo, hi)
        lo.flags.writeable = False
        hi.flags.writeable = False
        self._lo = lo
        self._hi = hi

    @classmethod
    def from_intervals(cls, pairs: Iterable[Sequence[float]]) -> "ArcSet":
        pairs = list(pairs)
        if not pairs:
            return cls.empty()
        arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    @classmethod
    def empty(cls) -> "ArcSet":
        return cls()

    @classmethod
    def full(cls) -> "ArcSet":
        return cls([0.0], [1.0])

    @property
    def lo(self) -> np.ndarray:
        return self._lo

    @property
    def hi(self) -> np.ndarray:
        return self._hi

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self._lo.tolist(), self._hi.tolist()))

    def to_pairs(self) -> list[list[float]]:
        return [[l, r] for l, r in self.intervals]

    def __len__(self):
        return self._lo.size

    def is_empty(self) -> bool:
        return self._lo.size == 0

    def is_full(self) -> bool:
        return self._lo.size == 1 and self._lo[0] == 0.0 and self._hi[0] == 1.0

    def __eq__(self, other):
        if not isinstance(other, ArcSet):
            return NotImplemented
        return np.array_equal(self._lo, other._lo) and np.array_equal(self._hi, other._hi)

    def __hash__(self):
        return hash((self._lo.tobytes(), self._hi.tobytes()))

    def __repr__(self):
        if len(self) > 6:
            return f"ArcSet(<{len(self)} intervals>, measure={measure(self):.6g})"
        return f"ArcSet({self.intervals})"

    def __or__(self, other):
        return union(self, other)

    def __and__(self, other):
        return intersect(self, other)

    def __invert__(self):
        return complement(self)

    def __contains__(self, x):
        return contains(self, x)


def _arc_pieces(centers, radii) -> tuple[np.ndarray, np.ndarray, bool]:
    c = np.asarray(centers, dtype=float).ravel()
    r = np.asarray(radii, dtype=float).ravel()
    if c.shape != r.shape:
        raise InvalidInput("centers and radii must have equal length")
    if (r < 0).any() or np.isnan(r).any():
        raise InvalidInput("arc radius must be nonnegative")
    if (r >= HALF).any():
        return np.array([0.0]), np.array([1.0]), True
    pos = r > 0
    c, r = c[pos], r[pos]
    left, right = c - r, c + r
    low_wrap = left < 0.0
    high_wrap = right > 1.0
    lo = np.concatenate([np.maximum(left, 0.0), left[low_wrap] + 1.0, np.zeros(high_wrap.sum())])
    hi = np.concatenate([np.minimum(right, 1.0), np.ones(low_wrap.sum()), right[high_wrap] - 1.0])
    return lo, hi, False


def normalize(arc: Arc) -> ArcSet:
    """The open ball {x : d(x, center) < radius} as a canonical ArcSet."""
    if arc.radius < 0:
        raise InvalidInput(f"arc radius must be nonnegative, got {arc.radius!r}")
    lo, hi, _ = _arc_pieces([arc.center], [arc.radius])
    return ArcSet(lo, hi)


def union(a: ArcSet, b: ArcSet) -> ArcSet:
    return ArcSet(np.concatenate([a.lo, b.lo]), np.concatenate([a.hi, b.hi]))


def complement(a: ArcSet) -> ArcSet:
    if a.is_empty():
        return ArcSet.full()
    lo = np.concatenate([[0.0], a.hi])
    hi = np.concatenate([a.lo, [1.0]])
    return ArcSet(lo, hi)


def intersect(a: ArcSet, b: ArcSet) -> ArcSet:
    return complement(union(complement(a), complement(b)))


def measure(a: ArcSet) -> float:
    return math.fsum((a.hi - a.lo).tolist())


def contains(a: ArcSet, x: float) -> bool:
    i = int(np.searchsorted(a.lo, x, side="right")) - 1
    return i >= 0 and x < a.hi[i]


def contains_many(a: ArcSet, xs) -> np.ndarray:
    """Vectorized membership for an array of torus points."""
    xs = np.asarray(xs, dtype=float)
    i = np.searchsorted(a.lo, xs, side="right") - 1
    ok = i >= 0
    out = np.zeros(xs.shape, dtype=bool)
    out[ok] = xs[ok] < a.hi[i[ok]]
    return out


def count_sorted(a: ArcSet, sorted_xs: np.ndarray) -> int:
    """Number of points of an already sorted array that fall in ``a``."""
    return int(np.sum(np.searchsorted(sorted_xs, a.hi, side="left")
                      - np.searchsorted(sorted_xs, a.lo, side="left")))


def union_many(arcs: Iterable[Arc]) -> ArcSet:
    arcs = list(arcs)
    if not arcs:
        return ArcSet.empty()
    return union_of_balls([x.center for x in arcs], [x.radius for x in arcs])


def union_of_balls(centers, radii) -> ArcSet:
    """Canonical union of the balls B(centers[i], radii[i]); sort + sweep."""
    lo, hi, _ = _arc_pieces(centers, radii)
    return ArcSet(lo, hi)


def lifted_overlaps(u: ArcSet, lo, hi) -> np.ndarray:
    """
    Measure of ([lo_i, hi_i) mod 1) & u for each i.

    The lifted intervals must satisfy hi - lo <= 1 and lie inside [-1, 2).
    """
    lo = np.asarray(lo, dtype=float)[:, None]
    hi = np.asarray(hi, dtype=float)[:, None]
    total = np.zeros(lo.shape[0])
    if u.is_empty() or lo.shape[0] == 0:
        return total
    for shift in (-1.0, 0.0, 1.0):
        ov = np.minimum(hi, u.hi[None, :] + shift) - np.maximum(lo, u.lo[None, :] + shift)
        total += np.clip(ov, 0.0, None).sum(axis=1)
    return total


def ball_overlaps(u: ArcSet, centers, radii) -> np.ndarray:
    """lambda(B(c_i, r_i) & u) for each ball."""
    c = np.asarray(centers, dtype=float)
    r = np.minimum(np.asarray(radii, dtype=float), HALF)
    return lifted_overlaps(u, c - r, c + r)
