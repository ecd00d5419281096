"""
The ball family B_n(alpha) = B(a_n alpha, psi(n)) and finite-truncation
statistics of its limsup set W(psi, a, alpha).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import torus_arcs as ta
from .errors import InvalidInput, Unsupported
from .model import ApproxFunction, PowerPsi, SequenceSpec
from .orbit import OrbitSlice, RealRep, auto_precision, orbit_points
from .torus_arcs import Arc, ArcSet


@dataclass(frozen=True)
class TargetFamily:
    alpha: RealRep
    a: SequenceSpec
    psi: ApproxFunction

    def orbit(self, n0: int, n1: int) -> OrbitSlice:
        return _orbit(self, n0, n1)

    def centers(self, n0: int, n1: int) -> np.ndarray:
        return self.orbit(n0, n1).points

    def radii(self, n0: int, n1: int, f=None) -> np.ndarray:
        r = np.asarray(self.psi.values(n0, n1), dtype=float)
        if f is not None:
            r = np.asarray(f(r), dtype=float)
        return r


@lru_cache(maxsize=16)
def _orbit(T: TargetFamily, n0: int, n1: int) -> OrbitSlice:
    alpha = auto_precision(T.alpha, T.a, n1)
    return orbit_points(alpha, T.a, n0, n1)


def ball(T: TargetFamily, n: int) -> Arc:
    if n < 1:
        raise InvalidInput("ball index must be >= 1")
    return Arc(float(T.centers(n, n)[0]), float(T.psi(n)))


def shrink_ball_f(T: TargetFamily, n: int, f) -> Arc:
    """B^f: same centre, radius f(psi(n))."""
    if n < 1:
        raise InvalidInput("ball index must be >= 1")
    return Arc(float(T.centers(n, n)[0]), float(f(float(T.psi(n)))))


def dyadic_radius(n: int, sigma: float) -> float:
    m = n.bit_length() - 1  # 2**m <= n < 2**(m+1)
    return float(2 ** (m + 1)) ** -sigma


def dyadic_ball(T: TargetFamily, n: int, sigma: float) -> Arc:
    """Ball of radius (2**(m+1))**-sigma for 2**m <= n < 2**(m+1); sits inside ball(T, n)."""
    if not isinstance(T.psi, PowerPsi):
        raise Unsupported("dyadic balls need a power-law psi")
    if not math.isclose(T.psi.sigma, sigma, rel_tol=0, abs_tol=1e-15):
        raise InvalidInput(f"sigma {sigma} does not match psi exponent {T.psi.sigma}")
    if n < 1:
        raise InvalidInput("ball index must be >= 1")
    return Arc(float(T.centers(n, n)[0]), dyadic_radius(n, sigma))


def tail_union(T: TargetFamily, N: int, M: int, f=None) -> ArcSet:
    """Union of B_n (or B_n^f) for N <= n <= M."""
    if M < N:
        raise InvalidInput(f"empty tail window [{N}, {M}]")
    return ta.union_of_balls(T.centers(N, M), T.radii(N, M, f))


def tail_union_measure(T: TargetFamily, N: int, M: int, f=None) -> float:
    return ta.measure(tail_union(T, N, M, f))


@dataclass
class LimsupProfile:
    windows: list[tuple[int, int]]
    measures: list[float]
    tol: float
    full_measure_consistent: bool


def limsup_profile(T: TargetFamily, schedule: Sequence[tuple[int, int]], tol: float = 1e-3,
                   f=None) -> LimsupProfile:
    schedule = [(int(n), int(m)) for n, m in schedule]
    for (n, m), (n2, _) in zip(schedule, schedule[1:]):
        if n2 < n:
            raise InvalidInput("schedule start indices must be nondecreasing")
    measures = [tail_union_measure(T, n, m, f) for n, m in schedule]
    ok = bool(measures) and all(x >= 1.0 - tol for x in measures)
    return LimsupProfile(schedule, measures, tol, ok)


@dataclass(frozen=True)
class HitCount:
    count: int
    expected: float

    @property
    def ratio(self) -> float:
        return self.count / self.expected if self.expected > 0 else float("nan")


def hit_mask(T: TargetFamily, gamma: float, N: int) -> np.ndarray:
    x = T.centers(1, N)
    return ta.circular_distance(x, gamma) < T.radii(1, N)


def hit_count(T: TargetFamily, gamma: float, N: int) -> HitCount:
    """#{n <= N : ||a_n alpha - gamma|| < psi(n)}, with sum min(1, 2 psi(n))."""
    if N < 1:
        raise InvalidInput("N must be >= 1")
    count = int(np.count_nonzero(hit_mask(T, gamma, N)))
    expected = math.fsum(np.minimum(1.0, 2.0 * T.radii(1, N)).tolist())
    return HitCount(count, expected)


def default_windows() -> list[ArcSet]:
    return [ArcSet([k / 8], [(k + 1) / 8]) for k in range(8)]


def quarter_windows() -> list[ArcSet]:
    return [ArcSet([k / 4], [(k + 1) / 4]) for k in range(4)]


def _window_measure(U: ArcSet) -> float:
    m = ta.measure(U)
    if m <= 0:
        raise InvalidInput("window has zero measure")
    return m


def local_density(T: TargetFamily, N: int, M: int, windows: Sequence[ArcSet] | None = None,
                  f=None) -> list[float]:
    """lambda(tail union & U) / lambda(U) for each window U."""
    windows = default_windows() if windows is None else list(windows)
    sizes = [_window_measure(U) for U in windows]
    tail = tail_union(T, N, M, f)
    return [ta.measure(ta.intersect(tail, U)) / s for U, s in zip(windows, sizes)]


def ball_masses_in(T: TargetFamily, n0: int, n1: int, U: ArcSet, f=None) -> np.ndarray:
    """lambda(B_k & U) for k = n0..n1."""
    return ta.ball_overlaps(U, T.centers(n0, n1), T.radii(n0, n1, f))


def equid_ratio(T: TargetFamily, block: tuple[int, int], U: ArcSet) -> float:
    """
    [sum_k lambda(B_k & U) / lambda(U)] / sum_k lambda(B_k) over k in [lo, hi).

    Near 1 when the block's mass is spread in proportion to lambda(U); the
    constant in the local-to-global estimate is 1/ratio when ratio < 1.
    """
    lo, hi = block
    if hi <= lo:
        raise InvalidInput("empty block")
    size = _window_measure(U)
    if U.is_full():
        return 1.0
    inside = math.fsum(ball_masses_in(T, lo, hi - 1, U).tolist())
    total = math.fsum(np.minimum(1.0, 2.0 * T.radii(lo, hi - 1)).tolist())
    if total == 0:
        raise InvalidInput("block carries no mass")
    return (inside / size) / total
