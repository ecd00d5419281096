"""
Exact lambda x lambda measure of A_m & A_n for the strip events
A_n = {(alpha, gamma) : ||a_n alpha - gamma|| < psi(n)} in the unit square.

For fixed alpha the gamma-fibre of A_m & A_n is B(a_m alpha, psi_m) & B(a_n alpha, psi_n),
whose length depends only on the offset delta = (a_m - a_n) alpha mod 1.
As alpha sweeps [0, 1), delta wraps exactly |a_m - a_n| full turns at
constant speed, so the alpha-integral equals the delta-integral over one
turn. The overlap is piecewise linear in delta, so integrating it knot to
knot with the trapezoid rule is exact.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import torus_arcs as ta
from .errors import InvalidInput, Unsupported
from .model import ApproxFunction, SequenceSpec
from .torus_arcs import HALF, Arc


@dataclass(frozen=True)
class StripEvent:
    index: int
    slope: int
    half_width: float

    def __post_init__(self):
        if self.slope < 1:
            raise InvalidInput("slope a_n must be a positive integer")
        if not 0.0 <= self.half_width <= HALF:
            raise InvalidInput("half-width must lie in [0, 1/2]; use StripEvent.of to cap")

    @classmethod
    def of(cls, index: int, slope: int, psi_value: float) -> "StripEvent":
        if psi_value < 0:
            raise InvalidInput("psi must be nonnegative")
        return cls(index, int(slope), min(float(psi_value), HALF))

    @property
    def measure(self) -> float:
        return 2.0 * self.half_width


def _lifted(r1, r2, t):
    """Overlap of the line intervals (-r1, r1) and (t - r2, t + r2)."""
    return np.clip(np.minimum(np.minimum(r1 + r2 - np.abs(t), 2 * r1), 2 * r2), 0.0, None)


def overlap_function(r1: float, r2: float, delta: float) -> float:
    """lambda(B(0, r1) & B(delta, r2)) on the circle."""
    if r1 < 0 or r2 < 0:
        raise InvalidInput("radii must be nonnegative")
    if r1 + r2 < HALF:
        d = float(ta.circular_distance(0.0, delta))
        return max(0.0, min(r1 + r2 - d, 2 * r1, 2 * r2))
    a = ta.normalize(Arc(0.0, r1))
    b = ta.normalize(Arc.wrapped(delta, r2))
    return ta.measure(ta.intersect(a, b))


def overlap_profile(r1: float, r2: float, delta):
    """Vectorized overlap for radii in [0, 1/2]; exact for all such radii."""
    delta = np.asarray(delta, dtype=float) % 1.0
    return _lifted(r1, r2, delta) + _lifted(r1, r2, 1.0 - delta)


def _exact_offset_integral(r1: float, r2: float) -> float:
    if r1 == 0 or r2 == 0:
        return 0.0
    knots = {0.0, 1.0, abs(r1 - r2), r1 + r2, 1.0 - (r1 + r2), 1.0 - abs(r1 - r2)}
    x = np.array(sorted(k for k in knots if 0.0 <= k <= 1.0))
    y = overlap_profile(r1, r2, x)
    return math.fsum((0.5 * (y[1:] + y[:-1]) * np.diff(x)).tolist())


def strip_intersection_measure(m: StripEvent, n: StripEvent) -> float:
    if m.slope == n.slope:
        raise Unsupported("strip events with equal slopes a_m = a_n are not covered")
    return _exact_offset_integral(m.half_width, n.half_width)


def strip_intersection_by_quadrature(m: StripEvent, n: StripEvent, panels: int = 10_000,
                                     order: int = 8) -> float:
    """Composite Gauss-Legendre over alpha in [0, 1]; cross-check only."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    alpha = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    delta = ((m.slope - n.slope) * alpha) % 1.0
    vals = overlap_profile(m.half_width, n.half_width, delta)
    return math.fsum((w * vals).tolist())


def strip_intersection_monte_carlo(m: StripEvent, n: StripEvent, samples: int,
                                   rng: np.random.Generator, chunk: int = 1_000_000,
                                   stratified: bool = False):
    """
    2-D Monte Carlo over the unit square: (estimate, standard error).

    With stratified=True alpha takes one uniform point in each cell
    [i/samples, (i+1)/samples) and gamma stays i.i.d.; the returned error is
    still the i.i.d. binomial one, which bounds the stratified error.
    """
    hits = 0
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        if stratified:
            alpha = (np.arange(done, done + k) + rng.random(k)) / samples
        else:
            alpha = rng.random(k)
        gamma = rng.random(k)
        in_m = ta.circular_distance(m.slope * alpha, gamma) < m.half_width
        in_n = ta.circular_distance(n.slope * alpha, gamma) < n.half_width
        hits += int(np.count_nonzero(in_m & in_n))
        done += k
    p = hits / samples
    return p, math.sqrt(max(p * (1 - p), 0.0) / samples)


@dataclass
class IndependenceRow:
    m: int
    n: int
    computed: float
    expected: float
    deviation: float


@dataclass
class IndependenceReport:
    rows: list[IndependenceRow]
    degenerate: list[tuple[int, int]] = field(default_factory=list)

    @property
    def max_deviation(self) -> float:
        return max((r.deviation for r in self.rows), default=0.0)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["m", "n", "computed", "expected", "deviation"])
            for r in self.rows:
                w.writerow([r.m, r.n, repr(r.computed), repr(r.expected), repr(r.deviation)])


def independence_report(a: SequenceSpec, psi: ApproxFunction,
                        pairs: Iterable[Sequence[int]]) -> IndependenceReport:
    """|lambda(A_m & A_n) - lambda(A_m) lambda(A_n)| for each pair; equal-slope pairs are flagged."""
    rows, bad = [], []
    for m, n in pairs:
        m, n = int(m), int(n)
        am = a.generate(m, m)[0]
        an = a.generate(n, n)[0]
        if am == an:
            bad.append((m, n))
            continue
        em = StripEvent.of(m, am, psi(m))
        en = StripEvent.of(n, an, psi(n))
        got = strip_intersection_measure(em, en)
        want = em.measure * en.measure
        rows.append(IndependenceRow(m, n, got, want, abs(got - want)))
    return IndependenceReport(rows, bad)
