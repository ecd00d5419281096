"""
Orbit points x_n = a_n * alpha mod 1 with certified accuracy, and star
discrepancy of the resulting point sets.

alpha is held either as an exact rational p/q (orbit computed as
(a_n p mod q)/q) or as a binary fixed-point number m / 2**P. In the
fixed-point case a_n * m is formed exactly as an integer, so the only error
is the representation error of alpha amplified by a_n; P >= bits(a_n) + 64
keeps it below 2**-64.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .errors import InvalidInput, PrecisionError
from .model import SequenceSpec
from .torus_arcs import ArcSet, contains_many

GUARD_BITS = 64
ERROR_TARGET = 2.0**-GUARD_BITS


@dataclass(frozen=True)
class RationalAlpha:
    num: int
    den: int

    def __post_init__(self):
        if self.den <= 0:
            raise InvalidInput("denominator must be positive")
        if not (0 <= self.num < self.den):
            raise InvalidInput("rational alpha must lie in [0, 1)")
        if math.gcd(self.num, self.den) != 1 and not (self.num == 0 and self.den == 1):
            raise InvalidInput(f"{self.num}/{self.den} is not in lowest terms")

    @classmethod
    def of(cls, value) -> "RationalAlpha":
        """Reduce any rational (Fraction, int pair, decimal string) mod 1."""
        f = Fraction(value) % 1
        return cls(f.numerator, f.denominator)

    def __float__(self):
        return self.num / self.den

    def describe(self) -> str:
        return f"{self.num}/{self.den}"


@dataclass(frozen=True)
class FixedPointAlpha:
    """
    alpha ~ mantissa / 2**bits.

    ``exact`` marks values that are themselves the intended alpha (e.g. a
    uniformly sampled dyadic), for which the orbit carries no error at all.
    Otherwise the value is a correct rounding of an irrational, off by at
    most 2**-(bits+1); ``source`` names the constant so it can be recomputed
    at a higher precision.
    """

    bits: int
    mantissa: int
    exact: bool = False
    source: str | None = None

    def __post_init__(self):
        if self.bits <= 0:
            raise InvalidInput("fractional bits must be positive")
        if not (0 <= self.mantissa < (1 << self.bits)):
            raise InvalidInput("fixed-point alpha must lie in [0, 1)")

    def __float__(self):
        return math.ldexp(float(self.mantissa), -self.bits)

    def with_bits(self, bits: int) -> "FixedPointAlpha":
        if bits == self.bits:
            return self
        if self.source is not None:
            return constant_alpha(self.source, bits)
        if self.exact and bits > self.bits:
            return FixedPointAlpha(bits, self.mantissa << (bits - self.bits), True)
        raise PrecisionError(bits, self.bits)

    def describe(self) -> str:
        return self.source or f"fixed[{self.bits}]:{self.mantissa:#x}"


RealRep = RationalAlpha | FixedPointAlpha


# ------------------------------------------------------------- constants


def _round_sqrt_expr(radicand: int, offset: int, divisor: int, bits: int) -> int:
    """round(2**bits * (sqrt(radicand) - offset) / divisor) for non-square radicand."""
    g = 4
    t = math.isqrt(radicand << (2 * (bits + g)))  # floor(2**(bits+g) sqrt(radicand))
    num = t - (offset << (bits + g))
    den = divisor << g
    return (2 * num + den) // (2 * den)


def _round_mp(expr, bits: int) -> int:
    with mpmath.workprec(bits + 64):
        return int(mpmath.nint(expr() * mpmath.mpf(2) ** bits))


CONSTANTS = {
    "sqrt2-1": lambda P: _round_sqrt_expr(2, 1, 1, P),
    "golden": lambda P: _round_sqrt_expr(5, 1, 2, P),  # (sqrt 5 - 1)/2 = phi - 1
    "e-2": lambda P: _round_mp(lambda: mpmath.e - 2, P),
    "pi-3": lambda P: _round_mp(lambda: mpmath.pi - 3, P),
}


def constant_alpha(name: str, bits: int = 256) -> FixedPointAlpha:
    """Correctly rounded fixed-point value of a named irrational in (0, 1)."""
    try:
        fn = CONSTANTS[name]
    except KeyError:
        raise InvalidInput(f"unknown constant {name!r}; known: {sorted(CONSTANTS)}") from None
    return FixedPointAlpha(bits, fn(bits), source=name)


def parse_alpha(text: str, bits: int = 256) -> RealRep:
    """'1/3', '0.25', 'sqrt2-1', 'golden[512]' ..."""
    text = text.strip()
    name, _, rest = text.partition("[")
    if name in CONSTANTS:
        return constant_alpha(name, int(rest.rstrip("]")) if rest else bits)
    try:
        return RationalAlpha.of(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise InvalidInput(f"cannot parse alpha {text!r}") from None


def required_bits(a_max: int) -> int:
    return a_max.bit_length() + GUARD_BITS


# -------------------------------------------------------------- orbits


@dataclass(frozen=True)
class OrbitSlice:
    """Points x_n = a_n alpha mod 1 for n = n0..n1."""

    n0: int
    n1: int
    a_values: tuple[int, ...]
    residues: tuple[int, ...]  # exact x_n = residue / scale (up to error_bound)
    scale: int
    points: np.ndarray
    error_bound: float

    def __len__(self):
        return self.n1 - self.n0 + 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.n0, self.n1 + 1)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "a_n", "x_n"])
            for n, a, x in zip(range(self.n0, self.n1 + 1), self.a_values, self.points.tolist()):
                w.writerow([n, a, repr(x)])


def _to_unit_floats(residues, scale: int) -> np.ndarray:
    if scale & (scale - 1) == 0:
        e = scale.bit_length() - 1
        # beyond float range drop low bits first; they sit far below 2**-53
        shift = max(0, e - 1000)
        pts = np.fromiter((math.ldexp(float(r >> shift), shift - e) for r in residues), float, len(residues))
    else:
        pts = np.fromiter((r / scale for r in residues), float, len(residues))
    # residues within half an ulp of 1 round up to 1.0, which is 0 on the circle
    pts[pts >= 1.0] = 0.0
    return pts


def _scaled(k: int, e: int) -> float:
    """k * 2**e as a float without converting a huge k directly."""
    shift = max(0, k.bit_length() - 60)
    return math.ldexp(float(k >> shift), e + shift)


def orbit_points(alpha: RealRep, a: SequenceSpec, n0: int, n1: int) -> OrbitSlice:
    if n1 < n0:
        raise InvalidInput(f"empty range [{n0}, {n1}]")
    a_vals = a.generate(n0, n1)
    if isinstance(alpha, RationalAlpha):
        p, q = alpha.num, alpha.den
        res = [(x * p) % q for x in a_vals]
        return OrbitSlice(n0, n1, tuple(a_vals), tuple(res), q, _to_unit_floats(res, q), 0.0)
    P = alpha.bits
    need = required_bits(max(a_vals))
    if P < need and not alpha.exact:
        raise PrecisionError(need, P)
    mask = (1 << P) - 1
    m = alpha.mantissa
    res = [(x * m) & mask for x in a_vals]
    err = 0.0 if alpha.exact else _scaled(max(a_vals), -P - 1)
    return OrbitSlice(n0, n1, tuple(a_vals), tuple(res), 1 << P, _to_unit_floats(res, 1 << P), err)


def auto_precision(alpha: RealRep, a: SequenceSpec, n1: int) -> RealRep:
    """Widen a fixed-point alpha to the precision needed up to index n1."""
    if isinstance(alpha, RationalAlpha):
        return alpha
    need = required_bits(a.generate(n1, n1)[0])
    return alpha if alpha.bits >= need else alpha.with_bits(need)


# ---------------------------------------------------------- discrepancy


def _as_points(points) -> np.ndarray:
    if isinstance(points, OrbitSlice):
        return points.points
    return np.asarray(points, dtype=float).ravel()


def star_discrepancy(points) -> float:
    """D*_N = max_i max(i/N - x_(i), x_(i) - (i-1)/N) over the sorted points."""
    x = np.sort(_as_points(points))
    N = x.size
    if N == 0:
        raise InvalidInput("star discrepancy of an empty point set")
    i = np.arange(1, N + 1, dtype=float)
    return float(max(np.max(i / N - x), np.max(x - (i - 1) / N)))


def local_count(points, U: ArcSet) -> int:
    return int(np.count_nonzero(contains_many(U, _as_points(points))))
