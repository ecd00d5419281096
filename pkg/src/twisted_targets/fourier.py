"""
Probability measures on [0, 1] with Fourier transform
mu_hat(xi) = int exp(2 pi i x xi) dmu(x), decay-exponent estimation and
seeded sampling.

Decay exponents are reported raw: tau_hat estimates the tau in
|mu_hat(xi)| = O(|xi|**-tau). The Fourier dimension in the s/2 convention
is 2 * tau_hat (capped at 1); that conversion is left to the caller.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InvalidInput
from .orbit import FixedPointAlpha, RationalAlpha

TWO_PI = 2.0 * math.pi
TAIL_EPS = 1e-14


@dataclass(frozen=True)
class Lebesgue:
    def to_dict(self):
        return {"kind": "lebesgue"}


@dataclass(frozen=True)
class Atomic:
    points: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.points) != len(self.weights) or not self.points:
            raise InvalidInput("atomic measure needs matching nonempty points and weights")
        if any(w <= 0 for w in self.weights) or not math.isclose(math.fsum(self.weights), 1.0, abs_tol=1e-12):
            raise InvalidInput("atomic weights must be positive and sum to 1")
        if any(not 0.0 <= p <= 1.0 for p in self.points):
            raise InvalidInput("atoms must lie in [0, 1]")

    def to_dict(self):
        return {"kind": "atomic", "points": list(self.points), "weights": list(self.weights)}


@dataclass(frozen=True)
class Density:
    """
    Piecewise-polynomial density: pieces (lo, hi, coeffs) with
    p(x) = sum_k coeffs[k] x**k on [lo, hi).
    """

    pieces: tuple[tuple[float, float, tuple[float, ...]], ...]

    def __post_init__(self):
        pieces = tuple((float(lo), float(hi), tuple(float(c) for c in cs)) for lo, hi, cs in self.pieces)
        object.__setattr__(self, "pieces", pieces)
        if not pieces:
            raise InvalidInput("density needs at least one piece")
        for lo, hi, cs in pieces:
            if not 0.0 <= lo < hi <= 1.0:
                raise InvalidInput(f"piece [{lo}, {hi}) outside [0, 1]")
            grid = np.linspace(lo, hi, 257)
            if np.any(np.polynomial.polynomial.polyval(grid, cs) < -1e-12):
                raise InvalidInput("density must be nonnegative")
        total = math.fsum(_poly_integral(cs, lo, hi) for lo, hi, cs in pieces)
        if not math.isclose(total, 1.0, abs_tol=1e-12):
            raise InvalidInput(f"density integrates to {total}, not 1")

    @classmethod
    def indicator(cls, lo: float, hi: float) -> "Density":
        """Uniform density on [lo, hi)."""
        return cls(((lo, hi, (1.0 / (hi - lo),)),))

    def to_dict(self):
        return {"kind": "density", "pieces": [[lo, hi, list(cs)] for lo, hi, cs in self.pieces]}


@dataclass(frozen=True)
class SelfSimilar:
    """Law of sum_k d_k D**-k with digits d_k i.i.d. uniform on ``digits``."""

    base: int
    digits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(sorted(set(int(d) for d in self.digits))))
        if self.base < 2:
            raise InvalidInput("base must be >= 2")
        if not self.digits or any(not 0 <= d < self.base for d in self.digits):
            raise InvalidInput("digit set must be a nonempty subset of 0..base-1")

    @classmethod
    def middle_third(cls) -> "SelfSimilar":
        return cls(3, (0, 2))

    def to_dict(self):
        return {"kind": "self-similar", "base": self.base, "digits": list(self.digits)}


MeasureSpec = Lebesgue | Atomic | Density | SelfSimilar


def _poly_integral(cs, lo, hi) -> float:
    return math.fsum(c * (hi ** (k + 1) - lo ** (k + 1)) / (k + 1) for k, c in enumerate(cs))


# ------------------------------------------------------------ transforms


def _cis(turns: float) -> complex:
    """exp(2 pi i * turns)."""
    return complex(math.cos(TWO_PI * turns), math.sin(TWO_PI * turns))


def _poly_exp_integral(cs, lo: float, hi: float, w: float) -> complex:
    """int_lo^hi p(x) exp(i w x) dx."""
    if w == 0.0:
        return complex(_poly_integral(cs, lo, hi))
    if abs(w) * max(abs(lo), abs(hi)) < 1.0:
        # power series in w; terms decay faster than 1/m!
        total = 0j
        term_scale = 1.0 + 0j
        for m in range(60):
            mom = math.fsum(c * (hi ** (k + m + 1) - lo ** (k + m + 1)) / (k + m + 1)
                            for k, c in enumerate(cs))
            t = term_scale * mom
            total += t
            if m > 2 and abs(t) < 1e-18:
                break
            term_scale *= 1j * w / (m + 1)
        return total
    # antiderivative e^{iwx} sum_j (-1)^j p^{(j)}(x) / (iw)^{j+1}
    poly = np.polynomial.Polynomial(cs)

    def F(x):
        acc = 0j
        p = poly
        sign = 1.0
        iw = 1j * w
        denom = iw
        for _ in range(len(cs)):
            acc += sign * p(x) / denom
            p = p.deriv()
            sign = -sign
            denom *= iw
        return _cis(math.fmod(w / TWO_PI * x, 1.0)) * acc

    return F(hi) - F(lo)


def _self_similar_factor_terms(mu: SelfSimilar, xi: float) -> int:
    """Number of product factors so the neglected tail is below TAIL_EPS."""
    dmax = max(mu.digits)
    if dmax == 0 or xi == 0:
        return 0
    # |phi(t) - 1| <= 2 pi dmax |t|; sum over k > K of 2 pi dmax |xi| D^-k
    c = TWO_PI * dmax * abs(xi) / (mu.base - 1)
    K = 0
    while c * float(mu.base) ** -K >= TAIL_EPS:
        K += 1
    return K


def _self_similar_ft(mu: SelfSimilar, xi: float) -> tuple[complex, float]:
    K = _self_similar_factor_terms(mu, xi)
    dmax = max(mu.digits)
    D = mu.base
    integer = float(xi).is_integer()
    xi_int = int(xi) if integer else None
    prod = 1.0 + 0j
    g = len(mu.digits)
    for k in range(1, K + 1):
        s = 0j
        for d in mu.digits:
            if integer:
                q = D**k
                phase = ((d * xi_int) % q) / q
            else:
                phase = math.fmod(d * xi / D**k, 1.0)
            s += _cis(phase)
        prod *= s / g
    tail = TWO_PI * dmax * abs(xi) * float(D) ** -K / (D - 1) if K else 0.0
    err = math.expm1(tail)
    return prod, err


def fourier_transform(mu: MeasureSpec, xi: float) -> complex:
    if isinstance(mu, Lebesgue):
        if xi == 0:
            return 1 + 0j
        if float(xi).is_integer():
            return 0j
        return (_cis(math.fmod(xi, 1.0)) - 1) / (1j * TWO_PI * xi)
    if isinstance(mu, Atomic):
        return complex(sum(wt * _cis(math.fmod(p * xi, 1.0)) for p, wt in zip(mu.points, mu.weights)))
    if isinstance(mu, Density):
        w = TWO_PI * xi
        return sum((_poly_exp_integral(cs, lo, hi, w) for lo, hi, cs in mu.pieces), 0j)
    if isinstance(mu, SelfSimilar):
        return _self_similar_ft(mu, xi)[0]
    raise InvalidInput(f"unknown measure {mu!r}")


def fourier_error_bound(mu: MeasureSpec, xi: float) -> float:
    """Certified truncation error of the self-similar product (0 for closed forms)."""
    if isinstance(mu, SelfSimilar):
        return _self_similar_ft(mu, xi)[1]
    return 0.0


def fourier_many(mu: MeasureSpec, xis) -> np.ndarray:
    xis = np.asarray(xis)
    if isinstance(mu, SelfSimilar) and np.issubdtype(xis.dtype, np.integer):
        return _self_similar_many_int(mu, xis.astype(np.int64))
    return np.array([fourier_transform(mu, x) for x in xis.tolist()], dtype=complex)


def _self_similar_many_int(mu: SelfSimilar, xis: np.ndarray) -> np.ndarray:
    """Vectorized product formula for integer frequencies."""
    D = mu.base
    K = _self_similar_factor_terms(mu, float(np.max(np.abs(xis))) if xis.size else 0.0)
    g = len(mu.digits)
    prod = np.ones(xis.shape, dtype=complex)
    big = 1 << 62
    for k in range(1, K + 1):
        q = D**k
        s = np.zeros(xis.shape, dtype=complex)
        for d in mu.digits:
            if q < big:
                phase = np.mod(d * xis, q).astype(float) / float(q)
            else:
                # d * xi < q here, so the residue is d * xi itself
                phase = (d * xis).astype(float) / float(q)
            s += np.exp(1j * TWO_PI * phase)
        prod *= s / g
    return prod


# ------------------------------------------------------------ decay


@dataclass
class DecayEstimate:
    tau: float
    windows: list[tuple[int, int]]
    maxima: list[float]

    @property
    def infinite(self) -> bool:
        return math.isinf(self.tau)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["xi_lo", "xi_hi", "max_abs_ft", "fitted_slope"])
            for (lo, hi), m in zip(self.windows, self.maxima):
                w.writerow([lo, hi, repr(m), repr(-self.tau)])


def decay_exponent_estimate(mu: MeasureSpec, xi_max: int, first_window: int = 2) -> DecayEstimate:
    """
    Least-squares slope of log max_{xi in [2^i, 2^(i+1))} |mu_hat(xi)| against
    log 2^i over integer frequencies, using every whole window below xi_max. Returns tau_hat = -slope
    clamped at 0, or tau = inf when every sampled value vanishes.
    """
    if xi_max < 16:
        raise InvalidInput("xi_max must be >= 16")
    windows, maxima = [], []
    i = first_window
    while (1 << (i + 1)) <= xi_max + 1:  # whole windows only
        lo, hi = 1 << i, 1 << (i + 1)
        vals = np.abs(fourier_many(mu, np.arange(lo, hi, dtype=np.int64)))
        windows.append((lo, hi))
        maxima.append(float(vals.max()))
        i += 1
    m = np.asarray(maxima)
    if np.all(m <= 1e-15):
        return DecayEstimate(math.inf, windows, maxima)
    x = np.log([lo for lo, _ in windows])
    y = np.log(np.maximum(m, 1e-300))
    slope = float(np.polyfit(x, y, 1)[0])
    return DecayEstimate(max(0.0, -slope), windows, maxima)


# ------------------------------------------------------------ sampling


def sample(mu: MeasureSpec, count: int, seed: int) -> np.ndarray:
    """Deterministic float samples from mu."""
    if count < 1:
        raise InvalidInput("count must be >= 1")
    rng = np.random.default_rng(seed)
    if isinstance(mu, Lebesgue):
        return rng.random(count)
    if isinstance(mu, Atomic):
        idx = rng.choice(len(mu.points), size=count, p=np.asarray(mu.weights) / sum(mu.weights))
        return np.asarray(mu.points, dtype=float)[idx]
    if isinstance(mu, Density):
        return _sample_density(mu, rng, count)
    if isinstance(mu, SelfSimilar):
        return np.array([float(x) for x in sample_exact(mu, count, seed, 53)])
    raise InvalidInput(f"unknown measure {mu!r}")


def _sample_density(mu: Density, rng, count: int) -> np.ndarray:
    masses = np.array([_poly_integral(cs, lo, hi) for lo, hi, cs in mu.pieces])
    piece = rng.choice(len(masses), size=count, p=masses / masses.sum())
    u = rng.random(count)
    out = np.empty(count)
    for k, (lo, hi, cs) in enumerate(mu.pieces):
        sel = piece == k
        if not sel.any():
            continue
        anti = np.polynomial.Polynomial(cs).integ(lbnd=lo)
        target = u[sel] * masses[k]
        a = np.full(target.shape, lo)
        b = np.full(target.shape, hi)
        for _ in range(60):  # bisection on the monotone piece CDF
            mid = 0.5 * (a + b)
            low = anti(mid) < target
            a = np.where(low, mid, a)
            b = np.where(low, b, mid)
        out[sel] = 0.5 * (a + b)
    return out


def sample_exact(mu: MeasureSpec, count: int, seed: int, precision: int = 256) -> list[Fraction]:
    """
    Exact rational samples. Lebesgue: uniform dyadics with ``precision`` bits.
    SelfSimilar: random expansions with ``precision`` base-D digits.
    Other measures: the float samples, read exactly.
    """
    rng = np.random.default_rng(seed)
    if isinstance(mu, Lebesgue):
        nbytes = (precision + 7) // 8
        out = []
        for _ in range(count):
            m = int.from_bytes(rng.bytes(nbytes), "little") >> (8 * nbytes - precision)
            out.append(Fraction(m, 1 << precision))
        return out
    if isinstance(mu, SelfSimilar):
        D = mu.base
        digs = np.asarray(mu.digits, dtype=np.int64)
        out = []
        for _ in range(count):
            ds = digs[rng.integers(0, len(digs), size=precision)]
            m = 0
            for d in ds.tolist():
                m = m * D + d
            out.append(Fraction(m, D**precision))
        return out
    return [Fraction(float(x)) for x in sample(mu, count, seed)]


def sample_alphas(mu: MeasureSpec, count: int, seed: int, bits: int = 256) -> list:
    """alpha-ensembles as exact RealReps (fixed point for Lebesgue, rationals otherwise)."""
    out = []
    for f in sample_exact(mu, count, seed, bits):
        if isinstance(mu, Lebesgue):
            out.append(FixedPointAlpha(bits, f.numerator * ((1 << bits) // f.denominator), exact=True))
        else:
            out.append(RationalAlpha.of(f % 1))
    return out


def measure_from_dict(d: dict) -> MeasureSpec:
    kind = d.get("kind")
    if kind == "lebesgue":
        return Lebesgue()
    if kind == "atomic":
        return Atomic(tuple(d["points"]), tuple(d["weights"]))
    if kind == "density":
        return Density(tuple((lo, hi, tuple(cs)) for lo, hi, cs in d["pieces"]))
    if kind == "self-similar":
        return SelfSimilar(int(d["base"]), tuple(d["digits"]))
    if kind == "cantor":
        return SelfSimilar.middle_third()
    raise InvalidInput(f"unknown measure kind {kind!r}")
