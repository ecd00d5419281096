"""
Sequences a_n, approximation functions psi(n), dimension functions f, and
the series bookkeeping (Borel-Cantelli sums, critical exponents, separation
exponents) that decides which side of the convergence/divergence dichotomy
an experiment sits on.

Indices start at n = 1 everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np

from .errors import InvalidInput, Unsupported

# ---------------------------------------------------------------- sequences


def _check_range(n0: int, n1: int):
    if n0 < 1 or n1 < n0:
        raise InvalidInput(f"invalid index range [{n0}, {n1}]")


def _check_increasing(values: Sequence[int], what: str):
    if values and values[0] < 1:
        raise InvalidInput(f"{what}: values must be positive, got {values[0]}")
    for x, y in zip(values, values[1:]):
        if y <= x:
            raise InvalidInput(f"{what}: values must be strictly increasing ({x} then {y})")


@dataclass(frozen=True)
class PolynomialSequence:
    """a_n = floor(c * n**d)."""

    c: float = 1
    d: float = 1

    def __post_init__(self):
        if self.c <= 0 or self.d <= 0:
            raise InvalidInput("polynomial sequence needs c > 0 and d > 0")

    def generate(self, n0: int, n1: int) -> list[int]:
        _check_range(n0, n1)
        ns = range(n0, n1 + 1)
        c, d = self.c, self.d
        if float(d).is_integer():
            d = int(d)
            if float(c).is_integer():
                c = int(c)
                vals = [c * n**d for n in ns]
            else:
                cf = Fraction(c)
                vals = [math.floor(cf * n**d) for n in ns]
        else:
            vals = [math.floor(c * n**d) for n in ns]
        _check_increasing(vals, "polynomial sequence")
        return vals

    def to_dict(self):
        return {"family": "polynomial", "c": self.c, "d": self.d}


@dataclass(frozen=True)
class GeometricSequence:
    """a_n = floor(q * r**n) with r > 1."""

    q: float = 1
    r: float = 2

    def __post_init__(self):
        if self.r <= 1 or self.q <= 0:
            raise InvalidInput("geometric sequence needs q > 0 and r > 1")

    def generate(self, n0: int, n1: int) -> list[int]:
        _check_range(n0, n1)
        q, r = Fraction(self.q), Fraction(self.r)
        vals = [math.floor(q * r**n) for n in range(n0, n1 + 1)]
        _check_increasing(vals, "geometric sequence")
        return vals

    def to_dict(self):
        return {"family": "geometric", "q": self.q, "r": self.r}


@dataclass(frozen=True)
class TableSequence:
    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        _check_increasing(list(vals), "explicit table")

    def generate(self, n0: int, n1: int) -> list[int]:
        _check_range(n0, n1)
        if n1 > len(self.values):
            raise InvalidInput(f"table has {len(self.values)} entries, index {n1} requested")
        return list(self.values[n0 - 1:n1])

    def to_dict(self):
        return {"family": "table", "values": list(self.values)}


SequenceSpec = PolynomialSequence | GeometricSequence | TableSequence


def generate(a: SequenceSpec, n0: int, n1: int) -> list[int]:
    return a.generate(n0, n1)


def separation_exponent(a: SequenceSpec, N: int, step: float = 0.01, cap: float = 10.0):
    """
    Largest grid exponent theta with |a_m - a_n| >= c |m - n|**theta, c >= 1.

    Strictly increasing integer sequences always satisfy the inequality with
    c = 1 at theta = 0, so c >= 1 is the normalisation that makes the largest
    exponent finite. Returns (theta, c) with c the exact minimum ratio over all
    pairs 1 <= m < n <= N at that theta. The grid is capped at ``cap``.
    """
    if N < 2:
        raise InvalidInput("separation_exponent needs N >= 2")
    vals = a.generate(1, N)
    gaps = np.arange(1, N)
    # smallest log|a_m - a_n| at each index gap k
    if vals[-1] < 2**53:
        arr = np.asarray(vals, dtype=np.float64)
        min_log_diff = np.array([np.log(np.min(arr[k:] - arr[:-k])) for k in gaps])
    else:
        min_log_diff = np.array([
            min(math.log(vals[i + k] - vals[i]) for i in range(N - k)) for k in gaps
        ])
    log_gap = np.log(gaps.astype(float))
    # gap 1 has log_gap = 0 and min_log_diff >= 0, so it never binds
    limits = min_log_diff[1:] / log_gap[1:]
    theta_max = float(np.min(limits)) if limits.size else math.inf
    per_unit = round(1 / step)
    i = min(round(cap * per_unit), math.floor(theta_max * per_unit + 1e-9))
    theta = max(0, i) / per_unit
    c = math.exp(float(np.min(min_log_diff - theta * log_gap)))
    return theta, c


# ---------------------------------------------------- approximation functions


@dataclass(frozen=True)
class CriticalExponent:
    s_star: float
    at_critical: str  # "converges" | "diverges"


@dataclass(frozen=True)
class PowerPsi:
    """psi(n) = n**-sigma."""

    sigma: float

    def values(self, n0: int, n1: int) -> np.ndarray:
        n = np.arange(n0, n1 + 1, dtype=float)
        return n ** -float(self.sigma)

    def __call__(self, n: int) -> float:
        return float(n) ** -float(self.sigma)

    def critical_exponent(self) -> CriticalExponent:
        if self.sigma <= 0:
            return CriticalExponent(math.inf, "diverges")
        return CriticalExponent(1.0 / self.sigma, "diverges")

    def to_dict(self):
        return {"family": "power", "sigma": self.sigma}


@dataclass(frozen=True)
class PowerLogPsi:
    """
    psi(n) = n**-sigma * L(n)**-beta with L(n) = max(log n, 1).

    The clamp only touches n <= 2 and keeps psi finite there; tails are
    unaffected.
    """

    sigma: float
    beta: float

    def values(self, n0: int, n1: int) -> np.ndarray:
        n = np.arange(n0, n1 + 1, dtype=float)
        return n ** -float(self.sigma) * np.maximum(np.log(n), 1.0) ** -float(self.beta)

    def __call__(self, n: int) -> float:
        return float(self.values(n, n)[0])

    def critical_exponent(self) -> CriticalExponent:
        if self.sigma <= 0:
            return CriticalExponent(math.inf, "diverges")
        # at s = 1/sigma: sum n^-1 (log n)^(-beta/sigma), Bertrand series
        verdict = "converges" if self.beta / self.sigma > 1 else "diverges"
        return CriticalExponent(1.0 / self.sigma, verdict)

    def to_dict(self):
        return {"family": "power-log", "sigma": self.sigma, "beta": self.beta}


@dataclass(frozen=True)
class ExponentialPsi:
    """psi(n) = exp(-rate * n)."""

    rate: float = 1.0

    def values(self, n0: int, n1: int) -> np.ndarray:
        n = np.arange(n0, n1 + 1, dtype=float)
        return np.exp(-float(self.rate) * n)

    def __call__(self, n: int) -> float:
        return math.exp(-self.rate * n)

    def critical_exponent(self) -> CriticalExponent:
        if self.rate <= 0:
            return CriticalExponent(math.inf, "diverges")
        # every s > 0 converges; s = 0 is the constant series
        return CriticalExponent(0.0, "diverges")

    def to_dict(self):
        return {"family": "exponential", "rate": self.rate}


@dataclass(frozen=True)
class ConstantPsi:
    value: float = 0.0

    def __post_init__(self):
        if self.value < 0:
            raise InvalidInput("psi must be nonnegative")

    def values(self, n0: int, n1: int) -> np.ndarray:
        return np.full(n1 - n0 + 1, float(self.value))

    def __call__(self, n: int) -> float:
        return float(self.value)

    def critical_exponent(self) -> CriticalExponent:
        if self.value == 0:
            return CriticalExponent(0.0, "converges")
        return CriticalExponent(math.inf, "diverges")

    def to_dict(self):
        return {"family": "constant", "value": self.value}


@dataclass(frozen=True)
class TablePsi:
    """Explicit psi(1..len) values, optionally continued by a closed-form tail."""

    values_: tuple[float, ...]
    tail: object = None

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values_)
        if any(v < 0 or math.isnan(v) for v in vals):
            raise InvalidInput("psi table values must be nonnegative")
        object.__setattr__(self, "values_", vals)

    def values(self, n0: int, n1: int) -> np.ndarray:
        _check_range(n0, n1)
        k = len(self.values_)
        head = np.asarray(self.values_[n0 - 1:min(n1, k)], dtype=float)
        if n1 <= k:
            return head
        if self.tail is None:
            raise InvalidInput(f"psi table has {k} entries and no tail model; index {n1} requested")
        return np.concatenate([head, self.tail.values(max(n0, k + 1), n1)])

    def __call__(self, n: int) -> float:
        return float(self.values(n, n)[0])

    def critical_exponent(self) -> CriticalExponent:
        if self.tail is None:
            raise Unsupported("critical exponent of an explicit table needs a declared tail model")
        return self.tail.critical_exponent()

    def to_dict(self):
        d = {"family": "table", "values": list(self.values_)}
        if self.tail is not None:
            d["tail"] = self.tail.to_dict()
        return d


ApproxFunction = PowerPsi | PowerLogPsi | ExponentialPsi | ConstantPsi | TablePsi


def critical_exponent(psi: ApproxFunction) -> CriticalExponent:
    """s* = inf{s : sum psi(n)**s < inf} and the behaviour of the series at s*."""
    return psi.critical_exponent()


def series_verdict(psi: ApproxFunction, s: float) -> str:
    """Whether sum psi(n)**s converges, from the closed-form critical exponent."""
    ce = critical_exponent(psi)
    if math.isclose(s, ce.s_star, rel_tol=1e-12, abs_tol=1e-15):
        return ce.at_critical
    return "converges" if s > ce.s_star else "diverges"


def power_tail_sum(p: float, N: int) -> float:
    """sum_{n >= N} n**-p for p > 1 (Hurwitz zeta)."""
    if p <= 1:
        return math.inf
    return float(mpmath.zeta(p, N))


def integral_test_threshold(p: float, eps: float) -> float:
    """N with int_N^inf x**-p dx = eps, i.e. N**(1-p) / (p-1) = eps."""
    return (eps * (p - 1)) ** (-1.0 / (p - 1))


def tail_threshold(p: float, eps: float) -> int:
    """Smallest N with sum_{n >= N} n**-p < eps, by bisection on the exact tail."""
    if p <= 1:
        raise InvalidInput("tail of a divergent power series never drops")
    hi = 1
    while power_tail_sum(p, hi) >= eps:
        hi *= 2
    lo = hi // 2 if hi > 1 else 0
    while hi - lo > 1:  # tail(lo) >= eps > tail(hi)
        mid = (lo + hi) // 2
        if power_tail_sum(p, mid) < eps:
            hi = mid
        else:
            lo = mid
    return hi


# ------------------------------------------------------ dimension functions


@dataclass(frozen=True)
class PowerDim:
    """f(x) = x**s."""

    s: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(x > 0, np.abs(x) ** self.s, 0.0)
        return float(out) if out.ndim == 0 else out

    def to_dict(self):
        return {"family": "power", "s": self.s}


IDENTITY = PowerDim(1.0)


@dataclass(frozen=True)
class TableDim:
    """Piecewise-linear interpolation through (0, 0) and the given knots."""

    xs: tuple[float, ...]
    ys: tuple[float, ...]

    def __post_init__(self):
        if len(self.xs) != len(self.ys) or not self.xs:
            raise InvalidInput("dimension-function table needs matching nonempty xs, ys")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])) or self.xs[0] <= 0:
            raise InvalidInput("dimension-function knots must be positive and increasing")

    def __call__(self, x):
        xs = np.concatenate([[0.0], self.xs])
        ys = np.concatenate([[0.0], self.ys])
        out = np.interp(np.asarray(x, dtype=float), xs, ys)
        return float(out) if np.ndim(out) == 0 else out

    def to_dict(self):
        return {"family": "table", "xs": list(self.xs), "ys": list(self.ys)}


@dataclass(frozen=True)
class CallableDim:
    fn: Callable = field(compare=False)
    name: str = "callable"

    def __call__(self, x):
        return self.fn(x)

    def to_dict(self):
        return {"family": "callable", "name": self.name}


@dataclass
class Verdict:
    passed: bool
    failures: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.passed


def check_dimension_function(f, grid, rtol: float = 1e-12) -> Verdict:
    """Grid certificate for: f nondecreasing, f(x) -> 0 as x -> 0, x**-1 f(x) monotone."""
    x = np.sort(np.asarray(grid, dtype=float))
    if x.size < 2 or x[0] <= 0:
        raise InvalidInput("grid needs at least two positive points")
    y = np.asarray(f(x), dtype=float)
    failures = []
    if np.any(y < 0):
        failures.append("negative value on grid")
    slack = rtol * np.maximum(np.abs(y[1:]), np.abs(y[:-1]))
    drops = np.flatnonzero(y[1:] < y[:-1] - slack)
    if drops.size:
        i = drops[0]
        failures.append(f"decreases between x={x[i]:.6g} and x={x[i + 1]:.6g}")
    probe = 2.0 ** -np.arange(10, 1001, 10, dtype=float)
    near0 = np.asarray(f(probe), dtype=float)
    scale = max(float(np.max(np.abs(y))), 1e-300)
    if np.any(np.diff(near0) > rtol * np.abs(near0[:-1])) or near0[-1] > 1e-2 * scale:
        failures.append("f(x) does not tend to 0 as x -> 0")
    ratio = y / x
    d = np.diff(ratio)
    tol = rtol * np.maximum(np.abs(ratio[1:]), np.abs(ratio[:-1]))
    if not (np.all(d >= -tol) or np.all(d <= tol)):
        failures.append("x**-1 f(x) is not monotone on the grid")
    return Verdict(not failures, failures)


def bc_sum(psi: ApproxFunction, f=None, n0: int = 1, n1: int = 1) -> float:
    """Compensated sum of f(psi(n)) over n0..n1 (f defaults to the identity)."""
    _check_range(n0, n1)
    v = psi.values(n0, n1)
    if f is not None:
        v = np.asarray(f(v), dtype=float)
    return math.fsum(v.tolist())


# -------------------------------------------------------------- from dicts


def sequence_from_dict(d: dict) -> SequenceSpec:
    fam = d.get("family")
    if fam == "polynomial":
        return PolynomialSequence(d.get("c", 1), d.get("d", 1))
    if fam == "geometric":
        return GeometricSequence(d.get("q", 1), d.get("r", 2))
    if fam == "table":
        return TableSequence(tuple(d["values"]))
    raise InvalidInput(f"unknown sequence family {fam!r}")


def psi_from_dict(d: dict) -> ApproxFunction:
    fam = d.get("family")
    if fam == "power":
        return PowerPsi(d["sigma"])
    if fam == "power-log":
        return PowerLogPsi(d["sigma"], d.get("beta", 0.0))
    if fam == "exponential":
        return ExponentialPsi(d.get("rate", 1.0))
    if fam == "constant":
        return ConstantPsi(d.get("value", 0.0))
    if fam == "table":
        tail = psi_from_dict(d["tail"]) if d.get("tail") else None
        return TablePsi(tuple(d["values"]), tail)
    raise InvalidInput(f"unknown psi family {fam!r}")


def dimension_from_dict(d: dict | None):
    if d is None:
        return IDENTITY
    fam = d.get("family")
    if fam == "power":
        return PowerDim(d.get("s", 1.0))
    if fam == "table":
        return TableDim(tuple(d["xs"]), tuple(d["ys"]))
    raise InvalidInput(f"unknown dimension-function family {fam!r}")
