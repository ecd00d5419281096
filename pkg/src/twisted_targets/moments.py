"""
Second-moment bookkeeping on dyadic blocks [n_j, n_{j+1}), n_j = 2**k_j:
block masses S_j, pair-overlap sums C_j(alpha) (diagonal included), the
Chung-Erdos lower bound for the block union, and ensemble statistics of the
ratio C_j / S_j**2.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import torus_arcs as ta
from .errors import InvalidInput
from .targets import TargetFamily
from .torus_arcs import HALF, ArcSet

PAIR_CHUNK = 4_000_000


@dataclass(frozen=True)
class BlockScheme:
    exponents: tuple[int, ...]

    def __post_init__(self):
        ks = tuple(int(k) for k in self.exponents)
        if len(ks) < 2 or ks[0] < 0 or any(b <= a for a, b in zip(ks, ks[1:])):
            raise InvalidInput("block exponents must be >= 0 and strictly increasing")
        object.__setattr__(self, "exponents", ks)

    @classmethod
    def dyadic(cls, last_block: int) -> "BlockScheme":
        """k_j = j, so block j is [2**j, 2**(j+1)) for j = 0..last_block."""
        return cls(tuple(range(last_block + 2)))

    @property
    def boundaries(self) -> list[int]:
        return [1 << k for k in self.exponents]

    def __len__(self):
        return len(self.exponents) - 1

    def block(self, j: int) -> tuple[int, int]:
        if not 0 <= j < len(self):
            raise InvalidInput(f"block {j} outside scheme with {len(self)} blocks")
        return 1 << self.exponents[j], 1 << self.exponents[j + 1]


def _forward_pairs(c: np.ndarray, r: np.ndarray):
    """
    Yield (i, j_ext) index chunks for centres sorted ascending.

    j_ext runs over i+1 .. i+K-1 in the doubled array (c, c+1), restricted
    to forward gaps below r_i + max(r). Each unordered pair {k, l} shows up
    once per direction, with gaps t and 1 - t; on the circle the overlap of
    two arcs of radius <= 1/2 is exactly g(t) + g(1 - t), so summing the
    forward term over all such pairs counts each unordered overlap once.
    """
    K = c.size
    ext = np.concatenate([c, c + 1.0])
    reach = np.searchsorted(ext, c + r + r.max(), side="left")
    stop = np.minimum(reach, np.arange(K) + K)
    counts = np.maximum(stop - np.arange(K) - 1, 0)
    start = 0
    while start < K:
        cum = np.cumsum(counts[start:])
        end = start + max(1, int(np.searchsorted(cum, PAIR_CHUNK, side="right")))
        cnt = counts[start:end]
        total = int(cnt.sum())
        if total:
            I = np.repeat(np.arange(start, end), cnt)
            offs = np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt)
            yield I, I + 1 + offs
        start = end


def pair_overlap_sum(centers, radii, U: ArcSet | None = None) -> tuple[float, float]:
    """
    (diagonal, upper) where diagonal = sum_k lambda(B_k & U) and
    upper = sum_{k<l} lambda(B_k & B_l & U). U defaults to the whole circle.
    """
    c = np.asarray(centers, dtype=float)
    r = np.minimum(np.asarray(radii, dtype=float), HALF)
    keep = r > 0
    c, r = c[keep], r[keep]
    if c.size == 0:
        return 0.0, 0.0
    order = np.argsort(c, kind="stable")
    c, r = c[order], r[order]
    if U is None or U.is_full():
        diag = math.fsum((2.0 * r).tolist())
    else:
        diag = math.fsum(ta.lifted_overlaps(U, c - r, c + r).tolist())
    ext_c = np.concatenate([c, c + 1.0])
    ext_r = np.concatenate([r, r])
    parts = []
    for I, J in _forward_pairs(c, r):
        ci, ri = c[I], r[I]
        cj, rj = ext_c[J], ext_r[J]
        lo = np.maximum(ci - ri, cj - rj)
        hi = np.minimum(ci + ri, cj + rj)
        if U is None or U.is_full():
            ov = np.clip(hi - lo, 0.0, None)
        else:
            live = hi > lo
            ov = np.zeros(lo.size)
            ov[live] = ta.lifted_overlaps(U, lo[live], hi[live])
        parts.append(math.fsum(ov.tolist()))
    return diag, math.fsum(parts)


def block_S(T: TargetFamily, block: tuple[int, int]) -> float:
    """sum of lambda(B_k) = min(1, 2 psi(k)) over k in [lo, hi); alpha plays no role."""
    lo, hi = block
    if hi <= lo or lo < 1:
        raise InvalidInput(f"invalid block [{lo}, {hi})")
    return math.fsum(np.minimum(1.0, 2.0 * np.asarray(T.psi.values(lo, hi - 1))).tolist())


def block_C(T: TargetFamily, m: int, n: int, U: ArcSet | None = None) -> float:
    """sum over m <= k, l < n of lambda(B_k & B_l (& U)), diagonal included."""
    if not 1 <= m < n:
        raise InvalidInput(f"block_C needs 1 <= m < n, got {m}, {n}")
    diag, upper = pair_overlap_sum(T.centers(m, n - 1), T.radii(m, n - 1), U)
    return diag + 2.0 * upper


@dataclass(frozen=True)
class ChungErdos:
    bound: float
    actual: float
    numerator: float
    denominator: float


def chung_erdos(T: TargetFamily, block: tuple[int, int], U: ArcSet | None = None) -> ChungErdos:
    """
    Second-moment lower bound for lambda(union_k B_k & U):
    (sum_k lambda(B_k & U))**2 / sum_{k,l} lambda(B_k & B_l & U).
    """
    lo, hi = block
    c, r = T.centers(lo, hi - 1), T.radii(lo, hi - 1)
    diag, upper = pair_overlap_sum(c, r, U)
    den = diag + 2.0 * upper
    bound = 0.0 if diag == 0 else diag * diag / den
    union = ta.union_of_balls(c, r)
    if U is not None and not U.is_full():
        union = ta.intersect(union, U)
    return ChungErdos(bound, ta.measure(union), diag, den)


@dataclass
class MomentReport:
    j: int
    lo: int
    hi: int
    S: float
    C: float
    ratio: float
    union: float
    bound: float

    def row(self) -> dict:
        return asdict(self)


def moment_report(T: TargetFamily, j: int, block: tuple[int, int]) -> MomentReport | None:
    S = block_S(T, block)
    if S == 0:
        return None
    ce = chung_erdos(T, block)
    return MomentReport(j, block[0], block[1], S, ce.denominator, ce.denominator / (S * S),
                        ce.actual, ce.bound)


def gp_ratio(T: TargetFamily, scheme: BlockScheme, blocks: Sequence[int] | int) -> list[MomentReport]:
    """Per-block C_j(alpha) / S_j**2. Blocks with S_j = 0 are skipped."""
    if isinstance(blocks, int):
        if blocks < 1:
            raise InvalidInput("need at least one block")
        blocks = range(blocks)
    out = []
    for j in blocks:
        rep = moment_report(T, j, scheme.block(j))
        if rep is not None:
            out.append(rep)
    return out


@dataclass
class EnsembleSummary:
    blocks: list[int]
    ratios: np.ndarray  # samples x blocks
    max_ratio: np.ndarray
    median: float
    p90: float
    markov: list[dict]


def gp_ensemble(families: Sequence[TargetFamily], scheme: BlockScheme, blocks: Sequence[int],
                threads: int = 1, ps: Sequence[float] = (2.0, 5.0, 10.0)) -> EnsembleSummary:
    """
    Ratios C_j(alpha)/S_j**2 over an alpha-ensemble. For each p the table
    compares the empirical fraction of samples with ratio_j <= p * mean_j
    against the Markov floor 1 - 1/p, block by block.
    """
    blocks = list(blocks)

    def one(T):
        reps = {r.j: r.ratio for r in gp_ratio(T, scheme, blocks)}
        return [reps.get(j, math.nan) for j in blocks]

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(one, families))
    else:
        rows = [one(T) for T in families]
    ratios = np.asarray(rows, dtype=float)
    mx = np.nanmax(ratios, axis=1)
    markov = []
    for p in ps:
        for col, j in enumerate(blocks):
            v = ratios[:, col]
            v = v[~np.isnan(v)]
            if v.size == 0:
                continue
            mean = float(np.mean(v))
            frac = float(np.mean(v <= p * mean))
            markov.append({"p": p, "j": j, "mean_ratio": mean, "fraction": frac,
                           "markov_floor": 1.0 - 1.0 / p})
    return EnsembleSummary(blocks, ratios, mx, float(np.median(mx)),
                           float(np.quantile(mx, 0.9)), markov)
