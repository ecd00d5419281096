"""
Experiment kinds. Each runner turns a resolved ExperimentConfig into result
tables and verdicts by calling module operations; the report writer turns
those into report.json plus one CSV per table.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fourier, independence, model, moments, orbit, targets
from . import torus_arcs as ta
from .config import SCHEMA_VERSION, ConfigError, ExperimentConfig
from .model import PowerDim, PowerPsi
from .targets import TargetFamily


def stream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for one task, keyed by (seed, *key)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    plot: bool = False

    def add(self, *row):
        self.rows.append(list(row))


@dataclass
class Report:
    kind: str
    config: dict
    seed: int
    tables: dict[str, Table] = field(default_factory=dict)
    verdicts: dict[str, bool] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    @property
    def experiment_id(self) -> str:
        blob = json.dumps({"config": self.config, "seed": self.seed}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment_id": self.experiment_id,
            "kind": self.kind,
            "seed": self.seed,
            "config": self.config,
            "tables": {k: {"columns": t.columns, "rows": [[_jsonable(v) for v in r] for r in t.rows]}
                       for k, t in self.tables.items()},
            "verdicts": self.verdicts,
            "passed": self.passed,
            "notes": self.notes,
            "timing": {"seconds": round(self.seconds, 3)},
        }


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    return v


def _cell(v) -> str:
    v = _jsonable(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_report(report: Report, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
    for name, t in report.tables.items():
        targets_ = [out / f"{name}.csv"]
        if t.plot and report.config.get("outputs", {}).get("plot"):
            (out / "plot").mkdir(exist_ok=True)
            targets_.append(out / "plot" / f"{name}.csv")
        for path in targets_:
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(t.columns)
                for r in t.rows:
                    w.writerow([_cell(v) for v in r])
    return out / "report.json"


def _pmap(fn, items, threads: int):
    items = list(items)
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _need_psi(cfg: ExperimentConfig):
    if cfg.psi is None:
        raise ConfigError("psi", f"experiment kind {cfg.kind!r} needs a psi specification")
    return cfg.psi


def _families(cfg: ExperimentConfig) -> list[TargetFamily]:
    psi = _need_psi(cfg)
    return [TargetFamily(a, cfg.sequence, psi) for a in cfg.alphas]


# ------------------------------------------------------------------ kinds


def run_orbit(cfg, rep, threads):
    n0, n1 = int(cfg.params.get("N0", 1)), int(cfg.params.get("N1", 1000))
    t = rep.tables["orbit"] = Table(["sample", "n", "a_n", "x_n"])
    bounds = []
    slices = _pmap(lambda a: orbit.orbit_points(orbit.auto_precision(a, cfg.sequence, n1), cfg.sequence, n0, n1),
                   cfg.alphas, threads)
    for i, s in enumerate(slices):
        bounds.append(s.error_bound)
        for n, a, x in zip(range(n0, n1 + 1), s.a_values, s.points.tolist()):
            t.add(i, n, a, x)
    rep.tables["error_bounds"] = Table(["sample", "error_bound"], [[i, b] for i, b in enumerate(bounds)])
    rep.verdicts["error_bound_le_2^-64"] = all(b <= orbit.ERROR_TARGET for b in bounds)


def run_discrepancy(cfg, rep, threads):
    Ns = [int(n) for n in cfg.params.get("Ns", [100, 1000, 10000])]
    t = rep.tables["discrepancy"] = Table(["sample", "N", "D_star"], plot=True)

    def one(a):
        s = orbit.orbit_points(orbit.auto_precision(a, cfg.sequence, max(Ns)), cfg.sequence, 1, max(Ns))
        return [orbit.star_discrepancy(s.points[:N]) for N in Ns]

    for i, ds in enumerate(_pmap(one, cfg.alphas, threads)):
        for N, d in zip(Ns, ds):
            t.add(i, N, d)
    if "max_discrepancy" in cfg.params:
        thr = float(cfg.params["max_discrepancy"])
        rep.verdicts["discrepancy_below_threshold"] = all(r[2] <= thr for r in t.rows)


def _random_pairs(rng, count: int, n_max: int, a) -> list[tuple[int, int]]:
    pairs = []
    while len(pairs) < count:
        m, n = sorted(int(x) for x in rng.integers(1, n_max + 1, size=2))
        if m != n and a.generate(m, m)[0] != a.generate(n, n)[0]:
            pairs.append((m, n))
    return pairs


def run_independence(cfg, rep, threads):
    psi = _need_psi(cfg)
    p = cfg.params
    if "pairs" in p:
        pairs = [tuple(x) for x in p["pairs"]]
    else:
        pairs = _random_pairs(stream(cfg.seed, 1), int(p.get("random_pairs", 100)),
                              int(p.get("n_max", 1000)), cfg.sequence)
    res = independence.independence_report(cfg.sequence, psi, pairs)
    t = rep.tables["independence"] = Table(["m", "n", "computed", "expected", "deviation"])
    for r in res.rows:
        t.add(r.m, r.n, r.computed, r.expected, r.deviation)
    if res.degenerate:
        rep.notes.append(f"excluded {len(res.degenerate)} pairs with a_m = a_n")
    rep.verdicts["max_deviation_within_tol"] = res.max_deviation <= cfg.tolerances["independence"]
    mc = p.get("monte_carlo")
    if mc:
        samples = int(mc.get("samples", 10**7))
        mt = rep.tables["independence_mc"] = Table(["m", "n", "exact", "monte_carlo", "stderr", "z"])
        rows = res.rows[: int(mc.get("pairs", 5))]

        def one(k):
            r = rows[k]
            em = independence.StripEvent.of(r.m, cfg.sequence.generate(r.m, r.m)[0], psi(r.m))
            en = independence.StripEvent.of(r.n, cfg.sequence.generate(r.n, r.n)[0], psi(r.n))
            return independence.strip_intersection_monte_carlo(em, en, samples, stream(cfg.seed, 2, k),
                                                               stratified=bool(mc.get("stratified", True)))

        for r, (est, se) in zip(rows, _pmap(one, range(len(rows)), threads)):
            z = (est - r.computed) / se if se > 0 else (0.0 if est == r.computed else math.inf)
            mt.add(r.m, r.n, r.computed, est, se, z)
        rep.verdicts["monte_carlo_within_3_sigma"] = all(abs(r[5]) <= 3 for r in mt.rows)


def run_chung_erdos(cfg, rep, threads):
    fams = _families(cfg)
    tol = cfg.tolerances["chung_erdos"]
    t = rep.tables["chung_erdos"] = Table(["sample", "j", "window", "bound", "actual", "bound_le_actual"])
    m = rep.tables["block_moments"] = Table(["sample", "j", "S", "C", "ratio", "C_ge_S2"])

    def one(T):
        out, mom = [], []
        for j in cfg.blocks:
            blk = cfg.scheme.block(j)
            for name, U in cfg.windows:
                ce = moments.chung_erdos(T, blk, U)
                out.append((j, name, ce.bound, ce.actual, ce.bound <= ce.actual + tol))
            S = moments.block_S(T, blk)
            C = moments.block_C(T, *blk)
            mom.append((j, S, C, C / (S * S) if S else math.nan, C >= S * S * (1 - 1e-12)))
        return out, mom

    for i, (out, mom) in enumerate(_pmap(one, fams, threads)):
        for row in out:
            t.add(i, *row)
        for row in mom:
            m.add(i, *row)
    rep.verdicts["bound_le_actual"] = all(r[5] for r in t.rows)
    rep.verdicts["C_ge_S_squared"] = all(r[5] for r in m.rows)


def run_moments(cfg, rep, threads):
    fams = _families(cfg)
    summary = moments.gp_ensemble(fams, cfg.scheme, cfg.blocks, threads)
    t = rep.tables["gp_ratio"] = Table(["sample", "j", "ratio"])
    for i, row in enumerate(summary.ratios.tolist()):
        for j, r in zip(summary.blocks, row):
            t.add(i, j, r)
    rep.tables["gp_summary"] = Table(["median_max_ratio", "p90_max_ratio"], [[summary.median, summary.p90]])
    mk = rep.tables["markov"] = Table(["p", "j", "mean_ratio", "fraction", "markov_floor"])
    for d in summary.markov:
        mk.add(d["p"], d["j"], d["mean_ratio"], d["fraction"], d["markov_floor"])
    finite = summary.ratios[~np.isnan(summary.ratios)]
    rep.verdicts["ratio_ge_1"] = bool(np.all(finite >= 1 - 1e-12))
    rep.verdicts["median_finite"] = math.isfinite(summary.median)
    rep.verdicts["p90_le_10x_median"] = summary.p90 <= 10 * summary.median
    rep.verdicts["markov_floor_respected"] = all(d["fraction"] >= d["markov_floor"] for d in summary.markov)


def _f(cfg):
    return cfg.dimension if "dimension" in cfg.raw else None


def run_tail_union(cfg, rep, threads):
    fams = _families(cfg)
    f = _f(cfg)
    t = rep.tables["tail_union"] = Table(["sample", "N", "M", "measure"], plot=True)
    res = _pmap(lambda T: [targets.tail_union_measure(T, n, m, f) for n, m in cfg.schedule], fams, threads)
    for i, ms in enumerate(res):
        for (n, m), x in zip(cfg.schedule, ms):
            t.add(i, n, m, x)
    rep.verdicts["full_measure"] = all(r[3] >= 1 - cfg.tolerances["full_measure"] for r in t.rows)


def run_limsup_profile(cfg, rep, threads):
    fams = _families(cfg)
    f = _f(cfg)
    tol = cfg.tolerances["full_measure"]
    t = rep.tables["limsup_profile"] = Table(["sample", "N", "M", "measure"], plot=True)
    v = rep.tables["limsup_verdicts"] = Table(["sample", "full_measure_consistent"])
    res = _pmap(lambda T: targets.limsup_profile(T, cfg.schedule, tol, f), fams, threads)
    for i, prof in enumerate(res):
        for (n, m), x in zip(prof.windows, prof.measures):
            t.add(i, n, m, x)
        v.add(i, prof.full_measure_consistent)
    rep.verdicts["full_measure_consistent"] = all(r[1] for r in v.rows)


def run_hit_count(cfg, rep, threads):
    fams = _families(cfg)
    N = int(cfg.params.get("N", 10**5))
    gammas = stream(cfg.seed, 3).random(len(fams)).tolist()
    t = rep.tables["hit_count"] = Table(["sample", "gamma", "N", "count", "expected", "ratio"])
    res = _pmap(lambda k: targets.hit_count(fams[k], gammas[k], N), range(len(fams)), threads)
    for i, (g, h) in enumerate(zip(gammas, res)):
        t.add(i, g, N, h.count, h.expected, h.ratio)
    lo, hi = cfg.tolerances["hit_ratio_lo"], cfg.tolerances["hit_ratio_hi"]
    inside = sum(lo <= r[5] <= hi for r in t.rows)
    rep.tables["hit_summary"] = Table(["pairs", "inside_band"], [[len(t.rows), inside]])
    rep.verdicts["hit_ratio_band"] = inside >= cfg.tolerances["hit_fraction"] * len(t.rows)


def run_local_density(cfg, rep, threads):
    fams = _families(cfg)
    n, m = cfg.schedule[0]
    names = [w[0] for w in cfg.windows]
    Us = [w[1] for w in cfg.windows]
    t = rep.tables["local_density"] = Table(["sample", "window", "lambda_U", "ratio", "fitted_Cp"])
    res = _pmap(lambda T: targets.local_density(T, n, m, Us, _f(cfg)), fams, threads)
    for i, ratios in enumerate(res):
        for name, U, r in zip(names, Us, ratios):
            lam = ta.measure(U)
            # ratio >= lambda(U) / C'p  <=>  C'p >= lambda(U) / ratio
            t.add(i, name, lam, r, lam / r if r > 0 else math.inf)
    rep.verdicts["ratios_positive"] = all(r[3] > 0 for r in t.rows)


def run_equid_ratio(cfg, rep, threads):
    fams = _families(cfg)
    t = rep.tables["equid_ratio"] = Table(["sample", "j", "window", "ratio", "implied_C"])

    def one(T):
        out = []
        for j in cfg.blocks:
            for name, U in cfg.windows:
                r = targets.equid_ratio(T, cfg.scheme.block(j), U)
                out.append((j, name, r, 1.0 / r if 0 < r < 1 else 1.0))
        return out

    for i, rows in enumerate(_pmap(one, fams, threads)):
        for row in rows:
            t.add(i, *row)
    band = cfg.params.get("band")
    if band:
        rep.verdicts["ratio_in_band"] = all(band[0] <= r[3] <= band[1] for r in t.rows)


def run_critical_exponent(cfg, rep, threads):
    t = rep.tables["critical_exponent"] = Table(["psi", "s_star", "at_critical"])
    if "sigmas" in cfg.params or cfg.psi is None:
        psis = [PowerPsi(float(s)) for s in cfg.params.get("sigmas", [1, 1.5, 2, 3])]
    else:
        psis = [cfg.psi]
    for psi in psis:
        ce = model.critical_exponent(psi)
        t.add(json.dumps(psi.to_dict(), sort_keys=True), ce.s_star, ce.at_critical)
    rep.verdicts["power_family_is_inverse_sigma"] = all(
        model.critical_exponent(p).s_star == 1.0 / p.sigma for p in psis if isinstance(p, PowerPsi) and p.sigma > 0
    )


def run_separation(cfg, rep, threads):
    Ns = [int(n) for n in cfg.params.get("Ns", [cfg.params.get("N", 100)])]
    t = rep.tables["separation"] = Table(["N", "theta", "c"])
    for N in Ns:
        theta, c = model.separation_exponent(cfg.sequence, N)
        t.add(N, theta, c)
    if "min_theta" in cfg.params:
        rep.verdicts["theta_at_least"] = all(r[1] >= cfg.params["min_theta"] for r in t.rows)


DEFAULT_MEASURES = [{"kind": "lebesgue"}, {"kind": "cantor"},
                    {"kind": "density", "pieces": [[0.0, 0.5, [2.0]]]}]


def run_fourier_decay(cfg, rep, threads):
    xi_max = int(cfg.params.get("xi_max", 4096))
    specs = cfg.params.get("measures", DEFAULT_MEASURES)
    w = rep.tables["fourier_windows"] = Table(["measure", "xi_lo", "xi_hi", "max_abs_ft"], plot=True)
    s = rep.tables["fourier_decay"] = Table(["measure", "tau_hat", "fourier_dim_2tau"])

    def one(spec):
        return fourier.decay_exponent_estimate(fourier.measure_from_dict(spec), xi_max)

    for spec, est in zip(specs, _pmap(one, specs, threads)):
        name = json.dumps(spec, sort_keys=True)
        for (lo, hi), mx in zip(est.windows, est.maxima):
            w.add(name, lo, hi, mx)
        s.add(name, est.tau, min(1.0, 2 * est.tau))


def jarnik_table(cfg, rep, threads):
    """
    For psi = n**-sigma and f = x**s: analytic verdict of sum f(psi(n)),
    exact tails at increasing N (convergent side) and tail-union measures of
    the B^f family (divergent side).
    """
    p = cfg.params
    sigmas = [float(x) for x in p.get("sigmas", [1, 1.5, 2, 3])]
    Ns = [int(n) for n in p.get("tail_Ns", [10**2, 10**3, 10**4, 10**5])]
    eps = float(p.get("tail_eps", 1e-3))
    check_union = bool(p.get("union_check", True))
    tol = cfg.tolerances["full_measure"]
    t = rep.tables["jarnik"] = Table(["sigma", "s", "exponent", "verdict"] + [f"tail_N{n}" for n in Ns]
                                     + ["N_integral_test", "N_actual", "min_union_measure"])
    for sigma in sigmas:
        psi = PowerPsi(sigma)
        s_list = p.get("s_values") or [1 / sigma, 1 / sigma + 0.1]
        for s in s_list:
            s = float(s)
            expo = sigma * s
            verdict = model.series_verdict(psi, s)
            tails = [model.power_tail_sum(expo, n) for n in Ns]
            if verdict == "converges":
                n_pred = model.integral_test_threshold(expo, eps)
                n_act = model.tail_threshold(expo, eps)
                union = math.nan
            else:
                n_pred = n_act = math.nan
                union = math.nan
                if check_union:
                    fams = [TargetFamily(a, cfg.sequence, psi) for a in cfg.alphas]
                    f = PowerDim(s)
                    vals = _pmap(lambda T: min(targets.tail_union_measure(T, n, m, f) for n, m in cfg.schedule),
                                 fams, threads)
                    union = min(vals)
            t.add(sigma, s, expo, verdict, *tails, n_pred, n_act, union)
    conv = [r for r in t.rows if r[3] == "converges"]
    div = [r for r in t.rows if r[3] == "diverges"]
    k = 4 + len(Ns)
    rep.verdicts["integral_test_within_factor_2"] = all(0.5 <= float(r[k + 1]) / r[k] <= 2 for r in conv)
    if check_union:
        rep.verdicts["divergent_side_full_measure"] = all(r[k + 2] >= 1 - tol for r in div)


RUNNERS = {
    "orbit": run_orbit,
    "discrepancy": run_discrepancy,
    "independence": run_independence,
    "chung-erdos": run_chung_erdos,
    "moments": run_moments,
    "tail-union": run_tail_union,
    "limsup-profile": run_limsup_profile,
    "hit-count": run_hit_count,
    "local-density": run_local_density,
    "equid-ratio": run_equid_ratio,
    "critical-exponent": run_critical_exponent,
    "separation": run_separation,
    "fourier-decay": run_fourier_decay,
    "jarnik-table": jarnik_table,
}


def run(cfg: ExperimentConfig, threads: int = 1) -> Report:
    rep = Report(cfg.kind, cfg.raw, cfg.seed)
    t0 = time.perf_counter()
    RUNNERS[cfg.kind](cfg, rep, threads)
    rep.seconds = time.perf_counter() - t0
    return rep
