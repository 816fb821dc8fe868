"""Sampling, replicated Monte Carlo experiments and their reports.

Two sampling modes are offered. ``q-native`` draws ``X`` from the discrete
measure the Jackson integral puts on the grid ``{+-q^k nu}`` (the model
density is first divided by its Jackson mass);
``classical-limit`` draws ``X`` from the continuous design density (inverse
CDF when the model provides one, rejection sampling otherwise). In both modes
``Y = r(X) + noise``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .errors import DomainError, InvalidDensity, ParameterError, QKernelError
from .estim import EstimatorConfig, Sample, default_bandwidth, default_floor, estimate_regression, sup_error
from .kernels import QKernel, make_kernel
from .models import get_model
from .qcalc import evaluate, jackson_integral
from .qcore import DEFAULT_POLICY, QLike, QParam, SeriesPolicy, as_qparam
from . import theory

Q_NATIVE = "q-native"
CLASSICAL = "classical-limit"
CHECKS = ("bias", "normality", "rate", "lyapunov", "bernstein")


class ConfigError(ParameterError):
    """An experiment configuration is invalid."""


# --------------------------------------------------------------------------- sampling


@dataclass(frozen=True)
class QSampler:
    """Categorical law on the truncated Jackson grid ``{+-q^k nu}``."""

    q: QParam
    grid_points: np.ndarray
    masses: np.ndarray
    rng_seed: int
    raw_mass: float
    _cdf: np.ndarray = field(repr=False, compare=False, default=None)

    def draw(self, size: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        """``size`` draws; without ``rng`` a fresh generator seeded with ``rng_seed`` is used."""
        rng = rng if rng is not None else np.random.default_rng(self.rng_seed)
        idx = np.searchsorted(self._cdf, rng.random(int(size)), side="right")
        return self.grid_points[np.minimum(idx, self.grid_points.size - 1)]

    def expectation(self, fn: Callable) -> float:
        return float(np.dot(self.masses, evaluate(fn, self.grid_points)))


def build_sampler(f: Callable, q: QLike, policy: SeriesPolicy = DEFAULT_POLICY, seed: int = 0) -> QSampler:
    """Sampler with mass ``(1-q) q^k nu f(+-q^k nu)`` at ``+-q^k nu``, renormalized.

    The grid stops once ``q^k < policy.tol`` (or at ``policy.max_terms``).
    """
    qp = as_qparam(q)
    count = min(int(math.ceil(math.log(policy.tol) / math.log(qp.q))) + 1, int(policy.max_terms))
    w = qp.q ** np.arange(count, dtype=float)
    pos = w * qp.nu
    points = np.concatenate([-pos[::-1], pos])
    vals = evaluate(f, points)
    if np.any(vals < 0) or not np.all(np.isfinite(vals)):
        raise InvalidDensity("density must be finite and nonnegative on [-nu, nu]")
    masses = (1.0 - qp.q) * np.concatenate([pos[::-1], pos]) * vals
    raw = math.fsum(masses)
    if abs(raw - 1.0) > 0.01:
        raise InvalidDensity(f"Jackson mass of the density is {raw:.6g}, not 1 within 0.01")
    masses = masses / raw
    cdf = np.cumsum(masses)
    cdf[-1] = 1.0
    return QSampler(qp, points, masses, int(seed), raw, cdf)


def _envelope(model):
    lo, hi = model.support
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DomainError("rejection sampling needs a bounded support")
    top = float(np.max(evaluate(model.f, np.linspace(lo, hi, 4001))))
    return lo, hi, 1.1 * top


def draw_design(model: theory.TargetModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Continuous draws of ``X`` from the model density."""
    if model.ppf is not None:
        return np.asarray(model.ppf(rng.random(n)), dtype=float)
    lo, hi, top = _envelope(model)
    out = np.empty(0)
    while out.size < n:
        m = 2 * (n - out.size) + 16
        x = rng.uniform(lo, hi, m)
        keep = rng.uniform(0.0, top, m) < evaluate(model.f, x)
        out = np.concatenate([out, x[keep]])
    return out[:n]


def draw_sample(model: theory.TargetModel, n: int, rng: np.random.Generator, sampler: QSampler | None = None) -> Sample:
    xs = sampler.draw(n, rng) if sampler is not None else draw_design(model, n, rng)
    if model.noise is not None:
        eps = np.asarray(model.noise(rng, n), dtype=float)
    else:
        eps = rng.standard_normal(n) * np.sqrt(evaluate(model.noise_cond_var, xs))
    return Sample(xs, evaluate(model.r, xs) + eps)


def replicate_rng(seed: int, n_index: int, rep: int) -> np.random.Generator:
    """Independent stream for replicate ``rep`` at the ``n_index``-th sample size."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(n_index, rep))))


# --------------------------------------------------------------------------- config


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    n_values: Tuple[int, ...]
    replicates: int
    seed: int
    q: float = 0.99
    model: str = "default"
    kernel: str = "poly"
    p: int = 1
    mode: str = CLASSICAL
    h_rule: Dict[str, float] = field(default_factory=lambda: {"exponent": 0.2, "scale": 1.0})
    b_rule: Dict[str, float] = field(default_factory=lambda: {"exponent": 0.05, "scale": 1.0, "eps": 1e-3})
    h_values: Tuple[float, ...] = ()
    x0: float = 0.0
    grid: Tuple[float, float, int] = (-1.5, 1.5, 61)
    checks: Tuple[str, ...] = CHECKS
    c0: float = theory.DEFAULT_C0
    L: float = theory.DEFAULT_L
    bernstein_ks: Tuple[int, ...] = (0, 1)
    t_points: int = 20
    use_true_r: bool = False
    workers: int = 1

    def __post_init__(self):
        fix = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        fix("n_values", tuple(int(v) for v in self.n_values))
        fix("h_values", tuple(float(v) for v in self.h_values))
        fix("checks", tuple(self.checks))
        fix("bernstein_ks", tuple(int(k) for k in self.bernstein_ks))
        lo, hi, count = self.grid
        fix("grid", (float(lo), float(hi), int(count)))
        fix("h_rule", {k: float(v) for k, v in dict(self.h_rule).items()})
        fix("b_rule", {k: float(v) for k, v in dict(self.b_rule).items()})
        if not self.n_values or any(v < 1 for v in self.n_values):
            raise ConfigError("n_values must be a nonempty list of positive integers")
        if any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise ConfigError("n_values must be strictly increasing")
        if int(self.replicates) < 1:
            raise ConfigError("replicates must be at least 1")
        if not 0.0 < float(self.q) < 1.0:
            raise ConfigError("q must lie in (0, 1)")
        if self.mode not in (Q_NATIVE, CLASSICAL):
            raise ConfigError(f"mode must be {Q_NATIVE!r} or {CLASSICAL!r}")
        bad = set(self.checks) - set(CHECKS)
        if bad:
            raise ConfigError(f"unknown checks: {sorted(bad)}")
        if "bias" in self.checks and len(self.h_values) < 2:
            raise ConfigError("the bias check needs at least two h_values")
        if any(h <= 0 for h in self.h_values):
            raise ConfigError("h_values must be positive")
        if count < 2 or not hi > lo:
            raise ConfigError("grid must be (lo, hi, count) with lo < hi and count >= 2")
        if set(self.bernstein_ks) - {0, 1}:
            raise ConfigError("bernstein_ks must be drawn from {0, 1}")
        if int(self.workers) < 1:
            raise ConfigError("workers must be at least 1")
        if "exponent" not in self.h_rule or "exponent" not in self.b_rule:
            raise ConfigError("h_rule and b_rule need an 'exponent'")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        except (ValueError, KeyError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(d, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def bandwidth(self, n: int) -> float:
        return default_bandwidth(n, self.h_rule["exponent"], self.h_rule.get("scale", 1.0))

    def floor(self, n: int) -> float:
        r = self.b_rule
        return default_floor(n, r["exponent"], r.get("scale", 1.0), r.get("eps", 1e-3))

    def eval_grid(self) -> np.ndarray:
        lo, hi, count = self.grid
        return np.linspace(lo, hi, count)

    def build_kernel(self) -> QKernel:
        q = float(self.q)
        # the Jackson grid needs about log(tol)/log(q) points
        policy = SeriesPolicy(max_terms=max(10_000, int(50.0 / (1.0 - q))))
        return make_kernel(self.kernel, q, self.p, policy)


# --------------------------------------------------------------------------- report


@dataclass
class Table:
    columns: List[str]
    rows: List[tuple] = field(default_factory=list)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    tables: Dict[str, Table]
    summary: dict
    failures: List[Tuple[int, int, str]] = field(default_factory=list)

    @property
    def config_hash(self) -> str:
        return self.config.config_hash

    def passes(self) -> Dict[str, bool]:
        return {k: bool(v["pass"]) for k, v in self.summary["checks"].items()}


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_clean(obj):
    if isinstance(obj, dict):
        return {str(k): _json_clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def write_report(report: ExperimentReport, out_dir) -> List[str]:
    """One CSV per table plus ``<name>-<hash>-summary.json``; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    stem = f"{report.config.name}-{report.config_hash}"
    paths = []
    for tname in sorted(report.tables):
        table = report.tables[tname]
        path = os.path.join(out_dir, f"{stem}-{tname}.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(table.columns)
            for row in table.rows:
                w.writerow([_fmt(v) for v in row])
        paths.append(path)
    path = os.path.join(out_dir, f"{stem}-summary.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_json_clean(report.summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(path)
    return paths


# --------------------------------------------------------------------------- engine


@dataclass(frozen=True)
class _Context:
    cfg: ExperimentConfig
    model: theory.TargetModel
    kernel: QKernel
    grid: np.ndarray
    sampler: Optional[QSampler]


def _context(cfg: ExperimentConfig) -> _Context:
    model = get_model(cfg.model)
    kernel = cfg.build_kernel()
    sampler = None
    if cfg.mode == Q_NATIVE:
        policy = SeriesPolicy(max_terms=10**6)
        # a classical density carries Jackson mass 1 - O(1 - q); rescale it to a q-density
        qp = as_qparam(cfg.q)
        mass = jackson_integral(model.f, -qp.nu, qp.nu, qp, policy).value
        if not mass > 0:
            raise InvalidDensity("the model density has no Jackson mass on [-nu, nu]")
        f = model.f
        sampler = build_sampler(lambda x: evaluate(f, x) / mass, qp, policy, cfg.seed)
    return _Context(cfg, model, kernel, cfg.eval_grid(), sampler)


def _at(sample, kernel, h, b, grid, powers=(0, 1)):
    return estimate_regression(sample, EstimatorConfig(kernel, h, b, grid), powers)


def _replicate(ctx: _Context, n_index: int, rep: int) -> dict:
    cfg = ctx.cfg
    n = cfg.n_values[n_index]
    rng = replicate_rng(cfg.seed, n_index, rep)
    sample = draw_sample(ctx.model, n, rng, ctx.sampler)
    h, b = cfg.bandwidth(n), cfg.floor(n)
    x0 = np.array([cfg.x0])
    out = {}
    checks = set(cfg.checks)
    if "bias" in checks:
        # common random numbers: every h sees the same sample
        out["bias"] = [float(_at(sample, ctx.kernel, hh, b, x0).r_hat[0]) for hh in cfg.h_values]
    if checks & {"normality", "bernstein"}:
        est = _at(sample, ctx.kernel, h, b, x0, (0, 1))
        out["r0"] = float(est.r_hat[0])
        out["gamma0"] = {k: float(est.gamma_hat[k][0]) for k in (0, 1)}
    if "rate" in checks:
        est = _at(sample, ctx.kernel, h, b, ctx.grid)
        out["sup"] = (
            sup_error(est.f_hat, lambda x: ctx.model.gamma(0, x), ctx.grid),
            sup_error(est.g_hat, lambda x: ctx.model.gamma(1, x), ctx.grid),
            sup_error(est.r_hat, lambda x: evaluate(ctx.model.r, x), ctx.grid),
        )
    if "lyapunov" in checks:
        ecfg = EstimatorConfig(ctx.kernel, h, b, x0)
        r_true = ctx.model.r if cfg.use_true_r else None
        out["lyap"] = theory.lyapunov_ratio(sample, ecfg, cfg.x0, r_true)
    return out


def _run_replicates(ctx: _Context) -> Tuple[Dict[int, List[Optional[dict]]], List[Tuple[int, int, str]]]:
    cfg = ctx.cfg
    jobs = [(i, r) for i in range(len(cfg.n_values)) for r in range(cfg.replicates)]

    def work(job):
        i, r = job
        try:
            return _replicate(ctx, i, r), None
        except (QKernelError, ArithmeticError, ValueError) as exc:
            return None, f"{type(exc).__name__}: {exc}"

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            outs = list(pool.map(work, jobs))
    else:
        outs = [work(j) for j in jobs]
    results: Dict[int, List[Optional[dict]]] = {i: [None] * cfg.replicates for i in range(len(cfg.n_values))}
    failures = []
    for (i, r), (res, err) in zip(jobs, outs):
        results[i][r] = res
        if err is not None:
            failures.append((cfg.n_values[i], r, err))
    return results, failures


def _ok(results, key):
    return [res[key] for res in results if res is not None]


def _slope(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        return float("nan")
    return float(np.polyfit(x, y, 1)[0])


def _slope_se(x, y) -> Tuple[float, float]:
    """OLS slope and its residual-based standard error."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        return _slope(x, y), float("nan")
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    sxx = float(np.sum((x - x.mean()) ** 2))
    return float(coef[0]), math.sqrt(float(np.sum(resid**2)) / (x.size - 2) / sxx)


def _bias_check(ctx, results, tables, summary):
    cfg = ctx.cfg
    i = len(cfg.n_values) - 1
    n = cfg.n_values[i]
    vals = np.array(_ok(results[i], "bias"))
    r0 = float(evaluate(ctx.model.r, np.array([cfg.x0]))[0])
    t = Table(["n", "h", "empirical_bias", "bias_se", "predicted_bias", "relative_error"])
    rel_in_band = []
    for j, hh in enumerate(cfg.h_values):
        col = vals[:, j]
        emp = float(col.mean() - r0)
        se = float(col.std(ddof=1) / math.sqrt(col.size)) if col.size > 1 else float("nan")
        pred = theory.bias_rn(ctx.model, ctx.kernel, hh, cfg.x0)
        rel = abs(emp - pred) / abs(pred) if pred != 0 else float("inf")
        t.rows.append((n, hh, emp, se, pred, rel))
        if 0.1 - 1e-12 <= hh <= 0.3 + 1e-12:
            rel_in_band.append(rel)
    emps = np.array([row[2] for row in t.rows])
    slope = _slope(np.log(cfg.h_values), np.log(np.abs(emps))) if np.all(emps != 0) else float("nan")
    max_rel = max(rel_in_band) if rel_in_band else float("nan")
    tables["bias"] = t
    ok = abs(slope - 2.0) <= 0.3 and (not rel_in_band or max_rel <= 0.25)
    summary["bias_slope"] = slope
    summary["checks"]["bias"] = {"slope": slope, "max_relative_error_h_0.1_0.3": max_rel, "pass": ok}


def _normality_check(ctx, results, tables, summary):
    cfg = ctx.cfg
    t = Table(["n", "h", "ks_pvalue", "stat_mean", "stat_var", "var_times_nh", "script_V", "variance_ratio"])
    stats_table = Table(["n", "replicate", "standardized_statistic"])
    r0 = float(evaluate(ctx.model.r, np.array([cfg.x0]))[0])
    ok = True
    for i, n in enumerate(cfg.n_values):
        h = cfg.bandwidth(n)
        rhat = np.array(_ok(results[i], "r0"))
        c = math.sqrt(n * h**5)
        _, script_v = theory.clt_params(ctx.model, ctx.kernel, ctx.kernel.q, c, cfg.x0)
        bias = theory.bias_rn(ctx.model, ctx.kernel, h, cfg.x0)
        if not script_v > 0:
            raise DomainError("the normality check needs a positive asymptotic variance")
        z = math.sqrt(n * h) * (rhat - r0 - bias) / math.sqrt(script_v)
        for rep, val in enumerate(z):
            stats_table.rows.append((n, rep, float(val)))
        pval = float(stats.kstest(z, "norm").pvalue) if z.size > 1 else float("nan")
        var_nh = float(np.var(rhat, ddof=1) * n * h) if rhat.size > 1 else float("nan")
        ratio = var_nh / script_v
        t.rows.append((n, h, pval, float(z.mean()), float(np.var(z, ddof=1)), var_nh, script_v, ratio))
        ok = ok and pval >= 0.01 and abs(ratio - 1.0) <= 0.2
    tables["normality"] = t
    tables["normality_statistic"] = stats_table
    last = t.rows[-1]
    summary["normality_pvalue"] = last[2]
    summary["checks"]["normality"] = {"ks_pvalue": last[2], "variance_ratio": last[7], "pass": ok}


RATE_TARGETS = (("gamma0", 0), ("gamma1", 1), ("r_hat", 1))


def _rate_check(ctx, results, tables, summary):
    cfg = ctx.cfg
    t = Table(["n", "h", "target", "mean_sup_error", "rate", "ratio"])
    per_rep = Table(["n", "replicate", "sup_error_gamma0", "sup_error_gamma1", "sup_error_r_hat"])
    ratios = {name: [] for name, _ in RATE_TARGETS}
    for i, n in enumerate(cfg.n_values):
        h = cfg.bandwidth(n)
        for rep, res in enumerate(results[i]):
            if res is not None:
                per_rep.rows.append((n, rep) + tuple(res["sup"]))
        sups = np.array(_ok(results[i], "sup"))
        for j, (name, k) in enumerate(RATE_TARGETS):
            _, _, rate = theory.rate_terms(ctx.model, ctx.kernel, ctx.kernel.q, n, h, k, cfg.c0, cfg.L, ctx.grid)
            err = float(sups[:, j].mean())
            t.rows.append((n, h, name, err, rate, err / rate))
            ratios[name].append(err / rate)
    logn = np.log(cfg.n_values)
    # log scale when possible; a zero error (noiseless model) is fitted as is
    fits = {
        name: _slope_se(logn, np.log(r) if min(r) > 0 else np.asarray(r)) for name, r in ratios.items()
    }
    slopes = {name: fit[0] for name, fit in fits.items()}
    max_ratio = max(max(r) for r in ratios.values())
    # "non-increasing in trend": no upward slope beyond two standard errors
    trend_ok = all(s <= 2.0 * se if math.isfinite(se) else s <= 0 for s, se in fits.values())
    tables["rate"] = t
    tables["sup_error"] = per_rep
    summary["checks"]["rate"] = {
        "max_ratio": max_ratio,
        "trend_slopes": slopes,
        "trend_slope_se": {name: fit[1] for name, fit in fits.items()},
        "pass": max_ratio <= 10.0 and trend_ok,
    }


def _lyapunov_check(ctx, results, tables, summary):
    cfg = ctx.cfg
    t = Table(["n", "h", "mean_ratio", "sd_ratio"])
    for i, n in enumerate(cfg.n_values):
        vals = np.array(_ok(results[i], "lyap"))
        sd = float(vals.std(ddof=1)) if vals.size > 1 else float("nan")
        t.rows.append((n, cfg.bandwidth(n), float(vals.mean()), sd))
    slope = _slope(np.log(cfg.n_values), np.log([row[2] for row in t.rows]))
    tables["lyapunov"] = t
    summary["checks"]["lyapunov"] = {"loglog_slope": slope, "pass": bool(slope < 0)}


def _bernstein_table(ctx, results, t_grid=None) -> Table:
    cfg = ctx.cfg
    sup_f = theory.sup_density(ctx.model, ctx.grid)
    t = Table(["n", "k", "t", "empirical", "binomial_se", "bound", "ok"])
    for i, n in enumerate(cfg.n_values):
        h = cfg.bandwidth(n)
        vals = _ok(results[i], "gamma0")
        for k in cfg.bernstein_ks:
            g = np.array([v[k] for v in vals])
            dev = np.abs(g - g.mean())
            v = theory.v_nk(ctx.kernel, n, h, k, sup_f, cfg.c0)
            c = theory.bernstein_c(ctx.kernel, n, h, k, sup_f, cfg.c0)
            ts = theory.bernstein_t_grid(v, c, ctx.kernel.q, cfg.t_points) if t_grid is None else np.asarray(t_grid, float)
            tmax = theory.bernstein_t_max(v, c, ctx.kernel.q)
            if np.any(ts <= 0) or np.any(ts > tmax):
                raise DomainError(f"t grid must lie in (0, {tmax:.6g}] for n={n}, k={k}")
            for tt in ts:
                emp = float(np.mean(dev >= tt))
                se = math.sqrt(emp * (1.0 - emp) / dev.size)
                bound = theory.bernstein_bound(float(tt), v, c, ctx.kernel.q)
                t.rows.append((n, k, float(tt), emp, se, bound, emp <= bound + 3.0 * se))
    return t


def verify_bernstein(cfg: ExperimentConfig, t_grid: Optional[Sequence[float]] = None) -> Table:
    """Exceedance table for ``|Gamma_hat_k(x0) - mean| >= t`` against the q-Bernstein bound.

    Without ``t_grid`` each ``(n, k)`` gets its own 20-point grid inside the
    domain of the Tsallis exponential.
    """
    sub = ExperimentConfig.from_dict({**cfg.to_dict(), "checks": ["bernstein"]})
    ctx = _context(sub)
    results, _ = _run_replicates(ctx)
    return _bernstein_table(ctx, results, t_grid)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run every check listed in ``cfg.checks``; deterministic given ``cfg.seed``."""
    ctx = _context(cfg)
    results, failures = _run_replicates(ctx)
    tables: Dict[str, Table] = {}
    summary = {
        "name": cfg.name,
        "config_hash": cfg.config_hash,
        "config": cfg.to_dict(),
        "kernel": ctx.kernel.name,
        "failed_replicates": len(failures),
        "checks": {},
    }
    if "bias" in cfg.checks:
        _bias_check(ctx, results, tables, summary)
    if "normality" in cfg.checks:
        _normality_check(ctx, results, tables, summary)
    if "rate" in cfg.checks:
        _rate_check(ctx, results, tables, summary)
    if "lyapunov" in cfg.checks:
        _lyapunov_check(ctx, results, tables, summary)
    if "bernstein" in cfg.checks:
        t = _bernstein_table(ctx, results)
        tables["bernstein"] = t
        summary["checks"]["bernstein"] = {
            "rows": len(t.rows),
            "violations": sum(1 for row in t.rows if not row[-1]),
            "pass": all(row[-1] for row in t.rows),
        }
    if failures:
        tables["failures"] = Table(["n", "replicate", "error"], list(failures))
    return ExperimentReport(cfg, tables, summary, failures)
