"""Replicated simulation studies of the scaled estimators."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from . import rng
from .errors import InvalidArgumentError, SingularSystemError
from .estimation import Regime, asymptotic_constants, lse_canonical, s_sums
from .lattice import ModelParams, NoiseSpec, Stability, simulate_triangle
from .serialize import dumps17

STATISTICS = ("scaled_rho", "scaled_alpha", "scaled_beta", "s_sums")
S_SUM_NAMES = ("s1", "s2", "s3")


def kolmogorov_sf(x: float, terms: int = 100) -> float:
    """``P(K > x)`` for the limiting Kolmogorov distribution."""
    if x <= 0.02:
        # the cdf is below exp(-3000) here
        return 1.0
    if x < 1.0:
        # theta-function form; the alternating series cancels badly for small x
        j = np.arange(1, terms + 1)
        cdf = math.sqrt(2.0 * math.pi) / x * np.sum(np.exp(-((2 * j - 1) ** 2) * math.pi**2 / (8 * x * x)))
        return float(min(1.0, max(0.0, 1.0 - cdf)))
    j = np.arange(1, terms + 1)
    p = 2.0 * np.sum((-1.0) ** (j - 1) * np.exp(-2.0 * j * j * x * x))
    return float(min(1.0, max(0.0, p)))


def ks_normal_test(samples, variance: float):
    """Two-sided KS statistic against ``N(0, variance)`` and its asymptotic p-value."""
    if not variance > 0:
        raise InvalidArgumentError(f"variance must be positive, got {variance}")
    x = np.sort(np.asarray(samples, dtype=float))
    m = x.size
    if m == 0:
        raise InvalidArgumentError("need at least one sample")
    cdf = ndtr(x / math.sqrt(variance))
    upper = np.arange(1, m + 1) / m - cdf
    lower = cdf - np.arange(0, m) / m
    stat = float(max(upper.max(), lower.max()))
    return stat, kolmogorov_sf(math.sqrt(m) * stat)


@dataclass(frozen=True)
class StudyConfig:
    n_list: tuple[int, ...]
    M: int
    params: ModelParams
    noise_kind: rng.NoiseKind = rng.NoiseKind.STANDARD_NORMAL
    master_seed: int = 0
    statistics: tuple[str, ...] = ("scaled_rho", "scaled_alpha", "scaled_beta")
    keep_raw: bool = False

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "noise_kind", rng.NoiseKind(self.noise_kind))
        object.__setattr__(self, "statistics", tuple(self.statistics))
        if self.M < 2:
            raise InvalidArgumentError(f"need M >= 2 replicates, got {self.M}")
        if not self.n_list or min(self.n_list) < 1:
            raise InvalidArgumentError("n_list must be a nonempty list of positive orders")
        unknown = set(self.statistics) - set(STATISTICS)
        if unknown:
            raise InvalidArgumentError(f"unknown statistics {sorted(unknown)}")
        if self.params.stability is Stability.EXPLOSIVE:
            raise InvalidArgumentError("studies are defined for stable or unit-root parameters")
        if self.params.alpha * self.params.beta == 0:
            raise InvalidArgumentError("studies need alpha*beta != 0")

    @property
    def regime(self) -> Regime:
        if self.params.stability is Stability.UNSTABLE:
            return Regime.UNSTABLE
        return Regime.STABLE

    @property
    def columns(self) -> tuple[str, ...]:
        cols = []
        for name in self.statistics:
            cols.extend(S_SUM_NAMES if name == "s_sums" else (name,))
        return tuple(cols)


@dataclass(frozen=True)
class StatSummary:
    n: int
    statistic: str
    count: int
    mean: float
    variance: float
    target_variance: float | None
    ks_stat: float | None
    ks_p: float | None


@dataclass
class StudyReport:
    config: StudyConfig
    summaries: list[StatSummary]
    correlations: dict[int, np.ndarray]
    excluded: dict[int, int]
    raw: dict[int, dict[str, np.ndarray]] = field(default_factory=dict, repr=False)

    def summary(self, n: int, statistic: str) -> StatSummary:
        for s in self.summaries:
            if s.n == n and s.statistic == statistic:
                return s
        raise KeyError((n, statistic))

    def correlation(self, n: int, first: str, second: str) -> float:
        cols = self.config.columns
        return float(self.correlations[n][cols.index(first), cols.index(second)])

    def to_dict(self) -> dict:
        cfg = self.config
        out = {
            "config": {
                "n_list": list(cfg.n_list),
                "M": cfg.M,
                "alpha": cfg.params.alpha,
                "beta": cfg.params.beta,
                "noise": cfg.noise_kind.value,
                "seed": cfg.master_seed,
                "statistics": list(cfg.statistics),
                "regime": cfg.regime.value,
            },
            "summaries": [vars(s) for s in self.summaries],
            "correlations": {
                str(n): {"columns": list(cfg.columns), "matrix": c.tolist()}
                for n, c in self.correlations.items()
            },
            "excluded": {str(n): c for n, c in self.excluded.items()},
        }
        return out

    def to_json(self) -> str:
        return dumps17(self.to_dict())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["n", "statistic", "count", "mean", "variance", "target_variance", "ks_stat", "ks_p"]
        writer.writerow(header)
        for s in self.summaries:
            writer.writerow(
                [s.n, s.statistic, s.count]
                + ["" if v is None else format(v, ".12g") for v in (s.mean, s.variance, s.target_variance, s.ks_stat, s.ks_p)]
            )
        return buf.getvalue()

    def raw_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "replicate", "statistic", "value"])
        for n, table in self.raw.items():
            reps = table["replicate"]
            for name in self.config.columns:
                for r, v in zip(reps.tolist(), table[name].tolist()):
                    writer.writerow([n, r, name, format(v, ".17g")])
        return buf.getvalue()


def _replicate_row(config: StudyConfig, n: int, r: int):
    params = config.params
    noise = NoiseSpec(config.noise_kind, rng.replicate_seed(config.master_seed, n, r))
    fld = simulate_triangle(n, params, noise)
    try:
        est = lse_canonical(fld, params.signs)
    except SingularSystemError:
        return None
    rho_exp = 1.25 if config.regime is Regime.UNSTABLE else 1.0
    row = {}
    for name in config.statistics:
        if name == "scaled_rho":
            row[name] = n**rho_exp * (est.rho_hat - params.rho)
        elif name == "scaled_alpha":
            row[name] = n * (est.alpha_hat - params.alpha)
        elif name == "scaled_beta":
            row[name] = n * (est.beta_hat - params.beta)
        else:
            s1, s2, s3 = s_sums(fld)
            row.update(s1=s1 / n**2, s2=s2 / n**2.25, s3=s3 / n**2.5)
    return row


def _run_chunk(args):
    config, n, reps = args
    return [(r, _replicate_row(config, n, r)) for r in reps]


def _target_variances(config: StudyConfig) -> dict[str, float]:
    const = asymptotic_constants(config.params)
    cov = const.coefficient_covariance
    return {
        "scaled_rho": const.rho_stat_variance,
        "scaled_alpha": float(cov[0, 0]),
        "scaled_beta": float(cov[1, 1]),
    }


def run_study(config: StudyConfig, workers: int = 1) -> StudyReport:
    """Simulate, estimate and summarise ``M`` replicates for every ``n``.

    Replicate ``r`` at order ``n`` uses the seed derived from
    ``(master_seed, n, r)``; the report does not depend on ``workers``.
    """
    targets = _target_variances(config)
    cols = config.columns
    summaries, correlations, excluded, raw = [], {}, {}, {}
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for n in config.n_list:
            chunks = [
                (config, n, list(range(lo, min(lo + 25, config.M))))
                for lo in range(0, config.M, 25)
            ]
            results = pool.map(_run_chunk, chunks) if pool else map(_run_chunk, chunks)
            rows = sorted((pair for chunk in results for pair in chunk), key=lambda p: p[0])
            kept = [(r, row) for r, row in rows if row is not None]
            excluded[n] = len(rows) - len(kept)
            table = {name: np.array([row[name] for _, row in kept]) for name in cols}
            for name in cols:
                values = table[name]
                target = targets.get(name)
                ks_stat = ks_p = None
                if target is not None and values.size >= 2:
                    ks_stat, ks_p = ks_normal_test(values, target)
                    if values.size < 100:
                        ks_p = None
                summaries.append(
                    StatSummary(
                        n=n,
                        statistic=name,
                        count=int(values.size),
                        mean=float(np.mean(values)) if values.size else math.nan,
                        variance=float(np.var(values, ddof=1)) if values.size > 1 else math.nan,
                        target_variance=target,
                        ks_stat=ks_stat,
                        ks_p=ks_p,
                    )
                )
            if len(kept) > 1 and len(cols) > 1:
                correlations[n] = np.corrcoef(np.vstack([table[c] for c in cols]))
            else:
                correlations[n] = np.eye(len(cols))
            if config.keep_raw:
                table["replicate"] = np.array([r for r, _ in kept])
                raw[n] = table
    finally:
        if pool:
            pool.shutdown()
    return StudyReport(config, summaries, correlations, excluded, raw)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    variance: float
    ratio: float


def variance_convergence(report: StudyReport, target: float, statistic: str = "scaled_rho"):
    """Empirical variances against a target across the study's orders.

    Returns ``(rows, monotone)`` where ``monotone`` says whether ``|ratio - 1|``
    is non-increasing in ``n`` (informational only).
    """
    rows = [
        ConvergenceRow(s.n, s.variance, s.variance / target)
        for s in sorted(report.summaries, key=lambda s: s.n)
        if s.statistic == statistic
    ]
    devs = [abs(r.ratio - 1.0) for r in rows]
    monotone = all(b <= a for a, b in zip(devs, devs[1:]))
    return rows, monotone
