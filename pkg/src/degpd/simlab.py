"""Simulation studies: parameter recovery and threshold sweeps on discrete-GEV data."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .counts import CountSample
from .errors import ConfigurationError, ConvergenceError
from .inference import fit_mle
from .models import ModelSpec, ParamVector, sample
from .parallel import STREAM_RECOVERY, STREAM_SWEEP, pmap, task_rng

#: cells with fewer exceedances than this are skipped
MIN_EXCEEDANCES = 30
#: rejection share above which the discrete-GEV generator refuses to run
MAX_REJECTION = 0.5

CSV_COLUMNS = ("study", "model", "threshold", "replicate", "parameter", "estimate", "converged")
SUMMARY_COLUMNS = ("study", "model", "threshold", "parameter", "n", "q1", "median", "q3")


@dataclass(frozen=True)
class Row:
    study: str
    model: str
    threshold: int | None
    replicate: int
    parameter: str
    estimate: float
    converged: bool


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def summarize(rows) -> list[dict]:
    """Median and quartiles of every (model, threshold, parameter) cell.

    Only converged fits enter the summary.
    """
    cells: dict[tuple, list[float]] = {}
    for r in rows:
        key = (r.study, r.model, r.threshold, r.parameter)
        cells.setdefault(key, [])
        if r.converged and math.isfinite(r.estimate):
            cells[key].append(r.estimate)
    out = []
    for (study, model, u, par), vals in cells.items():
        if vals:
            q1, med, q3 = (float(q) for q in np.quantile(vals, [0.25, 0.5, 0.75]))
        else:
            q1 = med = q3 = float("nan")
        out.append({"study": study, "model": model, "threshold": u, "parameter": par,
                    "n": len(vals), "q1": q1, "median": med, "q3": q3})
    return out


def summary_to_csv(summary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for s in summary:
        w.writerow([_fmt(s[c]) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def _fit_rows(study, data, spec, replicate, threshold, init=None):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            f = fit_mle(data, spec, init=init, strict=False)
        est, ok = f.estimates, f.converged
    except ConvergenceError as e:
        res = e.result
        if res is None:
            return [Row(study, spec.name, threshold, replicate, p, float("nan"), False)
                    for p in spec.param_names]
        est, ok = res.estimates, False
    return [Row(study, spec.name, threshold, replicate, p, float(getattr(est, p)), ok)
            for p in spec.param_names]


# --- parameter recovery ------------------------------------------------------

@dataclass(frozen=True)
class RecoveryConfig:
    spec: ModelSpec
    truth: ParamVector
    n: int = 1000
    replicates: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigurationError("replicates must be at least 1")
        if self.n < 50:
            raise ConfigurationError("recovery studies need n >= 50")
        if self.seed < 0:
            raise ConfigurationError("seed must be non-negative")
        self.truth.check(self.spec)


def _recovery_task(args):
    cfg, index = args
    rng = task_rng(cfg.seed, STREAM_RECOVERY, index)
    data = CountSample.from_observations(sample(cfg.n, cfg.spec, cfg.truth, rng=rng))
    return _fit_rows("recovery", data, cfg.spec, index, None)


def run_recovery(cfg: RecoveryConfig, jobs: int = 1) -> list[Row]:
    """Simulate ``replicates`` samples from the truth and refit each one.

    Failed fits appear as rows with ``converged`` false.
    """
    out = pmap(_recovery_task, [(cfg, i) for i in range(cfg.replicates)], jobs)
    return [r for rows in out for r in rows]


# --- discrete GEV ------------------------------------------------------------

@dataclass(frozen=True)
class GevDraw:
    draws: np.ndarray  # in generation order
    rejected: int

    @property
    def sample(self) -> CountSample:
        return CountSample.from_observations(self.draws)


def _gev_inverse(u, mu, beta, xi):
    t = -np.log(u)
    if xi == 0:
        return mu - beta * np.log(t)
    return mu + beta / xi * np.expm1(-xi * np.log(t))


def discrete_gev(n: int, mu: float, beta: float, xi: float, rng: np.random.Generator) -> GevDraw:
    if n < 1:
        raise ConfigurationError("n must be positive")
    if not beta > 0 or not xi >= 0:
        raise ConfigurationError("the discrete GEV needs beta > 0 and xi >= 0")
    out = np.empty(0, dtype=np.int64)
    rejected = 0
    need = n
    while need:
        u = rng.random(need)
        y = np.floor(_gev_inverse(u, mu, beta, xi))
        bad = ~(y >= 0) | ~np.isfinite(y)
        rejected += int(bad.sum())
        if rejected > MAX_REJECTION * (n + rejected):
            raise ConfigurationError(
                f"discrete GEV rejected {rejected} negative draws; choose a larger mu"
            )
        out = np.concatenate([out, y[~bad].astype(np.int64)])
        need = n - out.size
    return GevDraw(out, rejected)


def sample_discrete_gev(n: int, mu: float, beta: float, xi: float, seed: int = 0) -> GevDraw:
    """``floor(X)`` for X ~ GEV(mu, beta, xi), negative draws redrawn."""
    return discrete_gev(n, mu, beta, xi, np.random.default_rng(seed))


# --- threshold sweep ---------------------------------------------------------

def default_sweep_models(omega: float | None = None) -> tuple[ModelSpec, ...]:
    kw = {} if omega is None else {"omega": omega}
    return tuple(ModelSpec.parse(m, **kw) for m in ("dgpd", "degpd-m1", "degpd-m2", "degpd-m3"))


@dataclass(frozen=True)
class SweepConfig:
    gev_mu: float = 2.0
    gev_beta: float = 1.0
    gev_xi: float = 1.0 / 20.0
    thresholds: tuple[int, ...] = (0, 1, 2, 3, 4, 5)
    n: int = 2000
    replicates: int = 200
    models: tuple[ModelSpec, ...] = field(default_factory=default_sweep_models)
    seed: int = 0

    def __post_init__(self):
        th = tuple(int(u) for u in self.thresholds)
        object.__setattr__(self, "thresholds", th)
        object.__setattr__(self, "models", tuple(self.models))
        if not th or any(u < 0 for u in th) or any(b <= a for a, b in zip(th, th[1:])):
            raise ConfigurationError("thresholds must be non-negative and strictly increasing")
        if self.replicates < 1 or self.n < 1:
            raise ConfigurationError("n and replicates must be positive")
        if not self.gev_beta > 0 or not self.gev_xi >= 0:
            raise ConfigurationError("the discrete GEV needs beta > 0 and xi >= 0")
        if not self.models:
            raise ConfigurationError("at least one model is required")
        if self.seed < 0:
            raise ConfigurationError("seed must be non-negative")


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list[Row]
    skipped: list[tuple[int, int, int]]  # (replicate, threshold, exceedance count)
    rejected: int
    exceedance_counts: dict[int, list[int]]

    def summary(self) -> list[dict]:
        return summarize(self.rows)

    def to_csv(self) -> str:
        return rows_to_csv(self.rows)

    def median(self, model: str, threshold: int, parameter: str) -> float:
        for s in self.summary():
            if (s["model"], s["threshold"], s["parameter"]) == (model, threshold, parameter):
                return s["median"]
        raise KeyError((model, threshold, parameter))


def _sweep_task(args):
    cfg, index = args
    rng = task_rng(cfg.seed, STREAM_SWEEP, index)
    draw = discrete_gev(cfg.n, cfg.gev_mu, cfg.gev_beta, cfg.gev_xi, rng)
    rows, skipped, counts = [], [], []
    for u in cfg.thresholds:
        exc = draw.sample.exceedances(u)
        counts.append(exc.n)
        if exc.n < MIN_EXCEEDANCES:
            skipped.append((index, u, exc.n))
            continue
        for spec in cfg.models:
            rows.extend(_fit_rows("sweep", exc, spec, index, u))
    return rows, skipped, counts, draw.rejected


def run_threshold_sweep(cfg: SweepConfig, jobs: int = 1) -> SweepResult:
    """Fit every model to the exceedances of each threshold, per replicate."""
    out = pmap(_sweep_task, [(cfg, i) for i in range(cfg.replicates)], jobs)
    rows, skipped = [], []
    counts = {u: [] for u in cfg.thresholds}
    rejected = 0
    for r, s, c, rej in out:
        rows.extend(r)
        skipped.extend(s)
        for u, k in zip(cfg.thresholds, c):
            counts[u].append(k)
        rejected += rej
    return SweepResult(cfg, rows, skipped, rejected, counts)
