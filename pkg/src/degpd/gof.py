"""Goodness-of-fit diagnostics: discrete KS test, Q-Q pairs and return levels."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .counts import CountSample
from .errors import BandError, ConvergenceError, DomainError, UsageError
from .inference import FitResult, fit_mle
from .models import ModelSpec, ParamVector, _cdf, _unpack, quantile, sample
from .parallel import STREAM_ENVELOPE, STREAM_KS, pmap, task_rng

log = logging.getLogger(__name__)

KS_B = 999
ENVELOPE_B = 500


@dataclass
class GofReport:
    ks_statistic: float
    p_value: float
    mc_replicates: int
    n_failed: int = 0
    qq_points: list[tuple[int, int]] = field(default_factory=list)
    return_levels: list[tuple[float, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "ks_statistic": self.ks_statistic,
            "p_value": self.p_value,
            "mc_replicates": self.mc_replicates,
            "n_failed": self.n_failed,
            "qq_points": [list(p) for p in self.qq_points],
            "return_levels": [list(r) for r in self.return_levels],
        }


def _ks(data: CountSample, spec: ModelSpec, params: ParamVector) -> float:
    # the sup over all integers is attained at an observed value v (right
    # limit) or at v - 1 (left limit); beyond the sample both CDFs meet
    v = data.values
    ecdf = np.cumsum(data.counts) / data.n
    prev = np.concatenate([[0.0], ecdf[:-1]])
    fam, omega, pi, kappa, beta, xi = _unpack(spec, params)
    at = _cdf(v.astype(float), fam, omega, pi, kappa, beta, xi)
    left = v >= 1
    below = _cdf((v[left] - 1).astype(float), fam, omega, pi, kappa, beta, xi)
    d = np.abs(ecdf - at).max()
    if below.size:
        d = max(d, np.abs(prev[left] - below).max())
    return float(d)


def ks_statistic(data: CountSample, spec: ModelSpec, params: ParamVector) -> float:
    """Largest gap between the empirical and model CDFs over the integers."""
    data.require_nonempty()
    params.check(spec)
    return _ks(data, spec, params)


def _ks_task(args):
    spec, est, n, seed, index = args
    rng = task_rng(seed, STREAM_KS, index)
    rep = CountSample.from_observations(sample(n, spec, est, rng=rng))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            f = fit_mle(rep, spec, init=est, n_starts=1, strict=False, polish=False)
        ok = f.converged
        refit = f.estimates
    except ConvergenceError:
        ok, refit = False, est
    # unconverged refits are still scored, at their best incumbent
    return _ks(rep, spec, refit), ok


def ks_test_mc(
    data: CountSample,
    spec: ModelSpec,
    B: int = KS_B,
    seed: int = 0,
    *,
    fit: FitResult | None = None,
    jobs: int = 1,
    max_fail: float = 0.2,
) -> GofReport:
    """Parametric-bootstrap KS test with the model refitted on every replicate.

    ``p = (1 + #{D* >= D}) / (B + 1)``, so the p-value is never zero.
    """
    data.require_nonempty()
    if B < 99:
        raise UsageError("the Monte Carlo KS test needs B >= 99")
    if fit is None:
        fit = fit_mle(data, spec)
    elif fit.spec != spec:
        raise UsageError("fit was computed for a different model")
    d_obs = _ks(data, spec, fit.estimates)
    tasks = [(spec, fit.estimates, data.n, seed, b) for b in range(B)]
    out = pmap(_ks_task, tasks, jobs)
    failed = sum(1 for _, ok in out if not ok)
    if failed > max_fail * B:
        raise BandError(f"{failed} of {B} KS replicate refits failed", failed, B)
    d_star = np.array([d for d, _ in out])
    p = (1 + int(np.sum(d_star >= d_obs))) / (B + 1)
    return GofReport(ks_statistic=d_obs, p_value=p, mc_replicates=B, n_failed=failed)


def plotting_positions(n: int) -> np.ndarray:
    return (np.arange(1, n + 1) - 0.5) / n


def qq_data(data: CountSample, spec: ModelSpec, params: ParamVector) -> list[tuple[int, int]]:
    """Order statistics paired with model quantiles at Hazen positions."""
    data.require_nonempty()
    emp = data.observations()
    mod = quantile(plotting_positions(emp.size), spec, params)
    return [(int(a), int(b)) for a, b in zip(emp, mod)]


def _envelope_task(args):
    spec, params, n, seed, index = args
    rng = task_rng(seed, STREAM_ENVELOPE, index)
    return np.sort(sample(n, spec, params, rng=rng))


def qq_envelope(
    n: int,
    spec: ModelSpec,
    params: ParamVector,
    B: int = ENVELOPE_B,
    level: float = 0.99,
    seed: int = 0,
    *,
    jobs: int = 1,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Pointwise simulation envelope for sorted samples of size ``n``.

    Returns lower and upper bands for each order statistic plus the
    ``level`` quantile of the largest absolute gap between a simulated
    order statistic and the model quantile at the same plotting position.
    """
    if n < 1 or B < 1:
        raise UsageError("n and B must be positive")
    sims = np.array(pmap(_envelope_task, [(spec, params, n, seed, b) for b in range(B)], jobs))
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(sims, [alpha, 1.0 - alpha], axis=0)
    model = quantile(plotting_positions(n), spec, params)
    max_gap = np.abs(sims - model).max(axis=1)
    return lo, hi, float(np.quantile(max_gap, level))


def return_levels(spec: ModelSpec, params: ParamVector, m_grid) -> list[tuple[float, int]]:
    """m-observation return levels, the ``1 - 1/m`` quantiles."""
    m = np.asarray(m_grid, dtype=float).ravel()
    if m.size == 0:
        return []
    if not np.all(m > 1):
        raise DomainError("return periods must exceed 1")
    lv = quantile(1.0 - 1.0 / m, spec, params)
    return [(float(a), int(b)) for a, b in zip(m, np.atleast_1d(lv))]
