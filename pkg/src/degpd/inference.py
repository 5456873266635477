"""Maximum-likelihood fitting, bootstrap bands and BIC model ranking."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from . import carrier as _carrier
from . import gpd as _gpd
from .counts import CountSample
from .errors import BandError, ConvergenceError, UsageError
from .models import Family, ModelSpec, ParamVector, _pmf, _unpack
from .parallel import STREAM_BOOTSTRAP, pmap, task_rng

log = logging.getLogger(__name__)

#: pmf values below this contribute log(PMF_FLOOR) instead of -inf
PMF_FLOOR = 1e-300
#: fits with xi below this are reported as effectively exponential-tailed
XI_EXPONENTIAL = 1e-4

XATOL = 1e-8
FATOL = 1e-8
MAXITER = 2000
N_STARTS = 5

# box on the unconstrained scale; the objective is flat outside it
_BOUNDS = {
    "pi": (-25.0, 25.0),      # logit
    "kappa": (-25.0, 12.0),   # log
    "beta": (-15.0, 15.0),    # log
    "xi": (-30.0, 8.0),       # inverse softplus
}


# --- reparameterization ------------------------------------------------------

def _softplus(x):
    return np.logaddexp(0.0, x)


def _softplus_inv(y):
    # log(expm1(y)) written to avoid overflow for large y
    return y + np.log(-np.expm1(-y))


def to_unconstrained(params: ParamVector, spec: ModelSpec) -> np.ndarray:
    out = []
    for name in spec.param_names:
        v = getattr(params, name)
        if name == "pi":
            out.append(math.log(v) - math.log1p(-v))
        elif name in ("kappa", "beta"):
            out.append(math.log(v))
        else:
            out.append(float(_softplus_inv(v)))
    return np.array(out)


def _constrain(theta, names):
    out = []
    for name, t in zip(names, theta):
        lo, hi = _BOUNDS[name]
        t = min(max(float(t), lo), hi)
        if name == "pi":
            out.append(1.0 / (1.0 + math.exp(-t)))
        elif name == "xi":
            out.append(t + math.log1p(math.exp(-t)) if t > 0 else math.log1p(math.exp(t)))
        else:
            out.append(math.exp(t))
    return out


def from_unconstrained(theta, spec: ModelSpec) -> ParamVector:
    return ParamVector(**dict(zip(spec.param_names, _constrain(theta, spec.param_names))))


# --- likelihood --------------------------------------------------------------

class _TableLogLik:
    """Log-likelihood of a frequency table, with the grid layout precomputed."""

    def __init__(self, data: CountSample, spec: ModelSpec):
        self.spec = spec
        vals = data.values.astype(float)
        self.counts = data.counts.astype(float)
        self.grid, inv = np.unique(np.concatenate([vals, vals + 1.0]), return_inverse=True)
        self.i_lo = inv[: vals.size]
        self.i_hi = inv[vals.size:]
        self.zero = vals == 0
        self.fam = None if spec.carrier is None else spec.carrier.family
        self.omega = spec.carrier.omega if spec.carrier is not None else _carrier.DEFAULT_OMEGA

    def pmf(self, pi, kappa, beta, xi):
        ls = _gpd._log_sf(self.grid, beta, xi)
        fam = self.fam
        u_med = 0.5 if fam is None else _carrier._median(fam, kappa, self.omega)
        # grid is increasing, so the body (F < u_med) is a prefix
        k = int(np.searchsorted(-ls, -math.log1p(-u_med), side="right"))
        f = -np.expm1(ls[:k])
        s = np.exp(ls[k:])
        if fam is not None:
            f = _carrier._cdf(f, fam, kappa, self.omega)
            s = _carrier._sf(s, fam, kappa, self.omega)
        # g on the body, 1 - g (from sf) on the tail, negated so both run upward
        h = np.concatenate([f, -s])
        lo, hi = self.i_lo, self.i_hi
        d = h[hi] - h[lo]
        cross = (lo < k) & (hi >= k)
        if np.any(cross):
            d[cross] = (1.0 - s[hi[cross] - k]) - f[lo[cross]]
        d = np.maximum(d, 0.0)
        if pi:
            d = (1.0 - pi) * d + pi * self.zero
        return d

    def __call__(self, pi, kappa, beta, xi) -> float:
        d = self.pmf(pi, kappa, beta, xi)
        return float(np.dot(self.counts, np.log(np.maximum(d, PMF_FLOOR))))

    def objective(self, theta) -> float:
        """Negative log-likelihood on the unconstrained scale."""
        vals = dict(zip(self.spec.param_names, _constrain(theta, self.spec.param_names)))
        return -self(vals.get("pi", 0.0), vals.get("kappa", 1.0), vals["beta"], vals["xi"])


def log_likelihood(data: CountSample, spec: ModelSpec, params: ParamVector) -> float:
    """Sum of log pmf over the sample (frequency-table form)."""
    data.require_nonempty()
    params.check(spec)
    _, _, pi, kappa, beta, xi = _unpack(spec, params)
    return _TableLogLik(data, spec)(pi, kappa, beta, xi)


def bic(loglik: float, k: int, n: int) -> float:
    return -2.0 * loglik + k * math.log(n)


# --- fitting -----------------------------------------------------------------

@dataclass
class FitResult:
    spec: ModelSpec
    estimates: ParamVector
    loglik: float
    bic: float
    n: int
    converged: bool
    iterations: int
    n_starts: int = 1
    boot_bands: dict[str, tuple[float, float]] | None = None
    boundary: tuple[str, ...] = ()
    data_fingerprint: str = ""
    notes: list[str] = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.spec.n_params

    @property
    def effectively_exponential(self) -> bool:
        return self.estimates.xi < XI_EXPONENTIAL

    def to_dict(self) -> dict:
        car = self.spec.carrier
        return {
            "model": self.spec.name,
            "family": self.spec.family.value,
            "carrier": None if car is None else car.name,
            "omega": None if car is None else car.omega,
            "estimates": self.estimates.as_dict(),
            "bands": None if self.boot_bands is None
            else {k: [lo, hi] for k, (lo, hi) in self.boot_bands.items()},
            "loglik": self.loglik,
            "bic": self.bic,
            "n": self.n,
            "k": self.k,
            "converged": self.converged,
            "iterations": self.iterations,
            "n_starts": self.n_starts,
            "boundary": list(self.boundary),
            "effectively_exponential": self.effectively_exponential,
            "data_fingerprint": self.data_fingerprint,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        omega = d.get("omega") or _carrier.DEFAULT_OMEGA
        spec = ModelSpec.parse(d["model"], omega=omega)
        bands = d.get("bands")
        return cls(
            spec=spec,
            estimates=ParamVector.from_dict(d["estimates"]),
            loglik=float(d["loglik"]),
            bic=float(d["bic"]),
            n=int(d["n"]),
            converged=bool(d["converged"]),
            iterations=int(d.get("iterations", 0)),
            n_starts=int(d.get("n_starts", 1)),
            boot_bands=None if bands is None else {k: (v[0], v[1]) for k, v in bands.items()},
            boundary=tuple(d.get("boundary", ())),
            data_fingerprint=d.get("data_fingerprint", ""),
        )


def _zero_mass(spec, kappa, beta, xi):
    fam = None if spec.carrier is None else spec.carrier.family
    omega = spec.carrier.omega if spec.carrier is not None else _carrier.DEFAULT_OMEGA
    return float(_pmf(np.array([0.0]), fam, omega, 0.0, kappa, beta, xi)[0])


def initial_values(data: CountSample, spec: ModelSpec, n_starts: int = N_STARTS) -> list[ParamVector]:
    """Deterministic starting points for the multi-start optimizer."""
    pos = data.values > 0
    if np.any(pos):
        mean_pos = float(np.dot(data.values[pos], data.counts[pos]) / data.counts[pos].sum())
    else:
        mean_pos = 1.0
    xi0, kappa0 = 0.1, 1.0
    beta0 = max(mean_pos * (1.0 - xi0), 0.05)
    pi0 = None
    if spec.family is Family.ZIDEGPD:
        excess = data.zero_fraction - _zero_mass(spec, kappa0, beta0, xi0)
        pi0 = float(np.clip(excess, 0.01, 0.95))
    # (kappa multiplier, beta multiplier, xi)
    grid = [(1.0, 1.0, xi0), (3.0, 0.5, 0.2), (0.5, 1.5, 0.05), (10.0, 0.3, 0.3), (1.0, 1.0, 0.5)]
    starts = []
    for km, bm, xi in grid[:n_starts]:
        vals = {"beta": beta0 * bm, "xi": xi}
        if spec.family is not Family.DGPD:
            vals["kappa"] = kappa0 * km
        if pi0 is not None:
            vals["pi"] = pi0
        starts.append(ParamVector(**vals))
    return starts


def _boundary_flags(theta, spec, est: ParamVector, data: CountSample) -> tuple[str, ...]:
    # a single distinct value is fitted by a limiting point mass
    flags = ["degenerate"] if data.values.size == 1 else []
    for name, t in zip(spec.param_names, theta):
        lo, hi = _BOUNDS[name]
        if t <= lo + 1e-3 or t >= hi - 1e-3:
            flags.append(name)
    if est.xi < XI_EXPONENTIAL and "xi" not in flags:
        flags.append("xi")
    return tuple(flags)


def _simplex(x0, step):
    d = x0.size
    sim = np.tile(x0, (d + 1, 1))
    sim[1:] += step * np.eye(d)
    return sim


def fit_mle(
    data: CountSample,
    spec: ModelSpec,
    init: ParamVector | None = None,
    *,
    n_starts: int = N_STARTS,
    strict: bool = True,
    xatol: float = XATOL,
    fatol: float = FATOL,
    maxiter: int = MAXITER,
    polish: bool = True,
) -> FitResult:
    """Maximize the likelihood by multi-start Nelder-Mead.

    Parameters are optimized on an unconstrained scale (log kappa, log beta,
    inverse-softplus xi, logit pi). Unless ``polish`` is false the best
    start is refined by one restart from its optimum; ``converged`` reports whether the run that
    produced the returned optimum met both the simplex-size and
    function-spread tolerances.

    With ``strict`` (the default) an unconverged fit raises :class:`ConvergenceError`, which carries the best incumbent.
    """
    data.require_nonempty()
    if spec.family is Family.ZIDEGPD and data.zero_fraction == 0:
        warnings.warn("zero-inflated model fitted to data without zeros", stacklevel=2)
    ll = _TableLogLik(data, spec)
    names = spec.param_names

    objective = ll.objective

    starts = initial_values(data, spec, n_starts)
    if init is not None:
        init.check(spec)
        starts = [init] + starts[: max(n_starts - 1, 0)]
    opts = {"xatol": xatol, "fatol": fatol, "maxiter": maxiter}

    best = None
    iterations = 0
    for start in starts:
        x0 = to_unconstrained(start, spec)
        for i, nm in enumerate(names):
            lo, hi = _BOUNDS[nm]
            x0[i] = min(max(x0[i], lo + 0.5), hi - 0.5)
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={**opts, "initial_simplex": _simplex(x0, 0.5)})
        iterations += res.nit
        if np.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise ConvergenceError(f"{spec.name}: no start produced a finite likelihood")

    final = best
    if polish:
        final = minimize(objective, best.x, method="Nelder-Mead",
                         options={**opts, "initial_simplex": _simplex(best.x, 0.05)})
        iterations += final.nit
    converged = bool(final.success)
    if not final.fun <= best.fun:
        final.x, final.fun = best.x, best.fun
        converged = bool(best.success)

    theta = np.array([min(max(t, _BOUNDS[nm][0]), _BOUNDS[nm][1]) for t, nm in zip(final.x, names)])
    est = from_unconstrained(theta, spec)
    loglik = -float(final.fun)
    result = FitResult(
        spec=spec,
        estimates=est,
        loglik=loglik,
        bic=bic(loglik, spec.n_params, data.n),
        n=data.n,
        converged=converged,
        iterations=int(iterations),
        n_starts=len(starts),
        boundary=_boundary_flags(theta, spec, est, data),
        data_fingerprint=data.fingerprint(),
    )
    if result.effectively_exponential:
        result.notes.append("effectively exponential-tailed")
    if not result.converged and strict:
        raise ConvergenceError(f"{spec.name}: optimizer did not converge", result)
    return result


# --- bootstrap ---------------------------------------------------------------

def _boot_task(args):
    data, spec, est, seed, index, parametric, n_starts = args
    rng = task_rng(seed, STREAM_BOOTSTRAP, index)
    if parametric:
        from .models import sample

        rep = CountSample.from_observations(sample(data.n, spec, est, rng=rng))
    else:
        rep = data.resample(rng)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            f = fit_mle(rep, spec, init=est, n_starts=n_starts, strict=False, polish=False)
    except ConvergenceError:
        return None, False
    return f.estimates, f.converged


def bootstrap_bands(
    data: CountSample,
    spec: ModelSpec,
    fit: FitResult,
    B: int = 1000,
    level: float = 0.95,
    seed: int = 0,
    *,
    parametric: bool = False,
    jobs: int = 1,
    n_starts: int = 1,
    max_fail: float = 0.2,
) -> dict[str, tuple[float, float]]:
    """Percentile bootstrap intervals for every free parameter.

    The default is the nonparametric bootstrap (resampling observations);
    ``parametric=True`` simulates from the fitted model instead. Replicates
    are refitted from the point estimate.
    """
    if not fit.converged:
        raise UsageError("bootstrap requires a converged fit")
    if B < 100:
        raise UsageError("bootstrap needs B >= 100 replicates")
    if not 0 < level < 1:
        raise UsageError("level must lie in (0, 1)")
    tasks = [(data, spec, fit.estimates, seed, b, parametric, n_starts) for b in range(B)]
    out = pmap(_boot_task, tasks, jobs)
    failed = sum(1 for _, ok in out if not ok)
    if failed > max_fail * B:
        raise BandError(f"{failed} of {B} bootstrap refits failed", failed, B)
    ests = [e for e, ok in out if ok]
    alpha = (1.0 - level) / 2.0
    bands = {}
    for name in spec.param_names:
        vals = np.array([getattr(e, name) for e in ests])
        lo, hi = np.quantile(vals, [alpha, 1.0 - alpha])
        bands[name] = (float(lo), float(hi))
    if failed:
        log.info("bootstrap: %d of %d refits did not converge", failed, B)
    return bands


def with_bands(fit: FitResult, bands) -> FitResult:
    return replace(fit, boot_bands=bands)


# --- model comparison --------------------------------------------------------

def compare_bic(fits) -> list[FitResult]:
    """Fits ordered by BIC, then by parameter count, then by model name."""
    fits = list(fits)
    if not fits:
        return []
    keys = {(f.n, f.data_fingerprint) for f in fits}
    if len(keys) > 1:
        raise UsageError("fits were computed on different data")
    return sorted(fits, key=lambda f: (f.bic, f.k, f.spec.name))
