"""Discrete GPD families: DGPD, DEGPD and zero-inflated DEGPD.

Every family is built from the same two-layer transform: the GPD CDF ``F``
feeds a carrier ``G`` (identity for the DGPD), and probabilities of the
integer ``y`` are differences of ``G(F(.))`` at ``y`` and ``y + 1``.
Zero inflation mixes in a point mass ``pi`` at zero.

Differences are taken on whichever side of the distribution is better
conditioned: ``G(F(y+1)) - G(F(y))`` in the body and
``Gbar(S(y)) - Gbar(S(y+1))`` in the upper tail, where ``S = 1 - F`` and
``Gbar(v) = 1 - G(1 - v)`` are evaluated directly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields

import numpy as np

from . import carrier as _carrier
from . import gpd as _gpd
from .carrier import DEFAULT_OMEGA, CarrierFamily, CarrierKind
from .errors import ConfigurationError, DomainError

# int64-safe ceiling for quantiles of extremely heavy tails
_MAX_COUNT = float(2 ** 62)


class Family(str, enum.Enum):
    DGPD = "dgpd"
    DEGPD = "degpd"
    ZIDEGPD = "zidegpd"


_PARAM_NAMES = {
    Family.DGPD: ("beta", "xi"),
    Family.DEGPD: ("kappa", "beta", "xi"),
    Family.ZIDEGPD: ("pi", "kappa", "beta", "xi"),
}


@dataclass(frozen=True)
class ModelSpec:
    """Model family plus carrier (absent for the DGPD)."""

    family: Family
    carrier: CarrierKind | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.family is Family.DGPD and self.carrier is not None:
            raise ConfigurationError("the DGPD takes no carrier")
        if self.family is not Family.DGPD and self.carrier is None:
            raise ConfigurationError(f"{self.family.value} needs a carrier")

    @classmethod
    def parse(cls, name: str, omega: float = DEFAULT_OMEGA) -> "ModelSpec":
        """Build a spec from ``dgpd``, ``degpd-m1`` ... ``zidegpd-m3``."""
        key = name.strip().lower()
        if key == "dgpd":
            return cls(Family.DGPD)
        fam, _, car = key.partition("-")
        try:
            return cls(Family(fam), CarrierKind(CarrierFamily(car), omega))
        except ValueError as exc:
            if isinstance(exc, DomainError):
                raise
            raise ConfigurationError(f"unknown model selector {name!r}") from None

    @property
    def name(self) -> str:
        if self.carrier is None:
            return self.family.value
        return f"{self.family.value}-{self.carrier.name}"

    @property
    def param_names(self) -> tuple[str, ...]:
        return _PARAM_NAMES[self.family]

    @property
    def n_params(self) -> int:
        return len(self.param_names)

    @property
    def omega(self) -> float | None:
        if self.carrier is None or self.carrier.family is not CarrierFamily.BETA:
            return None
        return self.carrier.omega


@dataclass(frozen=True, kw_only=True)
class ParamVector:
    """Model parameters. Unused fields must be left as ``None``."""

    pi: float | None = None
    kappa: float | None = None
    beta: float
    xi: float

    def __post_init__(self):
        for f in fields(self):
            val = getattr(self, f.name)
            if val is not None:
                object.__setattr__(self, f.name, float(val))
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise DomainError(f"beta must be positive, got {self.beta}")
        if not (np.isfinite(self.xi) and self.xi >= 0):
            raise DomainError(f"xi must be >= 0, got {self.xi}")
        if self.kappa is not None and not (np.isfinite(self.kappa) and self.kappa > 0):
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if self.pi is not None and not (0 <= self.pi <= 1):
            raise DomainError(f"pi must lie in [0, 1], got {self.pi}")

    def check(self, spec: ModelSpec) -> "ParamVector":
        needed = set(spec.param_names)
        for name in ("pi", "kappa"):
            present = getattr(self, name) is not None
            if present and name not in needed:
                raise ConfigurationError(f"{spec.name} has no parameter {name!r}")
            if not present and name in needed:
                raise ConfigurationError(f"{spec.name} requires parameter {name!r}")
        return self

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)
                if getattr(self, f.name) is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "ParamVector":
        return cls(**{k: d[k] for k in ("pi", "kappa", "beta", "xi") if d.get(k) is not None})


# --- kernels -----------------------------------------------------------------

def _unpack(spec: ModelSpec, params: ParamVector):
    fam = None if spec.carrier is None else spec.carrier.family
    omega = spec.carrier.omega if spec.carrier is not None else DEFAULT_OMEGA
    pi = params.pi if params.pi is not None else 0.0
    kappa = params.kappa if params.kappa is not None else 1.0
    return fam, omega, pi, kappa, params.beta, params.xi


def _g_pair(z, fam, omega, kappa, beta, xi):
    """Carrier CDF and survival at the GPD transform of ``z``.

    Returns ``(g, gbar, body)``. Where ``body`` is true, ``g = G(F(z))`` is
    exact and ``gbar = 1 - g``; elsewhere ``gbar = Gbar(S(z))`` is exact and
    ``g = 1 - gbar``. ``body`` is equivalent to ``g < 1/2``.
    """
    ls = _gpd._log_sf(z, beta, xi)
    s = np.exp(ls)
    f = -np.expm1(ls)
    if fam is None:
        return f, s, f < 0.5
    u_med = _carrier._median(fam, kappa, omega)
    body = f < u_med
    g = np.empty_like(f)
    gbar = np.empty_like(f)
    g[body] = _carrier._cdf(f[body], fam, kappa, omega)
    gbar[body] = 1.0 - g[body]
    gbar[~body] = _carrier._sf(s[~body], fam, kappa, omega)
    g[~body] = 1.0 - gbar[~body]
    return g, gbar, body


def _pmf_run(y0, m, fam, omega, kappa, beta, xi):
    """pmf on the contiguous run y0, ..., y0 + m - 1."""
    ls = _gpd._log_sf(np.arange(y0, y0 + m + 1, dtype=float), beta, xi)
    if fam is None:
        u_med = 0.5
    else:
        u_med = _carrier._median(fam, kappa, omega)
    # ls is decreasing, so the body (F < u_med) is a prefix
    k = int(np.searchsorted(-ls, -np.log1p(-u_med), side="right"))
    k = min(k, m)
    f = -np.expm1(ls[:k + 1])
    s = np.exp(ls[k:])
    if fam is not None:
        f = _carrier._cdf(f, fam, kappa, omega)
        s = _carrier._sf(s, fam, kappa, omega)
    d = np.empty(m)
    d[:k] = np.diff(f)[:k]
    d[k:] = -np.diff(s)
    return d


def _pmf(y, fam, omega, pi, kappa, beta, xi):
    y = np.asarray(y, dtype=float)
    if y.size > 1 and y[-1] - y[0] == y.size - 1 and np.all(np.diff(y) == 1):
        d = _pmf_run(y[0], y.size, fam, omega, kappa, beta, xi)
    else:
        g_lo, s_lo, body_lo = _g_pair(y, fam, omega, kappa, beta, xi)
        g_hi, s_hi, _ = _g_pair(y + 1.0, fam, omega, kappa, beta, xi)
        d = np.where(body_lo, g_hi - g_lo, s_lo - s_hi)
    d = np.maximum(d, 0.0)
    if pi == 0.0:
        return d
    return (1.0 - pi) * d + pi * (y == 0)


def _cdf(y, fam, omega, pi, kappa, beta, xi):
    y = np.asarray(y, dtype=float)
    g_hi, s_hi, body = _g_pair(np.maximum(y, -1.0) + 1.0, fam, omega, kappa, beta, xi)
    out = np.where(body, pi + (1.0 - pi) * g_hi, 1.0 - (1.0 - pi) * s_hi)
    return np.where(y < 0, 0.0, out)


def _sf(y, fam, omega, pi, kappa, beta, xi):
    y = np.asarray(y, dtype=float)
    _, s_hi, _ = _g_pair(np.maximum(y, -1.0) + 1.0, fam, omega, kappa, beta, xi)
    out = (1.0 - pi) * s_hi
    return np.where(y < 0, 1.0, out)


def _reaches(y, p, fam, omega, pi, kappa, beta, xi):
    """``cdf(y) >= p``, decided through the survival function when p > 1/2.

    ``1 - p`` is exact there, while ``cdf`` itself cannot resolve tail
    differences below an ulp of 1.
    """
    hi = p > 0.5
    out = np.empty(y.shape, dtype=bool)
    out[~hi] = _cdf(y[~hi], fam, omega, pi, kappa, beta, xi) >= p[~hi]
    out[hi] = _sf(y[hi], fam, omega, pi, kappa, beta, xi) <= 1.0 - p[hi]
    return out


def _quantile(p, fam, omega, pi, kappa, beta, xi):
    """Generalized inverse of the CDF for p in [0, 1)."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if pi >= 1.0:
        return np.zeros(p.shape, dtype=np.int64)
    zero = p <= pi
    ps = np.where(zero, 0.0, (p - pi) / (1.0 - pi))
    qs = np.where(zero, 1.0, (1.0 - p) / (1.0 - pi))

    z = np.empty_like(p)
    lo = ps < 0.5
    if fam is None:
        u, v = ps[lo], qs[~lo]
    else:
        u = _carrier._quantile(ps[lo], fam, kappa, omega)
        v = _carrier._isf(qs[~lo], fam, kappa, omega)
    z[lo] = _gpd._quantile(np.minimum(u, 1.0), beta, xi)
    with np.errstate(divide="ignore", over="ignore"):
        z[~lo] = _gpd._isf(v, beta, xi)
    z = np.nan_to_num(z, nan=_MAX_COUNT, posinf=_MAX_COUNT)
    y = np.maximum(np.ceil(np.minimum(z, _MAX_COUNT)) - 1.0, 0.0)

    # closed form can be one unit off at representable boundaries
    args = (fam, omega, pi, kappa, beta, xi)
    up = ~_reaches(y, p, *args)
    down = ~up & (y > 0) & _reaches(y - 1.0, p, *args)
    y = y + up - down
    y[zero] = 0.0
    return y.astype(np.int64)


# --- public API --------------------------------------------------------------

def _counts(y):
    arr = np.asarray(y)
    if arr.dtype.kind == "f":
        if np.any(~np.isfinite(arr)) or np.any(arr != np.floor(arr)):
            raise DomainError("counts must be integers")
    elif arr.dtype.kind not in "iu":
        raise DomainError("counts must be integers")
    if np.any(arr < 0):
        raise DomainError("counts must be non-negative")
    return arr


def _shape_out(x, like):
    x = np.asarray(x)
    return x.item() if np.ndim(like) == 0 else x.reshape(np.shape(like))


def pmf(y, spec: ModelSpec, params: ParamVector):
    """Probability mass at the non-negative integers ``y``."""
    params.check(spec)
    y = _counts(y)
    return _shape_out(_pmf(np.atleast_1d(y), *_unpack(spec, params)), y)


def logpmf(y, spec: ModelSpec, params: ParamVector):
    with np.errstate(divide="ignore"):
        return np.log(pmf(y, spec, params))


def cdf(y, spec: ModelSpec, params: ParamVector):
    params.check(spec)
    y = _counts(y)
    return _shape_out(_cdf(np.atleast_1d(y), *_unpack(spec, params)), y)


def sf(y, spec: ModelSpec, params: ParamVector):
    """Exact upper-tail mass ``P(Y > y)``."""
    params.check(spec)
    y = _counts(y)
    return _shape_out(_sf(np.atleast_1d(y), *_unpack(spec, params)), y)


tail_survival_bound = sf


def quantile(p, spec: ModelSpec, params: ParamVector):
    """Smallest integer ``y`` with ``cdf(y) >= p``, for ``0 < p < 1``."""
    params.check(spec)
    p_arr = np.asarray(p, dtype=float)
    if np.any(~(p_arr > 0) | ~(p_arr < 1)):
        raise DomainError("quantile requires 0 < p < 1")
    return _shape_out(_quantile(p_arr, *_unpack(spec, params)), p_arr)


def sample(n: int, spec: ModelSpec, params: ParamVector, seed=None, *, rng=None) -> np.ndarray:
    """Inverse-transform sample of size ``n`` (one uniform per draw).

    ``seed`` seeds a PCG64 generator; pass ``rng`` instead to continue an
    existing stream.
    """
    params.check(spec)
    if int(n) < 1:
        raise DomainError("sample size must be positive")
    if rng is None:
        rng = np.random.default_rng(seed)
    u = rng.random(int(n))
    return _quantile(u, *_unpack(spec, params))
