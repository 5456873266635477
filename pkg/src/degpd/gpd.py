"""Continuous generalized Pareto distribution restricted to xi >= 0.

The public functions validate their inputs; the underscore-prefixed
kernels skip validation and are what the likelihood loops call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

#: Below this shape value the exponential limit is used.
XI_EPS = 1e-9


@dataclass(frozen=True)
class GpdParams:
    beta: float
    xi: float

    def __post_init__(self):
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise DomainError(f"GPD scale must be positive, got {self.beta}")
        if not (np.isfinite(self.xi) and self.xi >= 0):
            raise DomainError(f"GPD shape must be >= 0, got {self.xi}")


def _log_sf(z, beta, xi):
    t = np.asarray(z, dtype=float) / beta
    if xi <= XI_EPS:
        return -t
    return -np.log1p(xi * t) / xi


def _cdf(z, beta, xi):
    return -np.expm1(_log_sf(z, beta, xi))


def _sf(z, beta, xi):
    return np.exp(_log_sf(z, beta, xi))


def _quantile(p, beta, xi):
    # log1p(-p) keeps accuracy for small p
    lq = np.log1p(-np.asarray(p, dtype=float))
    if xi <= XI_EPS:
        return -beta * lq
    return beta / xi * np.expm1(-xi * lq)


def _isf(q, beta, xi):
    with np.errstate(divide="ignore"):
        lq = np.log(np.asarray(q, dtype=float))
    if xi <= XI_EPS:
        return -beta * lq
    return beta / xi * np.expm1(-xi * lq)


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def gpd_cdf(z, params: GpdParams):
    """CDF ``1 - (1 + xi z / beta)^(-1/xi)``, exponential for xi <= XI_EPS."""
    z = np.asarray(z, dtype=float)
    if np.any(~(z >= 0)):
        raise DomainError("gpd_cdf requires z >= 0")
    return _out(_cdf(z, params.beta, params.xi))


def gpd_sf(z, params: GpdParams):
    z = np.asarray(z, dtype=float)
    if np.any(~(z >= 0)):
        raise DomainError("gpd_sf requires z >= 0")
    return _out(_sf(z, params.beta, params.xi))


def gpd_quantile(p, params: GpdParams):
    p = np.asarray(p, dtype=float)
    if np.any(p == 1):
        raise DomainError("gpd_quantile(1) is infinite for xi >= 0")
    if np.any(~(p >= 0) | ~(p < 1)):
        raise DomainError("gpd_quantile requires 0 <= p < 1")
    return _out(_quantile(p, params.beta, params.xi))


def gpd_isf(q, params: GpdParams):
    """Inverse survival function; accurate when ``q`` is tiny."""
    q = np.asarray(q, dtype=float)
    if np.any(~(q > 0) | ~(q <= 1)):
        raise DomainError("gpd_isf requires 0 < q <= 1")
    return _out(_isf(q, params.beta, params.xi))
