"""Special functions used by the carrier families.

Thin, validated wrappers over :mod:`scipy.special`. All functions accept
scalars or arrays and return the same shape (0-d results come back as
plain floats).
"""

from __future__ import annotations

import numpy as np
from scipy import special as sc

from .errors import DomainError


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def std_normal_cdf(x):
    """Standard normal CDF."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("std_normal_cdf requires finite input")
    return _out(sc.ndtr(x))


def std_normal_quantile(p):
    """Inverse of :func:`std_normal_cdf` on the open interval (0, 1)."""
    p = np.asarray(p, dtype=float)
    if np.any(~(p > 0) | ~(p < 1)):
        raise DomainError("std_normal_quantile requires 0 < p < 1")
    return _out(sc.ndtri(p))


def log_gamma(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("log_gamma requires x > 0")
    return _out(sc.gammaln(x))


def _check_shapes(a, b):
    if np.any(~(np.asarray(a) > 0)) or np.any(~(np.asarray(b) > 0)):
        raise DomainError("incomplete beta shape parameters must be positive")


def reg_inc_beta(x, a, b):
    """Regularized incomplete beta function I_x(a, b)."""
    _check_shapes(a, b)
    x = np.asarray(x, dtype=float)
    if np.any(~(x >= 0) | ~(x <= 1)):
        raise DomainError("reg_inc_beta requires 0 <= x <= 1")
    return _out(sc.betainc(a, b, x))


def reg_inc_beta_complement(x, a, b):
    """``1 - I_x(a, b)`` without cancellation."""
    _check_shapes(a, b)
    x = np.asarray(x, dtype=float)
    if np.any(~(x >= 0) | ~(x <= 1)):
        raise DomainError("reg_inc_beta_complement requires 0 <= x <= 1")
    return _out(sc.betaincc(a, b, x))


def _ibeta_inv(a, b, p):
    """``betaincinv`` with a guard for the far lower tail.

    For tiny ``p`` scipy can return nan; there ``I_x(a, b)`` is dominated by
    its leading term ``x**a / (a B(a, b))``, which inverts in closed form.
    """
    a, b, p = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, p)))
    x = np.array(sc.betaincinv(a, b, p), dtype=float)
    bad = np.isnan(x) & ~np.isnan(p)
    if np.any(bad):
        with np.errstate(divide="ignore"):
            lx = (np.log(p[bad]) + np.log(a[bad]) + sc.betaln(a[bad], b[bad])) / a[bad]
        x[bad] = np.minimum(np.exp(lx), 1.0)
    return x


def reg_inc_beta_inverse(p, a, b, *, complement: bool = False):
    """Inverse of :func:`reg_inc_beta` in ``x``.

    With ``complement=True`` the argument is read as ``q = 1 - I_x(a, b)``,
    which keeps precision when ``I_x`` is close to one.
    """
    _check_shapes(a, b)
    p = np.asarray(p, dtype=float)
    if np.any(~(p >= 0) | ~(p <= 1)):
        raise DomainError("reg_inc_beta_inverse requires 0 <= p <= 1")
    if complement:
        return _out(sc.betainccinv(a, b, p))
    return _out(_ibeta_inv(a, b, p))
