"""Carrier distributions G(u; kappa) on [0, 1].

Three families are provided:

* power (M1): ``G(u) = u**kappa``
* truncated normal (M2): normal with precision ``kappa`` centred at 1 and
  truncated to [0, 1]
* truncated beta (M3): symmetric Beta(kappa, kappa) restricted to
  ``(omega, 1/2)`` and rescaled to the unit interval

Besides ``G`` itself every family exposes its upper-tail form
``sf(v) = 1 - G(1 - v)`` evaluated directly from ``v``. The discrete models
compose these with the GPD survival function so that tail probabilities
never go through ``1 - (something close to 1)``.

For M2 the closed form is rewritten with ``s = sqrt(kappa / 2)``::

    sf(v) = erf(s v) / erf(s)

which stays well conditioned as ``kappa -> 0`` (where it tends to ``v``).
For M3, with ``c = 1 - 2 omega`` and ``x = (1/2 - omega) u + omega``::

    1/2 - I_x(k, k) = 1/2 * I_{(1 - 2x)^2}(1/2, k),   1 - 2x = c v

so ``sf(v) = I_{(c v)^2}(1/2, k) / I_{c^2}(1/2, k)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

from .errors import DomainError
from .special import _ibeta_inv

DEFAULT_OMEGA = 1.0 / 32.0

_SQRT_PI = np.sqrt(np.pi)
# below this s = sqrt(kappa/2) the M2 carrier is the identity to double precision
_M2_TINY_S = 1e-150


class CarrierFamily(str, enum.Enum):
    POWER = "m1"
    NORMAL = "m2"
    BETA = "m3"


@dataclass(frozen=True)
class CarrierKind:
    family: CarrierFamily
    omega: float = DEFAULT_OMEGA

    def __post_init__(self):
        object.__setattr__(self, "family", CarrierFamily(self.family))
        if self.family is CarrierFamily.BETA and not (0 < self.omega < 0.5):
            raise DomainError(f"omega must lie in (0, 1/2), got {self.omega}")

    @property
    def name(self) -> str:
        return self.family.value


def _check_kappa(kappa):
    if not (np.isfinite(kappa) and kappa > 0):
        raise DomainError(f"kappa must be positive, got {kappa}")


# --- kernels (no validation) -------------------------------------------------

def _m3_norm(kappa, omega):
    c = 1.0 - 2.0 * omega
    return sc.betainc(0.5, kappa, c * c), c


def _m3_lower_quantile(p, kappa, omega):
    k_norm, _ = _m3_norm(kappa, omega)
    target = sc.betainc(kappa, kappa, omega) + p * 0.5 * k_norm
    x = _ibeta_inv(kappa, kappa, target)
    return (x - omega) / (0.5 - omega)


def _m3_upper_isf(q, kappa, omega):
    k_norm, c = _m3_norm(kappa, omega)
    return np.sqrt(_ibeta_inv(0.5, kappa, q * k_norm)) / c


def _cdf(u, family, kappa, omega):
    u = np.asarray(u, dtype=float)
    if family is CarrierFamily.POWER:
        return u ** kappa
    if family is CarrierFamily.NORMAL:
        s = np.sqrt(0.5 * kappa)
        if s < _M2_TINY_S:
            return u.copy()
        v = 1.0 - u
        if s <= 1.0:
            return (sc.erf(s) - sc.erf(s * v)) / sc.erf(s)
        return (sc.erfc(s * v) - sc.erfc(s)) / sc.erf(s)
    # the direct form is absolutely accurate on all of [0, 1]; upper-tail
    # accuracy is the job of _sf
    k_norm, _ = _m3_norm(kappa, omega)
    x = (0.5 - omega) * u + omega
    out = (sc.betainc(kappa, kappa, x) - sc.betainc(kappa, kappa, omega)) / (0.5 * k_norm)
    out = np.clip(out, 0.0, 1.0)
    out[u == 1.0] = 1.0
    return out


def _sf(v, family, kappa, omega):
    v = np.asarray(v, dtype=float)
    if family is CarrierFamily.POWER:
        with np.errstate(divide="ignore"):
            return -np.expm1(kappa * np.log1p(-v))
    if family is CarrierFamily.NORMAL:
        s = np.sqrt(0.5 * kappa)
        if s < _M2_TINY_S:
            return v.copy()
        return sc.erf(s * v) / sc.erf(s)
    k_norm, c = _m3_norm(kappa, omega)
    w = c * v
    return sc.betainc(0.5, kappa, w * w) / k_norm


def _pin_ends(x, arg):
    # the endpoints map to themselves exactly
    x[arg == 0.0] = 0.0
    x[arg == 1.0] = 1.0
    return x


def _quantile(p, family, kappa, omega):
    p = np.asarray(p, dtype=float)
    if family is CarrierFamily.POWER:
        return p ** (1.0 / kappa)
    if family is CarrierFamily.BETA:
        lo = p <= 0.5
        out = np.empty_like(p)
        out[lo] = _m3_lower_quantile(p[lo], kappa, omega)
        out[~lo] = 1.0 - _m3_upper_isf(1.0 - p[~lo], kappa, omega)
        return _pin_ends(np.clip(out, 0.0, 1.0), p)
    return _pin_ends(np.clip(1.0 - _isf(1.0 - p, family, kappa, omega), 0.0, 1.0), p)


def _isf(q, family, kappa, omega):
    """v with sf(v) = q."""
    q = np.asarray(q, dtype=float)
    if family is CarrierFamily.POWER:
        with np.errstate(divide="ignore"):
            return -np.expm1(np.log1p(-q) / kappa)
    if family is CarrierFamily.NORMAL:
        s = np.sqrt(0.5 * kappa)
        if s < _M2_TINY_S:
            return q.copy()
        es = sc.erf(s)
        t = q * es
        out = np.empty_like(q)
        lo = t <= 0.5
        out[lo] = sc.erfinv(t[lo]) / s
        # 1 - q erf(s) = (1 - q) + q erfc(s), free of cancellation
        out[~lo] = sc.erfcinv((1.0 - q[~lo]) + q[~lo] * sc.erfc(s)) / s
        return _pin_ends(np.clip(out, 0.0, 1.0), q)
    lo = q <= 0.5
    out = np.empty_like(q)
    out[lo] = _m3_upper_isf(q[lo], kappa, omega)
    out[~lo] = 1.0 - _m3_lower_quantile(1.0 - q[~lo], kappa, omega)
    return _pin_ends(np.clip(out, 0.0, 1.0), q)


def _median(family, kappa, omega) -> float:
    if family is CarrierFamily.POWER:
        return 0.5 ** (1.0 / kappa)
    return float(_quantile(np.array([0.5]), family, kappa, omega)[0])


def _density(u, family, kappa, omega):
    u = np.asarray(u, dtype=float)
    if family is CarrierFamily.POWER:
        return kappa * u ** (kappa - 1.0)
    if family is CarrierFamily.NORMAL:
        s = np.sqrt(0.5 * kappa)
        if s < _M2_TINY_S:
            return np.ones_like(u)
        v = 1.0 - u
        return 2.0 / _SQRT_PI * s * np.exp(-(s * v) ** 2) / sc.erf(s)
    k_norm, _ = _m3_norm(kappa, omega)
    x = (0.5 - omega) * u + omega
    log_pdf = (kappa - 1.0) * (np.log(x) + np.log1p(-x)) - sc.betaln(kappa, kappa)
    return (0.5 - omega) * np.exp(log_pdf) / (0.5 * k_norm)


# --- public API --------------------------------------------------------------

def _apply(kernel, x, kind, kappa):
    x = np.asarray(x, dtype=float)
    r = kernel(np.atleast_1d(x), kind.family, kappa, kind.omega)
    return float(r[0]) if x.ndim == 0 else r.reshape(x.shape)


def _unit(x, name, *, open_interval=False):
    x = np.asarray(x, dtype=float)
    bad = ~(x > 0) | ~(x < 1) if open_interval else ~(x >= 0) | ~(x <= 1)
    if np.any(bad):
        rng = "(0, 1)" if open_interval else "[0, 1]"
        raise DomainError(f"{name} must lie in {rng}")
    return x


def carrier_cdf(u, kind: CarrierKind, kappa: float):
    """Evaluate G(u; kappa)."""
    _check_kappa(kappa)
    u = _unit(u, "u")
    return _apply(_cdf, u, kind, kappa)


def carrier_sf(v, kind: CarrierKind, kappa: float):
    """Evaluate ``1 - G(1 - v; kappa)`` directly from ``v``."""
    _check_kappa(kappa)
    v = _unit(v, "v")
    return _apply(_sf, v, kind, kappa)


def carrier_quantile(p, kind: CarrierKind, kappa: float):
    _check_kappa(kappa)
    p = _unit(p, "p")
    return _apply(_quantile, p, kind, kappa)


def carrier_isf(q, kind: CarrierKind, kappa: float):
    """Return ``v`` such that ``carrier_sf(v) == q``."""
    _check_kappa(kappa)
    q = _unit(q, "q")
    return _apply(_isf, q, kind, kappa)


def carrier_density(u, kind: CarrierKind, kappa: float):
    """Derivative of :func:`carrier_cdf` on the open unit interval."""
    _check_kappa(kappa)
    u = _unit(u, "u", open_interval=True)
    return _apply(_density, u, kind, kappa)
