import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degpd.carrier import (
    CarrierFamily,
    CarrierKind,
    carrier_cdf,
    carrier_density,
    carrier_isf,
    carrier_quantile,
    carrier_sf,
)
from degpd.errors import DomainError

M1 = CarrierKind(CarrierFamily.POWER)
M2 = CarrierKind(CarrierFamily.NORMAL)
M3 = CarrierKind(CarrierFamily.BETA)
KINDS = [M1, M2, M3]
KAPPAS = [0.5, 1.0, 2.0, 5.0, 10.0]

# mpmath, 50 digits, from the Phi / regularized incomplete beta formulas
M2_ORACLE = [
    (0.3, 2.0, 0.19567989076537652857),
    (0.9, 10.0, 0.75144053850357493418),
    (0.01, 0.5, 0.0084627863373380505561),
    (0.999, 5.0, 0.99816947856033918843),
]
M3_ORACLE = [
    (0.3, 2.0, 0.15207182320441988056),
    (0.9, 10.0, 0.67816035963046148371),
    (0.01, 0.5, 0.021418090144727723783),
    (0.999, 5.0, 0.99769285820404897226),
]
# 1 - G(1 - 1e-7)
M2_SF = {2.0: 1.3390033289820824578e-7, 10.0: 2.5270884319576766657e-7,
         0.5: 1.0839379750064067722e-7, 5.0: 1.8305229650954548567e-7}
M3_SF = {2.0: 1.4143646408839737569e-7, 10.0: 3.3036947254549054987e-7,
         0.5: 7.7136678267893626708e-8, 5.0: 2.3071444996338205109e-7}


def test_examples():
    assert carrier_cdf(0.25, M1, 2.0) == 0.0625
    assert abs(carrier_cdf(0.4, M3, 1.0) - 0.4) <= 1e-15
    assert abs(carrier_cdf(0.3, M2, 1e-8) - 0.3) <= 1e-6
    assert abs(carrier_quantile(0.0625, M1, 2.0) - 0.25) <= 1e-15
    assert abs(carrier_density(0.5, M1, 1.0) - 1.0) <= 1e-15
    assert abs(carrier_density(0.5, M2, 1e-8) - 1.0) <= 1e-5


def test_m2_small_kappa_taylor():
    # G(u) ~ u - kappa v (1 - v^2) / 6 with v = 1 - u
    for k in (1e-3, 1e-5, 1e-8):
        u = np.linspace(0, 1, 101)
        v = 1 - u
        taylor = u - k * v * (1 - v * v) / 6
        assert np.max(np.abs(carrier_cdf(u, M2, k) - taylor)) <= 5 * k * k


@pytest.mark.parametrize("u,k,ref", M2_ORACLE)
def test_m2_oracle(u, k, ref):
    assert abs(carrier_cdf(u, M2, k) - ref) <= 1e-14


@pytest.mark.parametrize("u,k,ref", M3_ORACLE)
def test_m3_oracle(u, k, ref):
    assert abs(carrier_cdf(u, M3, k) - ref) <= 1e-14


@pytest.mark.parametrize("k", sorted(M2_SF))
def test_upper_tail_relative_accuracy(k):
    assert abs(carrier_sf(1e-7, M2, k) / M2_SF[k] - 1) <= 1e-12
    assert abs(carrier_sf(1e-7, M3, k) / M3_SF[k] - 1) <= 1e-12


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.name)
@pytest.mark.parametrize("k", KAPPAS)
def test_endpoints_and_monotone(kind, k):
    assert carrier_cdf(0.0, kind, k) == 0.0
    assert carrier_cdf(1.0, kind, k) == 1.0
    assert carrier_quantile(0.0, kind, k) == 0.0
    assert carrier_quantile(1.0, kind, k) == 1.0
    g = carrier_cdf(np.linspace(0, 1, 1000), kind, k)
    assert np.all(np.diff(g) >= 0)


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.name)
@pytest.mark.parametrize("k", KAPPAS)
def test_sf_matches_cdf(kind, k):
    v = np.linspace(0, 1, 257)
    assert np.max(np.abs(carrier_sf(v, kind, k) - (1 - carrier_cdf(1 - v, kind, k)))) <= 1e-14


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.name)
@pytest.mark.parametrize("k", KAPPAS + [0.05, 40.0])
def test_quantile_round_trip(kind, k):
    p = np.linspace(0, 1, 1001)
    assert np.max(np.abs(carrier_cdf(carrier_quantile(p, kind, k), kind, k) - p)) <= 1e-9
    # the tail inverse is relative-accurate where v is resolvable, q <= 1/2
    q = np.logspace(-15, np.log10(0.5), 200)
    back = carrier_sf(carrier_isf(q, kind, k), kind, k)
    assert np.max(np.abs(back / q - 1)) <= 1e-8


def test_m3_round_trip_example():
    x = carrier_quantile(0.4, M3, 3.0)
    assert abs(carrier_cdf(x, M3, 3.0) - 0.4) <= 1e-8


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.name)
@pytest.mark.parametrize("k", KAPPAS)
def test_density_is_derivative(kind, k):
    u = np.linspace(0.05, 0.95, 19)
    h = 1e-5
    fd = (carrier_cdf(u + h, kind, k) - carrier_cdf(u - h, kind, k)) / (2 * h)
    d = carrier_density(u, kind, k)
    assert np.max(np.abs(fd / d - 1)) <= 1e-5


def test_m3_density_example():
    h = 1e-5
    fd = (carrier_cdf(0.5 + h, M3, 2.0) - carrier_cdf(0.5 - h, M3, 2.0)) / (2 * h)
    assert abs(carrier_density(0.5, M3, 2.0) / fd - 1) <= 1e-5


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.name)
@pytest.mark.parametrize("k", KAPPAS)
def test_upper_tail_condition(kind, k):
    # (1 - G(1 - u)) / u stabilises to a positive constant
    r = [carrier_sf(u, kind, k) / u for u in (1e-3, 1e-4, 1e-5)]
    assert all(np.isfinite(r)) and min(r) > 0
    assert abs(r[1] / r[0] - 1) < 0.05 and abs(r[2] / r[1] - 1) < 0.05


@pytest.mark.parametrize("k", KAPPAS)
def test_lower_tail_condition_m1(k):
    u = np.logspace(-8, 0, 50)
    assert np.max(np.abs(carrier_cdf(u, M1, k) / u**k - 1)) <= 1e-15


def _lower_ratios(kind, k, points=(1e-3, 1e-4, 1e-5)):
    return [carrier_cdf(x, kind, k) / x for x in points]


@pytest.mark.parametrize("kind", [M2, M3], ids=lambda k: k.name)
@pytest.mark.parametrize("k", KAPPAS)
def test_lower_tail_ratio_converges(kind, k):
    r = _lower_ratios(kind, k, (1e-4, 1e-5, 1e-6, 1e-7))
    assert min(r) > 0 and all(np.isfinite(r))
    assert abs(r[-1] / r[-2] - 1) < 1e-3


_STEEP = pytest.mark.xfail(
    strict=True,
    reason="G(u)/u still drifts by about 6% between u=1e-3 and 1e-4 at this kappa",
)


@pytest.mark.parametrize(
    "kind,k",
    [(M2, k) for k in KAPPAS]
    + [pytest.param(M3, k, marks=[_STEEP] if k == 10.0 else []) for k in KAPPAS],
    ids=lambda v: v.name if isinstance(v, CarrierKind) else str(v),
)
def test_lower_tail_condition_5_percent(kind, k):
    r = _lower_ratios(kind, k)
    assert abs(r[1] / r[0] - 1) < 0.05 and abs(r[2] / r[1] - 1) < 0.05


def test_dgpd_recovery_points():
    u = np.linspace(0, 1, 1001)
    assert np.max(np.abs(carrier_cdf(u, M1, 1.0) - u)) <= 1e-12
    assert np.max(np.abs(carrier_cdf(u, M3, 1.0) - u)) <= 1e-12
    assert np.max(np.abs(carrier_cdf(u, M2, 1e-8) - u)) <= 1e-6


def test_validation():
    with pytest.raises(DomainError):
        carrier_cdf(1.2, M1, 1.0)
    with pytest.raises(DomainError):
        carrier_cdf(0.5, M1, 0.0)
    with pytest.raises(DomainError):
        carrier_density(0.0, M2, 1.0)
    with pytest.raises(DomainError):
        CarrierKind(CarrierFamily.BETA, omega=0.5)
    assert CarrierKind(CarrierFamily.POWER, omega=0.7).family is CarrierFamily.POWER


@pytest.mark.parametrize("omega", [0.01, 1 / 32, 0.2, 0.45])
def test_other_omegas(omega):
    kind = CarrierKind(CarrierFamily.BETA, omega)
    u = np.linspace(0, 1, 101)
    assert np.max(np.abs(carrier_cdf(u, kind, 1.0) - u)) <= 1e-12
    p = np.linspace(0, 1, 101)
    assert np.max(np.abs(carrier_cdf(carrier_quantile(p, kind, 4.0), kind, 4.0) - p)) <= 1e-9


@given(st.sampled_from(KINDS), st.floats(0.01, 50.0), st.floats(0.0, 1.0))
@settings(max_examples=300, deadline=None)
def test_cdf_in_unit_interval(kind, k, u):
    g = carrier_cdf(u, kind, k)
    assert 0.0 <= g <= 1.0
    assert 0.0 <= carrier_quantile(g, kind, k) <= 1.0
