import numpy as np
import pytest

from degpd.counts import CountSample
from degpd.errors import DomainError, UsageError


def test_from_observations_builds_sorted_table():
    s = CountSample.from_observations([3, 0, 0])
    assert s.as_dict() == {0: 2, 3: 1}
    assert s.n == 3 and len(s) == 3
    assert s.observations().tolist() == [0, 0, 3]


def test_table_and_observation_forms_agree():
    a = CountSample.from_observations([0, 0, 3])
    b = CountSample.from_table({3: 1, 0: 2})
    c = CountSample.from_table([(0, 1), (3, 1), (0, 1), (7, 0)])
    assert a.fingerprint() == b.fingerprint() == c.fingerprint()


def test_integer_valued_floats_accepted():
    assert CountSample.from_observations(np.array([1.0, 2.0])).as_dict() == {1: 1, 2: 1}


@pytest.mark.parametrize("bad", [[-1], [1.5], [np.nan], ["a"]])
def test_rejects_invalid_observations(bad):
    with pytest.raises(DomainError):
        CountSample.from_observations(bad)


def test_rejects_invalid_tables():
    with pytest.raises(DomainError):
        CountSample(np.array([2, 1]), np.array([1, 1]))
    with pytest.raises(DomainError):
        CountSample(np.array([1]), np.array([0]))
    with pytest.raises(DomainError):
        CountSample.from_table({1: -2})


def test_empty_sample():
    s = CountSample.from_observations([])
    assert s.n == 0 and s.zero_fraction == 0.0
    with pytest.raises(UsageError):
        s.require_nonempty()


def test_zero_fraction():
    assert CountSample.from_observations([0, 0, 1, 5]).zero_fraction == 0.5
    assert CountSample.from_observations([1, 5]).zero_fraction == 0.0


def test_exceedances():
    s = CountSample.from_observations([0, 1, 2, 2, 6])
    assert s.exceedances(2).as_dict() == {0: 2, 4: 1}
    assert s.exceedances(7).n == 0
    with pytest.raises(DomainError):
        s.exceedances(-1)


def test_resample_is_seeded_and_preserves_size():
    s = CountSample.from_observations(np.arange(50) % 7)
    a = s.resample(np.random.default_rng(3))
    b = s.resample(np.random.default_rng(3))
    assert a.n == s.n and a.as_dict() == b.as_dict()
    assert set(a.as_dict()) <= set(s.as_dict())


def test_immutable_arrays():
    s = CountSample.from_observations([1, 2])
    with pytest.raises(ValueError):
        s.values[0] = 5
