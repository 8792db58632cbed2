import math
import random

import pytest

from varigap.extreal import INF, ExtendedValue, ExtRealError, add, scale


def test_add_finite():
    assert add(ExtendedValue(2.0), ExtendedValue(3.0)) == ExtendedValue(5.0)


def test_add_absorbs_infinity():
    assert add(INF, ExtendedValue(0.0)).is_infinite
    assert add(ExtendedValue(7.0), INF).is_infinite


def test_add_identity():
    for x in (0.0, 1.5, 1e300, math.inf):
        assert add(ExtendedValue(x), ExtendedValue(0.0)) == ExtendedValue(x)


def test_scale_infinity_by_zero_is_zero():
    assert scale(INF, 0.0) == ExtendedValue(0.0)


def test_scale_finite():
    assert scale(ExtendedValue(4.0), 0.5) == ExtendedValue(2.0)


def test_scale_infinity_by_tiny_positive():
    assert scale(INF, 1e-9).is_infinite


@pytest.mark.parametrize("bad", [-1.0, math.inf, math.nan])
def test_scale_rejects_bad_scalars(bad):
    with pytest.raises(ExtRealError):
        scale(ExtendedValue(1.0), bad)


def test_construction_rejects_negative_and_nan():
    with pytest.raises(ExtRealError):
        ExtendedValue(-0.5)
    with pytest.raises(ExtRealError):
        ExtendedValue(math.nan)


def test_infinite_payload_access_fails():
    with pytest.raises(ExtRealError):
        _ = INF.value
    assert ExtendedValue(3.0).value == 3.0


def test_ordering():
    assert INF > ExtendedValue(1e308)
    assert ExtendedValue(1.0) < ExtendedValue(2.0)
    assert INF == ExtendedValue(math.inf)
    assert ExtendedValue(2.0) == 2.0


def test_commutativity_and_monotonicity_random():
    rng = random.Random(7)
    values = [ExtendedValue(rng.uniform(0, 10)) for _ in range(50)]
    values += [INF, ExtendedValue(0.0)]
    for _ in range(500):
        a, b = rng.choice(values), rng.choice(values)
        assert add(a, b) == add(b, a)
        bigger = add(b, ExtendedValue(rng.uniform(0, 5)))
        assert add(a, b) <= add(a, bigger)
        assert not math.isnan(add(a, b).raw)
        c = rng.uniform(0, 3)
        assert not math.isnan(scale(a, c).raw)


def test_json_round_trip():
    assert ExtendedValue(2.5).to_json() == 2.5
    assert INF.to_json() == "inf"
    assert ExtendedValue.from_json("inf") == INF
    assert ExtendedValue.from_json(0.25) == ExtendedValue(0.25)
