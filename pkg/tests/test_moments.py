import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_central, exact_moments
from tapevar.errors import NegativeVariance, OrderOverflow
from tapevar.moments import (
    FrequencyDistribution,
    central_stats,
    compute_moments,
    price_distribution,
    third_central,
    value_distribution,
    volatility,
    volume_distribution,
    vwap,
)
from tapevar.tape import TradeSlice

TWO = TradeSlice.from_pairs([(4, 2), (9, 3)])
NEG = TradeSlice.from_pairs([(10, 2), (6, 3), (8, 1)])


def _slice(values, volumes=None):
    volumes = volumes or [1] * len(values)
    return TradeSlice.from_pairs(zip(values, volumes))


@pytest.mark.parametrize("values, atoms, masses", [
    ([4, 9], [(4, 1), (9, 1)], [0.5, 0.5]),
    ([5, 5, 5], [(5, 3)], [1.0]),
    ([1, 2, 2, 3], [(1, 1), (2, 2), (3, 1)], [0.25, 0.5, 0.25]),
])
def test_value_distribution(values, atoms, masses):
    d = value_distribution(_slice(values))
    assert d.atoms == atoms
    assert list(d.masses) == masses
    assert d.total == len(values)


@pytest.mark.parametrize("volumes, atoms", [
    ([2, 3], [(2, 1), (3, 1)]),
    ([1, 1, 1, 1], [(1, 4)]),
    ([1, 1, 2], [(1, 2), (2, 1)]),
])
def test_volume_distribution(volumes, atoms):
    d = volume_distribution(_slice([1] * len(volumes), volumes))
    assert d.atoms == atoms


def test_volume_distribution_masses():
    d = volume_distribution(_slice([1, 1, 1], [1, 1, 2]))
    assert d.masses == pytest.approx([2 / 3, 1 / 3], abs=1e-15)


@pytest.mark.parametrize("pairs, masses", [
    ([(4, 2), (9, 3)], [0.5, 0.5]),
    ([(5, 1)], [1.0]),
    ([(2, 1), (4, 2), (8, 1)], [2 / 3, 1 / 3]),
])
def test_price_distribution(pairs, masses):
    d = price_distribution(TradeSlice.from_pairs(pairs))
    assert d.masses == pytest.approx(masses, abs=1e-15)
    assert math.fsum(d.masses) == pytest.approx(1.0, abs=1e-15)


def test_distribution_csv():
    d = price_distribution(TWO)
    assert d.to_csv() == "level,count,mass\n2.0,1,0.5\n3.0,1,0.5\n"


def test_moments_two_trade_oracle():
    m = compute_moments(TWO, 3)
    assert m.C_sum == (13.0, 97.0, 793.0)
    assert m.U_sum == (5.0, 13.0, 35.0)
    for n in (1, 2, 3):
        p, pi = exact_moments([(4, 2), (9, 3)], n)
        assert m.market(n) == pytest.approx(float(p), rel=1e-15)
        assert m.frequency(n) == pytest.approx(float(pi), rel=1e-15)
    assert m.p[:2] == pytest.approx((2.6, 97 / 13), rel=1e-15)
    assert m.pi[:2] == (2.5, 6.5)
    assert m.C_m == tuple(c / 2 for c in m.C_sum)


def test_unit_volume_equivalence():
    m = compute_moments(_slice([3.5, 7.25, 1.0, 11.0]), 4)
    assert m.p == m.pi


def test_single_trade():
    m = compute_moments(TradeSlice.from_pairs([(6, 2)]), 3)
    assert m.p == m.pi == (3.0, 9.0, 27.0)


def test_order_overflow():
    with pytest.raises(OrderOverflow) as exc:
        compute_moments(TradeSlice.from_pairs([(1.0, 1.0), (1e200, 1.0)]), 2)
    assert exc.value.n == 2 and exc.value.index == 1


def test_vwap_examples():
    assert vwap(TWO) == 2.6
    assert vwap(TradeSlice.from_pairs([(10, 4)])) == 2.5
    assert vwap(TradeSlice.from_pairs([(7 * u, u) for u in (1, 3.5, 12, 0.25)])) == 7.0


def test_volatility_examples():
    m = compute_moments(TWO, 3)
    assert volatility(m, "market") == pytest.approx(97 / 13 - 6.76, rel=1e-13)
    assert volatility(m, "market") == pytest.approx(0.7015385, abs=1e-7)
    assert volatility(m, "frequency") == 0.25


def test_negative_market_variance():
    m = compute_moments(NEG, 3)
    with pytest.raises(NegativeVariance) as exc:
        volatility(m, "market")
    assert exc.value.variance == pytest.approx(-12 / 7, rel=1e-12)
    assert volatility(m, "frequency") == pytest.approx(6.0, rel=1e-15)


def test_third_central_market():
    m = compute_moments(TWO, 3)
    a3 = third_central(m, "market")
    assert a3 == pytest.approx(-0.3908571, abs=1e-7)
    # the market measure's moments are those of prices weighted by U^n per order,
    # so compare against the raw-moment identity in exact arithmetic
    p = [exact_moments([(4, 2), (9, 3)], n)[0] for n in (1, 2, 3)]
    exact = p[2] - 3 * p[0] * p[1] + 2 * p[0] ** 3
    assert a3 == pytest.approx(float(exact), rel=1e-12)


def test_third_central_frequency_brute_force():
    sl = TradeSlice.from_pairs([(1, 1), (6, 2), (2, 1), (30, 3), (7, 1)])
    m = compute_moments(sl, 3)
    expected = brute_central(sl.prices.tolist(), [1] * 5, 3)
    assert third_central(m, "frequency") == pytest.approx(float(expected), rel=1e-12)
    assert volatility(m, "frequency") == pytest.approx(
        float(brute_central(sl.prices.tolist(), [1] * 5, 2)), rel=1e-13)


def test_third_central_symmetric_and_single():
    m = compute_moments(_slice([2, 4]), 3)
    assert third_central(m, "frequency") == 0.0
    m1 = compute_moments(TradeSlice.from_pairs([(6, 2)]), 3)
    assert third_central(m1, "market") == 0.0
    assert third_central(m1, "frequency") == 0.0


def test_third_central_defined_with_negative_variance():
    m = compute_moments(NEG, 3)
    assert math.isfinite(third_central(m, "market"))


def test_central_stats():
    s = central_stats(compute_moments(TWO, 3), "frequency")
    assert (s.mean, s.variance, s.third_central, s.kind) == (2.5, 0.25, 0.0, "frequency")
    assert s.sigma == 0.5


def test_moment_json_schema():
    doc = json.loads(compute_moments(TWO, 2).to_json())
    assert doc["n_max"] == 2 and doc["N"] == 2
    assert set(doc["rows"][0]) == {"n", "C_sum", "U_sum", "C_m", "U_m", "p", "pi"}
    assert doc["rows"][1]["pi"] == 6.5


pos = st.floats(1e-3, 1e3, allow_nan=False)
pairs = st.lists(st.tuples(pos, pos), min_size=1, max_size=40)


@given(pairs)
def test_weighted_mean_bounds(ps):
    sl = TradeSlice.from_pairs(ps)
    m = compute_moments(sl, 4)
    lo, hi = sl.prices.min(), sl.prices.max()
    for n in range(1, 5):
        slack = 1e-12 * hi ** n
        assert lo ** n - slack <= m.market(n) <= hi ** n + slack
        assert lo ** n - slack <= m.frequency(n) <= hi ** n + slack


@given(pairs, pos)
def test_constant_volume_equivalence(ps, u):
    sl = TradeSlice.from_pairs([(c, u) for c, _ in ps])
    m = compute_moments(sl, 4)
    for n in range(1, 5):
        assert m.frequency(n) == pytest.approx(m.market(n), rel=1e-12)


@given(pairs)
def test_unit_volume_distributions_coincide(ps):
    sl = TradeSlice.from_pairs([(c, 1.0) for c, _ in ps])
    assert price_distribution(sl) == value_distribution(sl)


@given(pairs, st.floats(1e-2, 1e2))
def test_scale_covariance(ps, lam):
    base = compute_moments(TradeSlice.from_pairs(ps), 3)
    by_value = compute_moments(TradeSlice.from_pairs([(c * lam, u) for c, u in ps]), 3)
    by_volume = compute_moments(TradeSlice.from_pairs([(c, u * lam) for c, u in ps]), 3)
    for n in range(1, 4):
        assert by_value.market(n) == pytest.approx(base.market(n) * lam ** n, rel=1e-12)
        assert by_value.frequency(n) == pytest.approx(base.frequency(n) * lam ** n, rel=1e-12)
        assert by_volume.market(n) == pytest.approx(base.market(n) / lam ** n, rel=1e-12)
        assert by_volume.frequency(n) == pytest.approx(base.frequency(n) / lam ** n, rel=1e-12)


@given(pairs)
def test_vwap_is_first_market_moment(ps):
    sl = TradeSlice.from_pairs(ps)
    assert vwap(sl) == compute_moments(sl, 1).p[0]


@given(pairs)
def test_frequency_variance_nonnegative(ps):
    m = compute_moments(TradeSlice.from_pairs(ps), 2)
    assert volatility(m, "frequency") >= 0


@given(st.lists(st.floats(0.1, 10.0), min_size=1, max_size=50))
def test_distribution_masses_sum_to_one(xs):
    d = FrequencyDistribution.from_samples(xs)
    assert math.fsum(d.masses) == pytest.approx(1.0, abs=1e-14)
    assert d.total == len(xs)
    assert list(d.levels) == sorted(set(xs))
    assert np.all(np.diff(d.levels) > 0)
