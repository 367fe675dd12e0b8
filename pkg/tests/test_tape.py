import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tapevar.errors import (
    EmptyTape,
    EmptyWindow,
    InvalidSpec,
    MalformedRecord,
    NonPositiveValue,
    NonPositiveVolume,
    PriceInconsistent,
)
from tapevar.tape import (
    TapeSpec,
    Trade,
    TradeSlice,
    TradeTape,
    Window,
    parse_tape,
    select_window,
    serialize_tape,
    synthesize_tape,
    window_centers,
)


def test_parse_two_trades():
    tape = parse_tape("t,value,volume\n1,4,2\n2,9,3")
    assert len(tape) == 2
    assert [tr.price for tr in tape] == [2.0, 3.0]


def test_parse_unit_volume():
    (trade,) = parse_tape("t,value,volume\n1,5,1").trades
    assert trade.price == 5.0


def test_parse_zero_volume():
    with pytest.raises(NonPositiveVolume) as exc:
        parse_tape("t,value,volume\n1,4,0")
    assert exc.value.row == 2 and exc.value.column == "volume"


@pytest.mark.parametrize("text, error", [
    ("t,value,volume\n1,-4,2", NonPositiveValue),
    ("t,value,volume\n1,x,2", MalformedRecord),
    ("t,value,volume\n1,4", MalformedRecord),
    ("t,value,volume\n1,inf,2", MalformedRecord),
    ("t,value\n1,4", MalformedRecord),
    ("t,value,volume,extra\n1,4,2,0", MalformedRecord),
    ("t,value,volume\n", EmptyTape),
    ("", EmptyTape),
    ("t,value,volume,price\n1,4,2,2.5", PriceInconsistent),
])
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse_tape(text)


def test_explicit_price_checked_not_trusted():
    tape = parse_tape("t,value,volume,price\n1,4,3,1.3333333333333333\n")
    assert tape.trades[0].price == 4 / 3
    # within 1e-9 relative is accepted
    parse_tape("t,value,volume,price\n1,100,1,100.00000001\n")
    with pytest.raises(PriceInconsistent):
        parse_tape("t,value,volume,price\n1,100,1,100.000001\n")


def test_column_order_and_blank_lines():
    tape = parse_tape("volume,t,value\n\n2,5,4\n3,1,9\n")
    assert [tr.t for tr in tape] == [1.0, 5.0]


def test_out_of_order_rows_stably_sorted():
    tape = parse_tape("t,value,volume\n3,1,1\n1,2,1\n3,3,1\n1,4,1\n")
    assert [(tr.t, tr.value) for tr in tape] == [(1, 2), (1, 4), (3, 1), (3, 3)]


def test_trade_invariants():
    with pytest.raises(NonPositiveVolume):
        Trade(0.0, 1.0, 0.0)
    with pytest.raises(NonPositiveValue):
        Trade(0.0, 0.0, 1.0)


@pytest.fixture
def tape123():
    return TradeTape.from_arrays([1, 2, 3], [1, 2, 3], [1, 1, 1])


def test_window_inclusive_endpoints(tape123):
    assert select_window(tape123, Window(2, 2)).count == 3


def test_window_narrow(tape123):
    sl = select_window(tape123, Window(2, 0.5))
    assert [tr.t for tr in sl] == [2.0]


def test_window_empty(tape123):
    with pytest.raises(EmptyWindow):
        select_window(tape123, Window(10, 1))


def test_window_width_positive():
    with pytest.raises(InvalidSpec):
        Window(0, 0)


times = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=1, max_size=40)


@given(times, st.floats(-1e3, 1e3), st.floats(1e-3, 500))
def test_window_membership_and_idempotence(ts, center, width):
    tape = TradeTape.from_arrays(ts, [1.0] * len(ts), [1.0] * len(ts))
    w = Window(center, width)
    try:
        sl = select_window(tape, w)
    except EmptyWindow:
        assert not any(w.lower <= t <= w.upper for t in ts)
        return
    inside = [tr for tr in tape if w.lower <= tr.t <= w.upper]
    assert list(sl.trades) == inside
    assert select_window(sl, w).trades == sl.trades


positive = st.floats(1e-6, 1e9, allow_nan=False, allow_infinity=False)


@given(st.lists(st.tuples(st.floats(-1e9, 1e9), positive, positive), min_size=1, max_size=30))
def test_serialize_roundtrip(rows):
    tape = TradeTape(tuple(Trade(*r) for r in rows))
    again = parse_tape(serialize_tape(tape))
    assert again.trades == tape.trades


def test_synthesize_constant():
    tape = synthesize_tape(TapeSpec(3, start_price=5, volatility=0, volume_kind="constant",
                                    volume=1), seed=0)
    assert [(tr.value, tr.volume) for tr in tape] == [(5.0, 1.0)] * 3


def test_synthesize_deterministic():
    spec = TapeSpec(1000)
    assert synthesize_tape(spec, 42).trades == synthesize_tape(spec, 42).trades
    assert synthesize_tape(spec, 42).trades != synthesize_tape(spec, 43).trades


@pytest.mark.parametrize("kind", ["lognormal", "integer", "constant"])
def test_synthesize_volumes_positive(kind):
    tape = synthesize_tape(TapeSpec(1000, volume_kind=kind, volume=3.0, volume_sigma=2.0,
                                    poisson_arrivals=True), seed=7)
    assert all(tr.volume > 0 and tr.value > 0 for tr in tape)
    assert all(abs(tr.price * tr.volume - tr.value) <= 1e-12 * tr.value for tr in tape)
    if kind == "integer":
        assert all(tr.volume == math.floor(tr.volume) for tr in tape)
    times = [tr.t for tr in tape]
    assert times == sorted(times)


@pytest.mark.parametrize("spec", [
    TapeSpec(0), TapeSpec(5, start_price=-1), TapeSpec(5, volume_kind="bogus"),
    TapeSpec(5, volatility=-1), TapeSpec(5, dt=0),
])
def test_synthesize_invalid(spec):
    with pytest.raises(InvalidSpec):
        synthesize_tape(spec, 0)


def test_slice_from_pairs():
    sl = TradeSlice.from_pairs([(4, 2), (9, 3)])
    assert sl.count == 2 and list(sl.prices) == [2.0, 3.0]
    with pytest.raises(EmptyWindow):
        TradeSlice(())


def test_window_centers():
    assert window_centers(0, 1, 0.25) == [0, 0.25, 0.5, 0.75, 1.0]
    assert window_centers(0, 0.9, 0.5) == [0, 0.5]
