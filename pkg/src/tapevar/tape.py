"""Trade tapes: parsing, serialization, synthesis and time windows.

A trade carries its value ``C`` (currency) and volume ``U`` (asset units);
the price is always derived as ``C / U`` and never stored independently.
"""
from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyTape,
    EmptyWindow,
    InvalidSpec,
    MalformedRecord,
    NonPositiveValue,
    NonPositiveVolume,
    PriceInconsistent,
)

PRICE_TOLERANCE = 1e-9
CANONICAL_COLUMNS = ("t", "value", "volume")


def format_float(x: float) -> str:
    """Shortest representation that round-trips (never more than 17 digits)."""
    return repr(float(x))


@dataclass(frozen=True)
class Trade:
    t: float
    value: float
    volume: float

    def __post_init__(self):
        if not (self.volume > 0) or not math.isfinite(self.volume):
            raise NonPositiveVolume(f"volume must be finite and > 0, got {self.volume!r}")
        if not (self.value > 0) or not math.isfinite(self.value):
            raise NonPositiveValue(f"value must be finite and > 0, got {self.value!r}")
        if not math.isfinite(self.t):
            raise MalformedRecord(f"timestamp must be finite, got {self.t!r}")

    @property
    def price(self) -> float:
        return self.value / self.volume


@dataclass(frozen=True)
class TradeTape:
    """Immutable, time-sorted sequence of trades."""

    trades: tuple[Trade, ...]
    source: str = ""
    _times: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        trades = tuple(sorted(self.trades, key=lambda tr: tr.t))  # stable
        if not trades:
            raise EmptyTape("tape contains no trades")
        object.__setattr__(self, "trades", trades)
        object.__setattr__(self, "_times", tuple(tr.t for tr in trades))

    def __len__(self):
        return len(self.trades)

    def __iter__(self):
        return iter(self.trades)

    @property
    def times(self) -> tuple[float, ...]:
        return self._times

    @classmethod
    def from_arrays(cls, t: Iterable[float], value: Iterable[float],
                    volume: Iterable[float], source: str = "") -> "TradeTape":
        trades = [Trade(float(a), float(b), float(c)) for a, b, c in zip(t, value, volume)]
        return cls(tuple(trades), source)


@dataclass(frozen=True)
class Window:
    center: float
    width: float

    def __post_init__(self):
        if not (self.width > 0) or not math.isfinite(self.width):
            raise InvalidSpec(f"window width must be finite and > 0, got {self.width!r}")
        if not math.isfinite(self.center):
            raise InvalidSpec(f"window center must be finite, got {self.center!r}")

    @property
    def lower(self) -> float:
        return self.center - self.width / 2

    @property
    def upper(self) -> float:
        return self.center + self.width / 2

    def contains(self, t: float) -> bool:
        return self.lower <= t <= self.upper


@dataclass(frozen=True)
class TradeSlice:
    """The trades of a tape that fall inside a window (both ends inclusive)."""

    trades: tuple[Trade, ...]
    window: Window | None = None

    def __post_init__(self):
        if not self.trades:
            raise EmptyWindow("slice contains no trades")

    @property
    def count(self) -> int:
        return len(self.trades)

    def __len__(self):
        return len(self.trades)

    def __iter__(self):
        return iter(self.trades)

    @property
    def values(self) -> np.ndarray:
        return np.array([tr.value for tr in self.trades])

    @property
    def volumes(self) -> np.ndarray:
        return np.array([tr.volume for tr in self.trades])

    @property
    def prices(self) -> np.ndarray:
        return np.array([tr.price for tr in self.trades])

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> "TradeSlice":
        """Build a slice from ``(value, volume)`` pairs, timestamps 0, 1, 2, ..."""
        return cls(tuple(Trade(float(i), float(c), float(u)) for i, (c, u) in enumerate(pairs)))


def select_window(tape: TradeTape | TradeSlice, window: Window) -> TradeSlice:
    """Return the trades with ``center - width/2 <= t <= center + width/2``.

    Raises
    ------
    EmptyWindow
        If no trade falls inside the window.
    """
    lo, hi = window.lower, window.upper
    if isinstance(tape, TradeTape):
        times = tape.times
        i = bisect.bisect_left(times, lo)
        j = bisect.bisect_right(times, hi)
        selected = tape.trades[i:j]
    else:
        selected = tuple(tr for tr in tape.trades if lo <= tr.t <= hi)
    if not selected:
        raise EmptyWindow(
            f"no trades in window [{format_float(lo)}, {format_float(hi)}] "
            f"(center {format_float(window.center)}, width {format_float(window.width)})"
        )
    return TradeSlice(selected, window)


def _parse_number(text: str, row: int, column: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise MalformedRecord(f"cannot parse {text!r} as a number", row, column) from None
    if not math.isfinite(x):
        raise MalformedRecord(f"non-finite number {text!r}", row, column)
    return x


def parse_tape(text: str | io.TextIOBase, source: str = "") -> TradeTape:
    """Parse a CSV tape with header ``t,value,volume[,price]``.

    An optional ``price`` column is checked against ``value / volume`` with a
    relative tolerance of 1e-9 and then discarded. Rows are stably re-sorted
    by timestamp. Row numbers in error messages count the header as row 1.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    reader = csv.reader(stream)
    header = None
    for header in reader:
        if any(cell.strip() for cell in header):
            break
    else:
        header = None
    if header is None:
        raise EmptyTape("input has no header row")
    names = [h.strip().lower() for h in header]
    missing = [c for c in CANONICAL_COLUMNS if c not in names]
    unknown = [c for c in names if c not in CANONICAL_COLUMNS + ("price",)]
    if missing or unknown or len(set(names)) != len(names):
        raise MalformedRecord(
            f"header must be t,value,volume[,price]; got {','.join(header)!r}", 1
        )
    idx = {name: k for k, name in enumerate(names)}

    trades = []
    for row in reader:
        row_no = reader.line_num
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != len(names):
            raise MalformedRecord(f"expected {len(names)} fields, got {len(row)}", row_no)
        t = _parse_number(row[idx["t"]], row_no, "t")
        value = _parse_number(row[idx["value"]], row_no, "value")
        volume = _parse_number(row[idx["volume"]], row_no, "volume")
        if volume <= 0:
            raise NonPositiveVolume(f"volume must be > 0, got {volume!r}", row_no, "volume")
        if value <= 0:
            raise NonPositiveValue(f"value must be > 0, got {value!r}", row_no, "value")
        if "price" in idx:
            price = _parse_number(row[idx["price"]], row_no, "price")
            if abs(price * volume - value) / value > PRICE_TOLERANCE:
                raise PriceInconsistent(
                    f"price*volume = {price * volume!r} disagrees with value {value!r}",
                    row_no, "price",
                )
        trades.append(Trade(t, value, volume))
    if not trades:
        raise EmptyTape("tape contains no trades")
    return TradeTape(tuple(trades), source)


def serialize_tape(tape: TradeTape | TradeSlice | Sequence[Trade]) -> str:
    """Render trades in the canonical three-column CSV."""
    lines = [",".join(CANONICAL_COLUMNS)]
    for tr in tape:
        lines.append(f"{format_float(tr.t)},{format_float(tr.value)},{format_float(tr.volume)}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TapeSpec:
    """Parameters of a synthetic tape.

    Log-prices follow a Gaussian random walk with per-trade ``drift`` and
    ``volatility``. Volumes are ``"constant"`` (``volume``), ``"integer"``
    (1 + Poisson with mean ``volume - 1``) or ``"lognormal"`` (median
    ``volume``, log-sd ``volume_sigma``). Inter-arrival times are ``dt`` or,
    with ``poisson_arrivals``, exponential with mean ``dt``.
    """

    count: int
    start_price: float = 100.0
    drift: float = 0.0
    volatility: float = 0.001
    volume_kind: str = "lognormal"
    volume: float = 100.0
    volume_sigma: float = 1.0
    t0: float = 0.0
    dt: float = 1.0
    poisson_arrivals: bool = False

    def validate(self):
        if not isinstance(self.count, (int, np.integer)) or self.count < 1:
            raise InvalidSpec(f"count must be an integer >= 1, got {self.count!r}")
        if not (self.start_price > 0) or not math.isfinite(self.start_price):
            raise InvalidSpec(f"start_price must be > 0, got {self.start_price!r}")
        if self.volatility < 0 or not math.isfinite(self.volatility) or not math.isfinite(self.drift):
            raise InvalidSpec("drift must be finite and volatility finite and >= 0")
        if self.volume_kind not in ("constant", "integer", "lognormal"):
            raise InvalidSpec(f"unknown volume_kind {self.volume_kind!r}")
        if not (self.volume > 0) or not math.isfinite(self.volume):
            raise InvalidSpec(f"volume must be > 0, got {self.volume!r}")
        if self.volume_kind == "integer" and self.volume < 1:
            raise InvalidSpec("integer volumes need mean volume >= 1")
        if self.volume_sigma < 0:
            raise InvalidSpec("volume_sigma must be >= 0")
        if not (self.dt > 0) or not math.isfinite(self.t0):
            raise InvalidSpec("dt must be > 0 and t0 finite")


def synthesize_tape(spec: TapeSpec, seed: int) -> TradeTape:
    """Generate a reproducible synthetic tape; value is set to price * volume."""
    spec.validate()
    rng = np.random.default_rng(seed)
    n = int(spec.count)

    steps = spec.drift + spec.volatility * rng.standard_normal(n - 1)
    log_moves = np.concatenate(([0.0], np.cumsum(steps)))
    prices = spec.start_price * np.exp(log_moves)

    if spec.volume_kind == "constant":
        volumes = np.full(n, float(spec.volume))
    elif spec.volume_kind == "integer":
        volumes = 1.0 + rng.poisson(spec.volume - 1.0, n)
    else:
        volumes = spec.volume * np.exp(spec.volume_sigma * rng.standard_normal(n))

    if spec.poisson_arrivals:
        gaps = rng.exponential(spec.dt, n - 1)
    else:
        gaps = np.full(n - 1, spec.dt)
    times = spec.t0 + np.concatenate(([0.0], np.cumsum(gaps)))

    values = prices * volumes
    if not (np.all(np.isfinite(values)) and np.all(values > 0) and np.all(volumes > 0)):
        raise InvalidSpec("parameters produced non-positive or non-finite trades")
    return TradeTape.from_arrays(times, values, volumes, source=f"synthetic(seed={seed})")


def window_centers(start: float, end: float, stride: float) -> list[float]:
    """Centers ``start, start + stride, ...`` up to and including ``end``."""
    if not (stride > 0):
        raise InvalidSpec(f"stride must be > 0, got {stride!r}")
    if end < start:
        raise InvalidSpec("sweep end precedes start")
    count = int(math.floor((end - start) / stride + 1e-9)) + 1
    return [start + k * stride for k in range(count)]
