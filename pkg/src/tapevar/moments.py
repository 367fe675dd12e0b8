"""Frequency distributions and price moments of a trade slice.

Two moment sequences are computed from the same trades:

* market-based ``p(n) = sum C_i^n / sum U_i^n`` (the n-th power analogue of
  VWAP; ``p(1)`` is VWAP itself);
* frequency-based ``pi(n) = (1/N) sum (C_i / U_i)^n``, the moments of the
  trade-count price distribution.

They coincide when every volume in the slice is the same, and differ otherwise.
All sums use :func:`math.fsum`, so results do not depend on summation order.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import NegativeVariance, OrderOverflow, TapeError
from .tape import TradeSlice, format_float

MeasureKind = Literal["frequency", "market"]
KINDS = ("frequency", "market")
DEFAULT_N_MAX = 3


@dataclass(frozen=True)
class FrequencyDistribution:
    """Counts of trades at each distinct level (exact float equality)."""

    levels: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if not self.levels:
            raise TapeError("distribution needs at least one atom")
        if len(self.levels) != len(self.counts):
            raise TapeError("levels and counts differ in length")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise TapeError("levels must be strictly increasing")
        if any(c < 1 for c in self.counts):
            raise TapeError("counts must be positive")

    @classmethod
    def from_samples(cls, samples) -> "FrequencyDistribution":
        levels, counts = np.unique(np.asarray(samples, dtype=float), return_counts=True)
        return cls(tuple(float(x) for x in levels), tuple(int(c) for c in counts))

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def masses(self) -> tuple[float, ...]:
        n = self.total
        return tuple(c / n for c in self.counts)

    @property
    def atoms(self) -> list[tuple[float, int]]:
        return list(zip(self.levels, self.counts))

    def cumulative_counts(self) -> list[int]:
        out, acc = [], 0
        for c in self.counts:
            acc += c
            out.append(acc)
        return out

    def to_csv(self) -> str:
        lines = ["level,count,mass"]
        for level, count, mass in zip(self.levels, self.counts, self.masses):
            lines.append(f"{format_float(level)},{count},{format_float(mass)}")
        return "\n".join(lines) + "\n"


def value_distribution(slice_: TradeSlice) -> FrequencyDistribution:
    return FrequencyDistribution.from_samples([tr.value for tr in slice_])


def volume_distribution(slice_: TradeSlice) -> FrequencyDistribution:
    return FrequencyDistribution.from_samples([tr.volume for tr in slice_])


def price_distribution(slice_: TradeSlice) -> FrequencyDistribution:
    """Trade-count distribution of the derived prices ``C / U``."""
    return FrequencyDistribution.from_samples([tr.price for tr in slice_])


@dataclass(frozen=True)
class MomentSet:
    """Moment table for orders ``1..n_max``; tuples are indexed by ``n - 1``."""

    n_max: int
    N: int
    C_sum: tuple[float, ...]
    U_sum: tuple[float, ...]
    C_m: tuple[float, ...]
    U_m: tuple[float, ...]
    p: tuple[float, ...]
    pi: tuple[float, ...]

    def market(self, n: int) -> float:
        return self.p[self._index(n)]

    def frequency(self, n: int) -> float:
        return self.pi[self._index(n)]

    def moment(self, n: int, kind: MeasureKind) -> float:
        _check_kind(kind)
        return self.market(n) if kind == "market" else self.frequency(n)

    def _index(self, n: int) -> int:
        if not 1 <= n <= self.n_max:
            raise TapeError(f"moment order {n} outside 1..{self.n_max}")
        return n - 1

    def rows(self) -> list[dict]:
        return [
            {"n": n + 1, "C_sum": self.C_sum[n], "U_sum": self.U_sum[n],
             "C_m": self.C_m[n], "U_m": self.U_m[n], "p": self.p[n], "pi": self.pi[n]}
            for n in range(self.n_max)
        ]

    def to_dict(self) -> dict:
        return {"n_max": self.n_max, "N": self.N, "rows": self.rows()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        cols = ("n", "C_sum", "U_sum", "C_m", "U_m", "p", "pi")
        lines = [",".join(cols)]
        for row in self.rows():
            lines.append(",".join(
                str(row[c]) if c == "n" else format_float(row[c]) for c in cols
            ))
        return "\n".join(lines) + "\n"


def _power(x: float, n: int, index: int) -> float:
    try:
        y = x ** n
    except OverflowError:
        raise OrderOverflow(n, index) from None
    if not math.isfinite(y) or y == 0.0:
        raise OrderOverflow(n, index, f"power {n} of trade #{index} ({x!r}) is out of float range")
    return y


def compute_moments(slice_: TradeSlice, n_max: int = DEFAULT_N_MAX) -> MomentSet:
    """Market and frequency price moments of orders ``1..n_max``.

    Raises
    ------
    OrderOverflow
        If some ``C_i^n``, ``U_i^n`` or ``p_i^n`` leaves the float range.
    """
    if n_max < 1:
        raise TapeError(f"n_max must be >= 1, got {n_max}")
    trades = slice_.trades
    N = len(trades)
    values = [tr.value for tr in trades]
    volumes = [tr.volume for tr in trades]
    prices = [tr.price for tr in trades]

    C_sum, U_sum, C_m, U_m, p, pi = [], [], [], [], [], []
    for n in range(1, n_max + 1):
        cs = math.fsum(_power(c, n, i) for i, c in enumerate(values))
        us = math.fsum(_power(u, n, i) for i, u in enumerate(volumes))
        ps = math.fsum(_power(x, n, i) for i, x in enumerate(prices))
        if not (math.isfinite(cs) and math.isfinite(us) and math.isfinite(ps)):
            raise OrderOverflow(n, -1, f"sum of order-{n} powers overflows")
        C_sum.append(cs)
        U_sum.append(us)
        C_m.append(cs / N)
        U_m.append(us / N)
        p.append(cs / us)
        pi.append(ps / N)
    return MomentSet(n_max, N, tuple(C_sum), tuple(U_sum), tuple(C_m), tuple(U_m),
                     tuple(p), tuple(pi))


def vwap(slice_: TradeSlice) -> float:
    """Volume-weighted average price ``sum C_i / sum U_i``."""
    return math.fsum(tr.value for tr in slice_) / math.fsum(tr.volume for tr in slice_)


def _check_kind(kind):
    if kind not in KINDS:
        raise TapeError(f"measure kind must be one of {KINDS}, got {kind!r}")


def _raw_variance(m: MomentSet, kind: MeasureKind) -> float:
    if m.n_max < 2:
        raise TapeError("variance needs moments up to order 2")
    mean = m.moment(1, kind)
    return m.moment(2, kind) - mean * mean


def volatility(m: MomentSet, kind: MeasureKind) -> float:
    """Price variance ``p(2) - p(1)^2`` under the chosen measure.

    For the frequency measure a negative result can only be rounding and is
    returned as 0. For the market measure a negative result is genuine and
    raises :class:`NegativeVariance`.
    """
    _check_kind(kind)
    var = _raw_variance(m, kind)
    if var < 0:
        if kind == "market":
            raise NegativeVariance(var)
        return 0.0
    return var


def third_central(m: MomentSet, kind: MeasureKind) -> float:
    """Third central coefficient ``p(3) - 3 p(1) var - p(1)^3``.

    Uses the raw second-order variance, so it is defined even when the market
    variance is negative.
    """
    _check_kind(kind)
    if m.n_max < 3:
        raise TapeError("third central moment needs moments up to order 3")
    mean = m.moment(1, kind)
    var = _raw_variance(m, kind)
    return m.moment(3, kind) - 3.0 * mean * var - mean ** 3


@dataclass(frozen=True)
class CentralStats:
    mean: float
    variance: float
    third_central: float | None = None
    kind: MeasureKind = "market"

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance) if self.variance > 0 else 0.0


def central_stats(m: MomentSet, kind: MeasureKind) -> CentralStats:
    """Mean, variance and (when ``n_max >= 3``) third central coefficient."""
    var = volatility(m, kind)
    a3 = third_central(m, kind) if m.n_max >= 3 else None
    return CentralStats(m.moment(1, kind), var, a3, kind)

