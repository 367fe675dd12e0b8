"""Value-at-risk quantiles under frequency-based and market-based price measures.

``p_eps`` is the price below which the measure puts mass ``eps``. Four
measures are supported:

``frequency-empirical``
    the trade-count price distribution itself (left quantile);
``frequency-gaussian``
    Gaussian with the frequency mean and variance;
``market-gaussian``
    Gaussian with the market (VWAP-type) mean and variance;
``market-order3``
    the skewed order-3 characteristic-function approximation of the market
    measure, inverted numerically.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from scipy.optimize import brentq

from . import charfn
from .charfn import CharFnApprox, GridSpec, fit_charfn, invert_cdf
from .errors import (
    BracketFailure,
    EmptyWindow,
    NonPositiveVariance,
    NumericalError,
    TapeError,
)
from .moments import (
    DEFAULT_N_MAX,
    CentralStats,
    FrequencyDistribution,
    MomentSet,
    central_stats,
    compute_moments,
    price_distribution,
)
from .normal import norm_cdf, norm_ppf
from .tape import TradeSlice, TradeTape, Window, format_float, select_window

MEASURES = ("frequency-empirical", "frequency-gaussian", "market-gaussian", "market-order3")
DEFAULT_EPSILONS = (0.01, 0.03, 0.05)
ORDER3_BRACKET_SIGMAS = 12.0
ORDER3_CDF_TOL = 1e-8


def _check_epsilon(eps: float):
    if not (0.0 < eps < 1.0):
        raise TapeError(f"epsilon must lie in (0, 1), got {eps!r}")


@dataclass(frozen=True)
class VaRRequest:
    epsilon: float
    measure: str = "market-gaussian"
    n_max: int = DEFAULT_N_MAX

    def __post_init__(self):
        _check_epsilon(self.epsilon)
        if self.measure not in MEASURES:
            raise TapeError(f"unknown measure {self.measure!r}; choose from {MEASURES}")
        if self.measure == "market-order3" and self.n_max < 3:
            raise TapeError("market-order3 needs n_max >= 3")
        if self.n_max < 2 and self.measure.endswith("gaussian"):
            raise TapeError("Gaussian measures need n_max >= 2")


@dataclass(frozen=True)
class VaRResult:
    p_epsilon: float
    measure: str
    epsilon: float
    N: int
    mean: float
    variance: float | None = None
    a3: float | None = None
    cdf_at_quantile: float | None = None
    warnings: tuple[str, ...] = ()

    @property
    def sigma(self) -> float | None:
        if self.variance is None:
            return None
        return math.sqrt(self.variance) if self.variance > 0 else 0.0

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon, "measure": self.measure, "p_epsilon": self.p_epsilon,
            "diagnostics": {
                "N": self.N, "mean": self.mean, "variance": self.variance, "a3": self.a3,
                "cdf_at_quantile": self.cdf_at_quantile, "warnings": list(self.warnings),
            },
        }

    def csv_row(self) -> str:
        sigma = self.sigma
        return ",".join([
            format_float(self.epsilon), self.measure, format_float(self.p_epsilon),
            format_float(self.mean), "" if sigma is None else format_float(sigma),
            ";".join(self.warnings),
        ])


RESULT_CSV_HEADER = "epsilon,measure,p_epsilon,mean,sigma,warnings"


def empirical_quantile(dist: FrequencyDistribution, epsilon: float) -> float:
    """Smallest level whose cumulative mass reaches ``epsilon``."""
    _check_epsilon(epsilon)
    total = dist.total
    for level, cum in zip(dist.levels, dist.cumulative_counts()):
        if cum / total >= epsilon:
            return level
    return dist.levels[-1]


def empirical_cdf(dist: FrequencyDistribution, price: float) -> float:
    """Mass at or below ``price``."""
    cum = 0
    for level, count in zip(dist.levels, dist.counts):
        if level > price:
            break
        cum += count
    return cum / dist.total


def gaussian_quantile(stats: CentralStats, epsilon: float) -> float:
    """``mean + sigma * Phi^-1(epsilon)``."""
    _check_epsilon(epsilon)
    if not (stats.variance > 0):
        raise NonPositiveVariance(stats.variance)
    return stats.mean + math.sqrt(stats.variance) * norm_ppf(epsilon)


def gaussian_cdf(stats: CentralStats, price: float) -> float:
    return norm_cdf((price - stats.mean) / math.sqrt(stats.variance))


@dataclass(frozen=True)
class Order3Quantile:
    price: float
    cdf: float
    min_density: float
    warnings: tuple[str, ...] = ()


def order3_solve(F: CharFnApprox, epsilon: float,
                 bracket_sigmas: float = ORDER3_BRACKET_SIGMAS) -> Order3Quantile:
    """Smallest root of ``CDF(p) = epsilon`` in ``mean +/- bracket_sigmas * sigma``.

    A tabulated pseudo-density over the bracket locates the first crossing
    and gives the negativity diagnostic; the crossing is then refined with
    Brent's method on the quadrature CDF.
    """
    _check_epsilon(epsilon)
    if F.order != 3:
        raise TapeError("order3_quantile needs an order-3 approximation")
    sigma = F.sigma
    lower = F.a1 - bracket_sigmas * sigma
    upper = F.a1 + bracket_sigmas * sigma

    def excess(p):
        return invert_cdf(F, p) - epsilon

    if excess(lower) >= 0 or excess(upper) < 0:
        raise BracketFailure(
            f"CDF does not cross {epsilon!r} inside mean +/- {bracket_sigmas:g} sigma"
        )

    warnings = []
    min_density = float("nan")
    if bracket_sigmas >= charfn.MIN_GRID_SIGMAS:
        table = charfn.tabulate_density(F, GridSpec(lower, upper, charfn.DEFAULT_GRID_POINTS),
                                        method="fft")
        min_density = table.min_density
        if table.warning:
            warnings.append("negative-pseudo-density")
        prices, cdf = table.prices, table.cdf
    else:
        prices = [lower + (upper - lower) * k / 256 for k in range(257)]
        cdf = [invert_cdf(F, p) for p in prices]

    step = prices[1] - prices[0]
    j = next((k for k, c in enumerate(cdf) if c >= epsilon), len(prices) - 1)
    # the tabulated CDF is only a guide; make the bracket exact against quadrature,
    # widening geometrically so a poor guide costs few evaluations
    a, width = max(lower, prices[j] - step), step
    while a > lower and excess(a) >= 0:
        width *= 2
        a = max(lower, prices[j] - width)
    b, width = prices[j], step
    while b < upper and excess(b) < 0:
        width *= 2
        b = min(upper, prices[j] + width)
    root = brentq(excess, a, b, xtol=1e-12 * sigma, maxiter=200)
    cdf_root = invert_cdf(F, root)
    if abs(cdf_root - epsilon) > ORDER3_CDF_TOL:
        raise BracketFailure(f"root refinement reached CDF {cdf_root!r}, wanted {epsilon!r}")
    return Order3Quantile(root, cdf_root, min_density, tuple(warnings))


def order3_quantile(F: CharFnApprox, epsilon: float,
                    bracket_sigmas: float = ORDER3_BRACKET_SIGMAS) -> float:
    return order3_solve(F, epsilon, bracket_sigmas).price


def _is_degenerate(slice_: TradeSlice) -> bool:
    first = slice_.trades[0].price
    return all(tr.price == first for tr in slice_.trades)


def var(slice_: TradeSlice, request: VaRRequest, moments: MomentSet | None = None) -> VaRResult:
    """Quantile ``p_eps`` of one measure on one slice."""
    eps, measure = request.epsilon, request.measure
    m = moments if moments is not None else compute_moments(slice_, max(request.n_max, 2))
    N = slice_.count
    kind = "market" if measure.startswith("market") else "frequency"

    if _is_degenerate(slice_):
        price = slice_.trades[0].price
        return VaRResult(price, measure, eps, N, price, 0.0, 0.0 if m.n_max >= 3 else None,
                         1.0, ("degenerate",))

    if measure == "frequency-empirical":
        dist = price_distribution(slice_)
        q = empirical_quantile(dist, eps)
        var_ = central_stats(m, "frequency").variance if m.n_max >= 2 else None
        return VaRResult(q, measure, eps, N, m.frequency(1), var_, None, empirical_cdf(dist, q))

    stats = central_stats(m, kind)
    if measure.endswith("gaussian"):
        q = gaussian_quantile(stats, eps)
        return VaRResult(q, measure, eps, N, stats.mean, stats.variance, None,
                         gaussian_cdf(stats, q))

    F = fit_charfn(stats, 3)
    sol = order3_solve(F, eps)
    return VaRResult(sol.price, measure, eps, N, stats.mean, stats.variance, F.a3,
                     sol.cdf, sol.warnings)


@dataclass(frozen=True)
class ComparisonReport:
    """Every measure's quantiles on one slice, plus market-minus-frequency gaps.

    ``divergence`` maps each epsilon to ``p_market-gaussian - p_frequency-gaussian``
    (``None`` when either side is unavailable).
    """

    window: Window | None
    epsilons: tuple[float, ...]
    results: tuple[VaRResult, ...]
    moments: MomentSet
    divergence: tuple[tuple[float, float | None], ...]
    warnings: tuple[str, ...] = ()

    def result(self, measure: str, epsilon: float) -> VaRResult | None:
        for r in self.results:
            if r.measure == measure and r.epsilon == epsilon:
                return r
        return None

    def measures(self) -> list[str]:
        return [m for m in MEASURES if any(r.measure == m for r in self.results)]

    def to_dict(self) -> dict:
        return {
            "window": None if self.window is None else
            {"center": self.window.center, "width": self.window.width},
            "epsilons": list(self.epsilons),
            "results": [r.to_dict() for r in self.results],
            "moment_table": self.moments.to_dict(),
            "divergence": [{"epsilon": e, "value": d} for e, d in self.divergence],
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def csv_rows(self) -> list[str]:
        rows = [r.csv_row() for r in self.results]
        for eps, d in self.divergence:
            if d is not None:
                rows.append(f"{format_float(eps)},divergence,{format_float(d)},,,")
        return rows

    def to_csv(self) -> str:
        return "\n".join([RESULT_CSV_HEADER] + self.csv_rows()) + "\n"


def compare(slice_: TradeSlice, epsilons=DEFAULT_EPSILONS,
            n_max: int = DEFAULT_N_MAX) -> ComparisonReport:
    """Frequency vs market quantiles for each epsilon on the same slice.

    A measure that cannot be computed (negative market variance, failed
    inversion) is dropped and named in ``warnings``; the rest of the report
    is still produced.
    """
    epsilons = tuple(float(e) for e in epsilons)
    for e in epsilons:
        _check_epsilon(e)
    n_max = max(int(n_max), 2)
    m = compute_moments(slice_, n_max)

    measures = ["frequency-empirical", "frequency-gaussian", "market-gaussian"]
    if n_max >= 3:
        measures.append("market-order3")

    results, warnings, failed = [], [], set()
    for measure in measures:
        for eps in epsilons:
            if measure in failed:
                break
            try:
                results.append(var(slice_, VaRRequest(eps, measure, n_max), m))
            except NumericalError as exc:
                failed.add(measure)
                warnings.append(f"{measure}: {type(exc).__name__}: {exc}")

    by_key = {(r.measure, r.epsilon): r.p_epsilon for r in results}
    divergence = []
    for eps in epsilons:
        pm = by_key.get(("market-gaussian", eps))
        pf = by_key.get(("frequency-gaussian", eps))
        divergence.append((eps, None if pm is None or pf is None else pm - pf))
    return ComparisonReport(slice_.window, epsilons, tuple(results), m,
                            tuple(divergence), tuple(warnings))


@dataclass(frozen=True)
class SweepEntry:
    center: float
    report: ComparisonReport | None
    error: str | None = None


def sweep(tape: TradeTape, centers, width: float, epsilons=DEFAULT_EPSILONS,
          n_max: int = DEFAULT_N_MAX, workers: int = 1) -> list[SweepEntry]:
    """One comparison per window center, returned in center order.

    Windows with no trades yield an entry carrying the error text.
    """
    centers = sorted(float(c) for c in centers)

    def one(center):
        try:
            sl = select_window(tape, Window(center, width))
        except EmptyWindow as exc:
            return SweepEntry(center, None, str(exc))
        return SweepEntry(center, compare(sl, epsilons, n_max))

    if workers <= 1:
        return [one(c) for c in centers]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, centers))
