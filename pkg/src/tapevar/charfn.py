"""Low-order characteristic-function approximations of a price measure.

An order-``k`` approximation keeps the first ``k`` cumulants of the measure::

    F_k(x) = exp(i a1 x - a2 x^2 / 2 - i a3 x^3 / 6)

truncated after the ``k``-th term, with ``a1`` the mean, ``a2`` the variance
and ``a3`` the third central moment. ``k = 1`` is a point mass, ``k = 2`` is
Gaussian and ``k = 3`` adds skew. The order-3 inverse transform is a
*pseudo*-density: it integrates to one but may dip below zero, which is
reported, never hidden.

Inversion conventions: ``eta(p) = (1/2 pi) int F(x) exp(-i p x) dx`` and the
Gil-Pelaez CDF ``1/2 - (1/pi) int_0^inf Im[exp(-i x p) F(x)] / x dx``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy import integrate

from .errors import (
    InvalidSpec,
    NonPositiveVariance,
    OrderExceedsFit,
    PointMassUnsupported,
    QuadratureFailure,
    UnsupportedOrder,
)
from .moments import CentralStats
from .tape import format_float

# Gil-Pelaez integration runs over (0, CUTOFF_SIGMAS / sigma].
CUTOFF_SIGMAS = 50.0
QUAD_TARGET = 1e-8
DEFAULT_GRID_SIGMAS = 10.0
DEFAULT_GRID_POINTS = 4096
MIN_GRID_SIGMAS = 8.0
NEGATIVE_DENSITY_WARN = -1e-6
FFT_PAD_SIGMAS = 24.0
FFT_PAD_PER_SKEW = 30.0
FFT_MAX_POINTS = 1 << 21


@dataclass(frozen=True)
class CharFnApprox:
    order: int
    a1: float
    a2: float | None = None
    a3: float | None = None
    kind: str = "market"

    def __post_init__(self):
        if self.order not in (1, 2, 3):
            raise UnsupportedOrder(f"approximation order must be 1, 2 or 3, got {self.order}")
        if not math.isfinite(self.a1):
            raise InvalidSpec("mean must be finite")
        if self.order >= 2:
            if self.a2 is None or not (self.a2 > 0) or not math.isfinite(self.a2):
                raise NonPositiveVariance(self.a2)
        if self.order == 3:
            if self.a3 is None or not math.isfinite(self.a3):
                raise InvalidSpec(f"order 3 needs a finite third coefficient, got {self.a3!r}")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.a2) if self.order >= 2 else 0.0

    @property
    def cumulants(self) -> tuple[float, ...]:
        return (self.a1, self.a2, self.a3)[: self.order]

    @property
    def skew(self) -> float:
        return self.a3 if self.order == 3 else 0.0


def fit_charfn(stats: CentralStats, k: int) -> CharFnApprox:
    """Order-``k`` approximation whose first ``k`` moments match ``stats``."""
    if k not in (1, 2, 3):
        raise UnsupportedOrder(f"approximation order must be 1, 2 or 3, got {k}")
    if k == 1:
        return CharFnApprox(1, stats.mean, kind=stats.kind)
    if not (stats.variance > 0):
        raise NonPositiveVariance(stats.variance)
    if k == 2:
        return CharFnApprox(2, stats.mean, stats.variance, kind=stats.kind)
    if stats.third_central is None:
        raise InvalidSpec("order 3 needs the third central moment (n_max >= 3)")
    return CharFnApprox(3, stats.mean, stats.variance, stats.third_central, kind=stats.kind)


def evaluate(F: CharFnApprox, x):
    """``F_k(x)``; accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    phase = F.a1 * x
    decay = np.zeros_like(x)
    if F.order >= 2:
        decay = -0.5 * F.a2 * x * x
    if F.order == 3:
        phase = phase - F.a3 * x ** 3 / 6.0
    out = np.exp(decay) * np.exp(1j * phase)
    return complex(out) if out.ndim == 0 else out


def moment_check(F: CharFnApprox, n: int) -> float:
    """Raw moment ``i^-n d^n F/dx^n`` at 0, from the cumulants of the exponent."""
    if not 1 <= n <= F.order:
        raise OrderExceedsFit(f"order-{F.order} fit does not determine moment {n}")
    kappa = F.cumulants
    mu = [1.0]
    for m in range(1, n + 1):
        mu.append(math.fsum(
            comb(m - 1, j) * kappa[j] * mu[m - 1 - j]
            for j in range(min(m, len(kappa)))
        ))
    return mu[n]


def gaussian_density(F: CharFnApprox, p):
    """Closed-form order-2 density ``exp(-(p-mean)^2 / 2 var) / sqrt(2 pi var)``."""
    if F.order != 2:
        raise UnsupportedOrder("closed-form Gaussian density needs an order-2 approximation")
    z = (np.asarray(p, dtype=float) - F.a1) / F.sigma
    out = np.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * F.sigma)
    return float(out) if out.ndim == 0 else out


def _gil_pelaez_integrand(F: CharFnApprox, p: float):
    # Im[exp(-ixp) F(x)] / x = exp(-a2 x^2/2) * sin(b x - c x^3) / x.
    # sin(t)/t near t = 0 comes from its series: the singularity is removable.
    b = F.a1 - p
    c = F.skew / 6.0
    half_var = 0.5 * F.a2

    def g(x):
        slope = b - c * x * x
        t = slope * x
        if abs(t) < 1e-4:
            t2 = t * t
            ratio = 1.0 - t2 / 6.0 + t2 * t2 / 120.0
        else:
            ratio = math.sin(t) / t
        return math.exp(-half_var * x * x) * slope * ratio

    return g


def _density_integrand(F: CharFnApprox, p: float):
    b = F.a1 - p
    c = F.skew / 6.0
    half_var = 0.5 * F.a2
    return lambda x: math.exp(-half_var * x * x) * math.cos(b * x - c * x ** 3)


def _quad_half_line(func, sigma: float) -> float:
    # Gaussian decay makes everything past ~10 sigma-units negligible; splitting
    # keeps the adaptive scheme from under-sampling the informative region.
    edges = (0.0, 10.0 / sigma, CUTOFF_SIGMAS / sigma)
    total, err_total = 0.0, 0.0
    for lo, hi in zip(edges, edges[1:]):
        val, err, *_ = integrate.quad(func, lo, hi, epsabs=1e-11, epsrel=1e-11,
                                      limit=1000, full_output=1)
        total += val
        err_total += err
    if not math.isfinite(total) or err_total > QUAD_TARGET:
        raise QuadratureFailure(err_total)
    return total


def invert_cdf(F: CharFnApprox, p: float) -> float:
    """CDF of the approximated measure at ``p`` by Gil-Pelaez inversion.

    Order 1 is the step function at the mean (right-continuous). For order 3
    the result is the integral of the pseudo-density and may leave [0, 1]
    slightly when the pseudo-density is negative.

    Raises
    ------
    QuadratureFailure
        If the adaptive quadrature error estimate exceeds 1e-8.
    """
    if not math.isfinite(p):
        raise InvalidSpec(f"price must be finite, got {p!r}")
    if F.order == 1:
        return 1.0 if p >= F.a1 else 0.0
    integral = _quad_half_line(_gil_pelaez_integrand(F, p), F.sigma)
    return 0.5 - integral / math.pi


def density_at(F: CharFnApprox, p: float) -> float:
    """Pointwise inverse transform ``(1/pi) int_0^inf Re[F(x) exp(-ipx)] dx``."""
    if F.order == 1:
        raise PointMassUnsupported("order-1 approximation is a point mass")
    return _quad_half_line(_density_integrand(F, p), F.sigma) / math.pi


@dataclass(frozen=True)
class GridSpec:
    lower: float
    upper: float
    points: int = DEFAULT_GRID_POINTS

    @classmethod
    def around(cls, F: CharFnApprox, sigmas: float = DEFAULT_GRID_SIGMAS,
               points: int = DEFAULT_GRID_POINTS) -> "GridSpec":
        half = sigmas * F.sigma
        return cls(F.a1 - half, F.a1 + half, points)

    @property
    def step(self) -> float:
        return (self.upper - self.lower) / (self.points - 1)

    def prices(self) -> np.ndarray:
        return self.lower + self.step * np.arange(self.points)


@dataclass(frozen=True)
class DensityGrid:
    prices: np.ndarray
    density: np.ndarray
    cdf: np.ndarray
    integral_of_density: float
    min_density: float
    warning: bool = False
    method: str = field(default="fft", compare=False)

    @property
    def step(self) -> float:
        return float(self.prices[1] - self.prices[0])

    def diagnostics(self) -> dict:
        return {"integral_of_density": self.integral_of_density,
                "min_density": self.min_density, "warning": self.warning}

    def to_csv(self) -> str:
        lines = ["price,density,cdf"]
        for p, d, c in zip(self.prices, self.density, self.cdf):
            lines.append(f"{format_float(p)},{format_float(d)},{format_float(c)}")
        return "\n".join(lines) + "\n"

    def diagnostics_json(self) -> str:
        return json.dumps(self.diagnostics(), indent=2)


def _fft_density(F: CharFnApprox, grid: GridSpec) -> np.ndarray:
    # Riemann sum of (1/2 pi) int F(x) exp(-ipx) dx on x_k = (k - M/2) dx with
    # dx = 2 pi / (M dp), which turns the sum over k into one DFT. The result
    # is periodic in p, so the grid is padded on both sides to keep the tail of
    # a skewed pseudo-density from wrapping around; that tail oscillates and
    # decays over a length of about |a3| / a2, i.e. skewness * sigma.
    dp = grid.step
    skewness = abs(F.skew) / F.sigma ** 3
    reach = (FFT_PAD_SIGMAS + FFT_PAD_PER_SKEW * skewness) * F.sigma
    pad = max(0, math.ceil((reach - (grid.upper - grid.lower) / 2) / dp))
    M = grid.points + 2 * pad
    if M > FFT_MAX_POINTS:
        pad = (FFT_MAX_POINTS - grid.points) // 2
        M = grid.points + 2 * pad
    lower = grid.lower - pad * dp
    dx = 2.0 * math.pi / (M * dp)
    x = (np.arange(M) - M // 2) * dx
    g = evaluate(F, x) * np.exp(-1j * lower * x)
    # centering phase; (-1)^j for even M
    sign = np.exp(2j * math.pi * np.arange(M) * (M // 2) / M)
    full = np.real(sign * np.fft.fft(g)) * dx / (2.0 * math.pi)
    return full[pad: pad + grid.points]


def tabulate_density(F: CharFnApprox, grid: GridSpec | None = None,
                     method: str = "auto") -> DensityGrid:
    """Density and CDF of ``F`` on a uniform price grid.

    ``method`` is ``"fft"``, ``"quad"`` (pointwise quadrature), ``"analytic"``
    (order 2 only) or ``"auto"``: analytic for order 2, FFT for order 3 unless
    the grid is too coarse to resolve the transform, then quadrature. The CDF
    starts from the Gil-Pelaez value at the lower edge and accumulates the
    density by the trapezoid rule.
    """
    if F.order == 1:
        raise PointMassUnsupported("order-1 approximation is a point mass; no density grid")
    if grid is None:
        grid = GridSpec.around(F)
    if grid.points < 3 or not (grid.upper > grid.lower):
        raise InvalidSpec("grid needs upper > lower and at least 3 points")
    reach = MIN_GRID_SIGMAS * F.sigma * (1 - 1e-12)
    if grid.lower > F.a1 - reach or grid.upper < F.a1 + reach:
        raise InvalidSpec(f"grid must cover mean +/- {MIN_GRID_SIGMAS:g} sigma")

    prices = grid.prices()
    if method == "auto":
        if F.order == 2:
            method = "analytic"
        else:
            # the FFT samples x up to pi/dp; Gaussian decay needs ~8/sigma of it
            method = "fft" if math.pi / grid.step >= 8.0 / F.sigma else "quad"
    if method == "analytic":
        if F.order != 2:
            raise UnsupportedOrder("analytic density is available for order 2 only")
        density = gaussian_density(F, prices)
    elif method == "fft":
        density = _fft_density(F, grid)
    elif method == "quad":
        density = np.array([density_at(F, float(p)) for p in prices])
    else:
        raise InvalidSpec(f"unknown density method {method!r}")

    start = invert_cdf(F, float(prices[0]))
    increments = 0.5 * (density[1:] + density[:-1]) * grid.step
    cdf = start + np.concatenate(([0.0], np.cumsum(increments)))
    integral = float(integrate.trapezoid(density, prices))
    min_density = float(density.min())
    return DensityGrid(prices, density, cdf, integral, min_density,
                       min_density < NEGATIVE_DENSITY_WARN, method)
