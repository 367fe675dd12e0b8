"""
Adding a third cumulant
=======================

Fit second and third order approximations to a synthetic window, tabulate
both densities and compare the left-tail quantiles.
"""
import numpy as np

from tapevar import (
    TapeSpec,
    TradeSlice,
    central_stats,
    compute_moments,
    fit_charfn,
    gaussian_quantile,
    order3_quantile,
    synthesize_tape,
    tabulate_density,
)

tape = synthesize_tape(TapeSpec(400, volatility=0.01, volume_kind="integer", volume=10), seed=3)
stats = central_stats(compute_moments(TradeSlice(tape.trades), 3), "frequency")
print(f"mean {stats.mean:.4f}  sigma {stats.sigma:.4f}  skew {stats.third_central / stats.sigma ** 3:.4f}")

F2, F3 = fit_charfn(stats, 2), fit_charfn(stats, 3)
d2, d3 = tabulate_density(F2), tabulate_density(F3)
print("integral of density:", d2.integral_of_density, d3.integral_of_density)
print("most negative pseudo-density:", d3.min_density)

# where do the two shapes differ most?
k = int(np.argmax(np.abs(d3.density - d2.density)))
print(f"largest gap at p={d3.prices[k]:.4f}: {d2.density[k]:.5f} vs {d3.density[k]:.5f}")

for eps in (0.01, 0.05):
    print(f"eps={eps}  gaussian {gaussian_quantile(stats, eps):.4f}  order3 {order3_quantile(F3, eps):.4f}")
