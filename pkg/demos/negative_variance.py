"""
When the market variance goes negative
======================================

p(2) - p(1)^2 is not a variance of any probability measure, so it can
come out below zero. The library reports that instead of clamping it.
"""
import logging

from tapevar import NegativeVariance, TradeSlice, compare, compute_moments, volatility

logging.basicConfig(level=logging.WARNING)

window = TradeSlice.from_pairs([(10, 2), (6, 3), (8, 1)])
m = compute_moments(window, 2)

try:
    volatility(m, "market")
except NegativeVariance as exc:
    print("market variance:", exc.variance)   # -12/7

print("frequency variance:", volatility(m, "frequency"))

# compare keeps going with the measures that still make sense
report = compare(window, [0.01, 0.05])
print(report.measures())
print(report.warnings)
