"""
Two trades, two answers
=======================

A window holding only two trades is enough to see the frequency and
market measures pull apart.
"""
from tapevar import TradeSlice, compare, compute_moments, price_distribution

# (value, volume) pairs; prices are 2 and 3
window = TradeSlice.from_pairs([(4, 2), (9, 3)])

m = compute_moments(window, 3)
for n in (1, 2, 3):
    print(f"n={n}  frequency {m.frequency(n):.6f}  market {m.market(n):.6f}")

# the frequency view counts each trade once, whatever its size
print(price_distribution(window).to_csv())

# both Gaussian quantiles at 5%, plus the gap between them
report = compare(window, [0.05])
print(report.to_csv())
