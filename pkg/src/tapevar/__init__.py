"""Frequency-based vs market-based price measures and VaR on trade tapes."""

__version__ = "0.1.0"

from .charfn import (
    CharFnApprox,
    DensityGrid,
    GridSpec,
    evaluate,
    fit_charfn,
    gaussian_density,
    invert_cdf,
    moment_check,
    tabulate_density,
)
from .errors import *  # noqa: F401,F403
from .moments import (
    CentralStats,
    FrequencyDistribution,
    MomentSet,
    central_stats,
    compute_moments,
    price_distribution,
    third_central,
    value_distribution,
    volatility,
    volume_distribution,
    vwap,
)
from .normal import norm_cdf, norm_ppf
from .tape import (
    TapeSpec,
    Trade,
    TradeSlice,
    TradeTape,
    Window,
    parse_tape,
    select_window,
    serialize_tape,
    synthesize_tape,
)
from .var_engine import (
    ComparisonReport,
    VaRRequest,
    VaRResult,
    compare,
    empirical_quantile,
    gaussian_quantile,
    order3_quantile,
    sweep,
    var,
)
