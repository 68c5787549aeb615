"""Option pricing under stable log-price dynamics via a residue series."""

from .core import (
    ConvergenceError,
    DomainError,
    OptionContract,
    StableModelParams,
    beta_to_theta,
    log_moneyness,
    mu_fmls,
    theta_to_beta,
    validate_feller_takayasu,
)
from .pricer import (
    PriceResult,
    TermIndex,
    TermTable,
    price_call,
    price_call_strikes,
    price_put,
    residue_term,
    term_table,
    term_table_csv,
)
from .reference import (
    BlackScholesParams,
    black_scholes_call,
    black_scholes_put,
    bs_equivalent_vol,
    fmls_call,
)
from .lab import (
    DensityGrid,
    SamplerConfig,
    density_grid,
    effective_support,
    mc_price_fmls,
    s1_scale_factor,
    sample_stable,
    stable_density,
)
from .calibrate import (
    CalibrateConfig,
    CalibrationReport,
    OptionChain,
    OptionQuote,
    aggregated_error,
    calibrate,
    calibrate_all,
    filter_quotes,
    load_chain,
    report_payload,
    report_to_json,
    synthetic_chain,
)

__all__ = [
    "ConvergenceError",
    "DomainError",
    "OptionContract",
    "StableModelParams",
    "beta_to_theta",
    "log_moneyness",
    "mu_fmls",
    "theta_to_beta",
    "validate_feller_takayasu",
    "PriceResult",
    "TermIndex",
    "TermTable",
    "price_call",
    "price_call_strikes",
    "price_put",
    "residue_term",
    "term_table",
    "term_table_csv",
    "BlackScholesParams",
    "black_scholes_call",
    "black_scholes_put",
    "bs_equivalent_vol",
    "fmls_call",
    "DensityGrid",
    "SamplerConfig",
    "density_grid",
    "effective_support",
    "mc_price_fmls",
    "s1_scale_factor",
    "sample_stable",
    "stable_density",
    "CalibrateConfig",
    "CalibrationReport",
    "OptionChain",
    "OptionQuote",
    "aggregated_error",
    "calibrate",
    "calibrate_all",
    "filter_quotes",
    "load_chain",
    "report_payload",
    "report_to_json",
    "synthetic_chain",
]
