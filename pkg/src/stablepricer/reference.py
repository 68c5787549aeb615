"""Classical closed-form pricers serving as oracles for the residue series.

The Gaussian member of the stable family (alpha=2, theta=0, mu=-sigma**2)
has characteristic function exp(-k**2), i.e. a normal log-return with
variance 2 per unit maturity, so the series price coincides with the
Black-Scholes formula at volatility sigma*sqrt(2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import DomainError, OptionContract, StableModelParams, log_moneyness
from .pricer import PriceResult, price_call, price_put


@dataclass(frozen=True)
class BlackScholesParams:
    """Lognormal model parameter."""

    volatility: float

    def __post_init__(self) -> None:
        if self.volatility <= 0.0:
            raise DomainError(f"volatility must be positive, got {self.volatility}")


def _norm_cdf(x: float) -> float:
    # erfc keeps full relative accuracy in the far tails.
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def bs_equivalent_vol(sigma: float) -> float:
    """Lognormal volatility matching the stable scale sigma at alpha=2."""
    return sigma * math.sqrt(2.0)


def black_scholes_call(contract: OptionContract, vol: float) -> float:
    """Standard lognormal call price S*N(d1) - K*exp(-r*tau)*N(d2)."""
    if vol <= 0.0:
        raise DomainError(f"volatility must be positive, got {vol}")
    lm = log_moneyness(contract)
    sq = vol * math.sqrt(contract.maturity)
    d1 = lm / sq + sq / 2.0
    d2 = d1 - sq
    return contract.spot * _norm_cdf(d1) - contract.discounted_strike() * _norm_cdf(d2)


def black_scholes_put(contract: OptionContract, vol: float) -> float:
    """Lognormal put price via parity, P = C - (S - K*exp(-r*tau))."""
    call = black_scholes_call(contract, vol)
    return call - (contract.spot - contract.discounted_strike())


def fmls_call(
    alpha: float,
    sigma: float,
    contract: OptionContract,
    tolerance: float = 1e-4,
    max_column: int = 64,
) -> PriceResult:
    """Price under maximal negative skewness (theta = alpha-2, mu = mu_fmls).

    Delegates to the residue series; put contracts are handled through
    parity like everywhere else.
    """
    params = StableModelParams.fmls(alpha, sigma)
    if contract.side == "put":
        return price_put(params, contract, tolerance, max_column)
    return price_call(params, contract, tolerance, max_column)
