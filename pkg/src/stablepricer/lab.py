"""Stable-law numerics lab: density inversion, variate generation, MC pricing.

Everything here is an independent check on the series pricer, built from the
characteristic function alone:

    E[exp(i*k*X)] = exp(-|k|**alpha * exp(i*sign(k)*theta*pi/2))

The orientation is pinned so that theta = alpha-2 gives the light *right*
tail (exponential moments of the log-return exist there, the regime where
risk-neutral Monte-Carlo pricing converges).  Market skewness beta relates
to theta through core.beta_to_theta; a standard skewed variate (the usual
trigonometric transformation, scale 1) equals the Feller-standardized one
times s1_scale_factor(alpha, beta).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .core import (
    ConvergenceError,
    DomainError,
    OptionContract,
    _check_alpha,
    _tan_half,
    mu_fmls,
    validate_feller_takayasu,
)

# Draws are produced in fixed-size blocks keyed by (seed, block index) on a
# counter-based generator, so any partition of the workload into streams
# reproduces identical values.
_BLOCK_SIZE = 1 << 16


@dataclass(frozen=True)
class DensityGrid:
    """Density values on an ordered grid, with the parameters echoed."""

    abscissae: np.ndarray
    values: np.ndarray
    alpha: float
    theta: float

    def to_csv(self, precision: int = 6) -> str:
        fmt = f"%.{precision}g"
        lines = ["abscissa,density"]
        for x, v in zip(self.abscissae, self.values):
            lines.append(f"{fmt % x},{fmt % v}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SamplerConfig:
    """Parameters for the stable variate generator."""

    alpha: float
    beta: float
    count: int
    seed: int

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        if not (-1.0 <= self.beta <= 1.0):
            raise DomainError(f"beta must lie in [-1, 1], got {self.beta}")
        if self.count < 1:
            raise DomainError(f"count must be >= 1, got {self.count}")


def _check_diamond(alpha: float, theta: float) -> None:
    if not validate_feller_takayasu(alpha, theta):
        raise DomainError(
            f"theta={theta} outside the diamond for alpha={alpha}; "
            "the density has no probabilistic meaning there"
        )


def stable_density(alpha: float, theta: float, x: float) -> float:
    """Density of the standardized stable law at x by Fourier inversion.

    g(x) = (1/pi) * int_0^inf exp(-c*k**alpha) * cos(k*x + s*k**alpha) dk
    with c = cos(theta*pi/2), s = sin(theta*pi/2).  Quadrature error is held
    below 1e-9; far from the origin the oscillatory weight is handled by the
    dedicated cosine/sine rules.
    """
    _check_diamond(alpha, theta)
    c = math.cos(theta * math.pi / 2.0)
    s = math.sin(theta * math.pi / 2.0)
    # exp(-c*k**alpha) < 1e-17 beyond this point
    k_cut = (40.0 / c) ** (1.0 / alpha)
    try:
        if abs(x) * k_cut <= 50.0:
            val, err = integrate.quad(
                lambda k: math.exp(-c * k**alpha) * math.cos(k * x + s * k**alpha),
                0.0,
                k_cut,
                epsabs=1e-12,
                epsrel=1e-12,
                limit=200,
            )
        else:
            # cos(kx + s*k**alpha) = cos(kx)cos(s*k**alpha) - sin(kx)sin(s*k**alpha)
            vc, ec = integrate.quad(
                lambda k: math.exp(-c * k**alpha) * math.cos(s * k**alpha),
                0.0,
                k_cut,
                weight="cos",
                wvar=abs(x),
                epsabs=1e-12,
                epsrel=1e-12,
                limit=400,
            )
            vs, es = integrate.quad(
                lambda k: math.exp(-c * k**alpha) * math.sin(s * k**alpha),
                0.0,
                k_cut,
                weight="sin",
                wvar=abs(x),
                epsabs=1e-12,
                epsrel=1e-12,
                limit=400,
            )
            if x < 0.0:
                vs = -vs
            val, err = vc - vs, ec + es
    except integrate.IntegrationWarning:  # pragma: no cover - quad warns, not raises
        raise ConvergenceError(f"density quadrature failed at x={x}")
    if err > 1e-9:
        raise ConvergenceError(
            f"density quadrature error {err:.2e} above 1e-9 at x={x}"
        )
    return val / math.pi


def density_grid(alpha: float, theta: float, abscissae: np.ndarray) -> DensityGrid:
    """Evaluate stable_density on an ordered grid of points."""
    xs = np.asarray(abscissae, dtype=float)
    if xs.ndim != 1 or xs.size == 0:
        raise DomainError("abscissae must be a non-empty 1-d array")
    if np.any(np.diff(xs) <= 0.0):
        raise DomainError("abscissae must be strictly increasing")
    vals = np.array([stable_density(alpha, theta, float(x)) for x in xs])
    return DensityGrid(abscissae=xs, values=vals, alpha=alpha, theta=theta)


def effective_support(alpha: float, theta: float, tail_mass: float = 1e-7) -> float:
    """Half-width L such that the mass outside [-L, L] is below tail_mass.

    Uses the power-law tail bound C/(alpha*L**alpha) with
    C = (2*Gamma(1+alpha)/pi) * sin(pi*alpha/2) * cos(pi*theta/2); near
    alpha=2 the Gaussian width takes over.
    """
    _check_diamond(alpha, theta)
    if not (0.0 < tail_mass < 1.0):
        raise DomainError(f"tail_mass must lie in (0, 1), got {tail_mass}")
    from scipy.special import erfcinv

    gaussian_l = 2.0 * float(erfcinv(tail_mass))
    coeff = (
        2.0
        * math.gamma(1.0 + alpha)
        / math.pi
        * math.sin(math.pi * alpha / 2.0)
        * math.cos(math.pi * theta / 2.0)
    )
    if coeff <= 0.0:
        return gaussian_l
    power_l = (coeff / (alpha * tail_mass)) ** (1.0 / alpha)
    return max(gaussian_l, power_l)


def s1_scale_factor(alpha: float, beta: float) -> float:
    """Scale relating the standard skewed variate to the Feller-standard one."""
    bt = beta * _tan_half(alpha)
    return (1.0 + bt * bt) ** (1.0 / (2.0 * alpha))


def _block_generator(seed: int, block_index: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, block_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_stable(config: SamplerConfig) -> np.ndarray:
    """I.i.d. standard stable draws via the trigonometric transformation.

    X = scale * sin(alpha*(U+B)) / cos(U)**(1/alpha)
          * (cos(U - alpha*(U+B)) / W)**((1-alpha)/alpha)
    with U uniform on (-pi/2, pi/2), W unit exponential,
    B = atan(beta*tan(pi*alpha/2))/alpha and scale = s1_scale_factor.
    Deterministic given the seed, independent of block partitioning.
    """
    alpha, beta = config.alpha, config.beta
    bt = beta * _tan_half(alpha)
    b = math.atan(bt) / alpha
    scale = (1.0 + bt * bt) ** (1.0 / (2.0 * alpha))
    inv_alpha = 1.0 / alpha
    exp_w = (1.0 - alpha) / alpha
    out = np.empty(config.count)
    for block in range(0, config.count, _BLOCK_SIZE):
        size = min(_BLOCK_SIZE, config.count - block)
        gen = _block_generator(config.seed, block // _BLOCK_SIZE)
        u = math.pi * (gen.random(size) - 0.5)
        w = gen.standard_exponential(size)
        au = alpha * (u + b)
        x = (
            scale
            * np.sin(au)
            / np.cos(u) ** inv_alpha
            * (np.cos(u - au) / w) ** exp_w
        )
        out[block : block + size] = x
    return out


def mc_price_fmls(
    alpha: float,
    sigma: float,
    contract: OptionContract,
    paths: int = 1_000_000,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte-Carlo call price in the maximal-negative-skew regime.

    The log-return is (r + mu)*tau + sigma*tau**(1/alpha)*L with L a
    standard beta=-1 stable draw and mu = mu_fmls(alpha, sigma), which is
    exactly the drift that makes the discounted spot a martingale (the
    expectation converges only in this regime).  Returns (price, std_error).
    """
    _check_alpha(alpha)
    if contract.side != "call":
        raise DomainError("mc_price_fmls prices call contracts")
    if paths < 2:
        raise DomainError(f"paths must be >= 2, got {paths}")
    mu = mu_fmls(alpha, sigma)
    draws = sample_stable(
        SamplerConfig(alpha=alpha, beta=-1.0, count=paths, seed=seed)
    )
    tau = contract.maturity
    y = sigma * tau ** (1.0 / alpha) * draws
    growth = (contract.rate + mu) * tau
    payoff = np.maximum(contract.spot * np.exp(growth + y) - contract.strike, 0.0)
    disc = math.exp(-contract.rate * tau)
    var = float(payoff.var(ddof=1))
    if not math.isfinite(var):
        warnings.warn("payoff sample variance is non-finite; std_error unreliable")
    price = disc * float(payoff.mean())
    std_error = disc * math.sqrt(var / paths)
    return price, std_error
