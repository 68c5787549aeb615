"""Command-line front end: pricing, term tables, curves, density/sampler
output, Monte-Carlo checks, and chain calibration.

Exit codes: 0 success, 2 usage or domain error, 3 numerical non-convergence.
All numeric output uses 6 significant digits by default (--precision to
override); every command is deterministic given its flags (and --seed).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .calibrate import (
    CalibrateConfig,
    calibrate,
    filter_quotes,
    load_chain,
    report_payload,
)
from .core import (
    ConvergenceError,
    DomainError,
    OptionContract,
    StableModelParams,
    beta_to_theta,
    mu_fmls,
)
from .lab import SamplerConfig, density_grid, mc_price_fmls, sample_stable
from .pricer import price_call, price_put, term_table, term_table_csv
from .reference import black_scholes_call, bs_equivalent_vol
from .reference import fmls_call


def _emit(text: str, out_path: str | None) -> None:
    """Write text to stdout, or byte-identically to a file when --out given."""
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", newline="") as handle:
            handle.write(text)


def _fmt(precision: int):
    return lambda x: f"%.{precision}g" % x


def _add_market_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--spot", type=float, required=True, help="underlying price")
    parser.add_argument("--strike", type=float, required=True, help="strike")
    parser.add_argument("--rate", type=float, required=True, help="risk-free rate")
    parser.add_argument(
        "--maturity", type=float, required=True, help="time to expiry in years"
    )


def _add_model_flags(
    parser: argparse.ArgumentParser, require_skew: bool = True
) -> None:
    parser.add_argument("--alpha", type=float, required=True, help="stability index")
    parser.add_argument("--sigma", type=float, required=True, help="scale parameter")
    group = parser.add_mutually_exclusive_group(required=require_skew)
    group.add_argument("--theta", type=float, help="asymmetry (Feller form)")
    group.add_argument("--beta", type=float, help="skewness (common form)")
    parser.add_argument(
        "--mu",
        type=float,
        default=None,
        help="drift correction; defaults to the martingale value mu_fmls(alpha, sigma)",
    )


def _resolve_theta(args: argparse.Namespace) -> float:
    if args.theta is not None:
        return args.theta
    return beta_to_theta(args.alpha, args.beta)


def _params_from_args(args: argparse.Namespace) -> StableModelParams:
    theta = _resolve_theta(args)
    mu = args.mu if args.mu is not None else mu_fmls(args.alpha, args.sigma)
    return StableModelParams(
        alpha=args.alpha, theta=theta, sigma=args.sigma, mu=mu
    )


def _contract_from_args(args: argparse.Namespace, side: str) -> OptionContract:
    return OptionContract(
        spot=args.spot,
        strike=args.strike,
        rate=args.rate,
        maturity=args.maturity,
        side=side,
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_price(args: argparse.Namespace) -> int:
    params = _params_from_args(args)
    contract = _contract_from_args(args, args.side)
    pricer = price_put if args.side == "put" else price_call
    result = pricer(params, contract, tolerance=args.tol, max_column=args.max_column)
    fmt = _fmt(args.precision)
    print(
        f"price={fmt(result.price)} columns_used={result.columns_used} "
        f"truncation_estimate={fmt(result.truncation_estimate)}"
    )
    if not result.diamond_flag:
        print(
            "warning: (alpha, theta) outside the Feller-Takayasu diamond; "
            "the price is an analytic continuation",
            file=sys.stderr,
        )
    if args.check:
        if params.alpha == 2.0 and params.theta == 0.0:
            vol = bs_equivalent_vol(params.sigma)
            reference = black_scholes_call(contract, vol)
            if args.side == "put":
                reference -= contract.spot - contract.discounted_strike()
            print(f"check: black_scholes={fmt(reference)} (vol={fmt(vol)})")
        else:
            print("check: no closed form for these parameters; skipped")
    return 0


def cmd_table(args: argparse.Namespace) -> int:
    params = _params_from_args(args)
    contract = _contract_from_args(args, "call")
    table = term_table(params, contract, args.nmax)
    _emit(term_table_csv(table, precision=args.precision), args.out)
    return 0


def cmd_curve(args: argparse.Namespace) -> int:
    if args.step <= 0.0:
        raise DomainError(f"--step must be positive, got {args.step}")
    if args.stop < args.start:
        raise DomainError("--stop must be >= --start")
    if args.sweep in ("theta", "spot") and args.alpha is None:
        raise DomainError(f"--sweep {args.sweep} requires --alpha")
    if args.sweep == "theta" and (args.theta is not None or args.beta is not None):
        raise DomainError("--sweep theta fixes the skew axis; drop --theta/--beta")
    if args.sweep in ("alpha", "spot") and args.theta is None and args.beta is None:
        raise DomainError(f"--sweep {args.sweep} requires one of --theta or --beta")
    count = int(math.floor((args.stop - args.start) / args.step + 1e-9)) + 1
    grid = [args.start + i * args.step for i in range(count)]
    fmt = _fmt(args.precision)
    lines = [f"{args.sweep},price,in_diamond,status"]
    for x in grid:
        try:
            if args.sweep == "theta":
                mu = args.mu if args.mu is not None else mu_fmls(args.alpha, args.sigma)
                params = StableModelParams(
                    alpha=args.alpha, theta=x, sigma=args.sigma, mu=mu
                )
                contract = _contract_from_args(args, "call")
            elif args.sweep == "alpha":
                theta = args.theta if args.theta is not None else (
                    beta_to_theta(x, args.beta)
                )
                mu = args.mu if args.mu is not None else mu_fmls(x, args.sigma)
                params = StableModelParams(
                    alpha=x, theta=theta, sigma=args.sigma, mu=mu
                )
                contract = _contract_from_args(args, "call")
            else:  # spot
                params = _params_from_args(args)
                contract = OptionContract(
                    spot=x,
                    strike=args.strike,
                    rate=args.rate,
                    maturity=args.maturity,
                    side="call",
                )
            result = price_call(
                params, contract, tolerance=args.tol, max_column=args.max_column
            )
            lines.append(
                f"{fmt(x)},{fmt(result.price)},"
                f"{str(result.diamond_flag).lower()},ok"
            )
        except ConvergenceError:
            lines.append(f"{fmt(x)},,,non-convergent")
        except DomainError:
            lines.append(f"{fmt(x)},,,domain-error")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_density(args: argparse.Namespace) -> int:
    theta = _resolve_theta(args)
    xmin = -args.xmax if args.xmin is None else args.xmin
    grid = density_grid(
        args.alpha, theta, np.linspace(xmin, args.xmax, args.points)
    )
    _emit(grid.to_csv(precision=args.precision), args.out)
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    config = SamplerConfig(
        alpha=args.alpha, beta=args.beta, count=args.count, seed=args.seed
    )
    draws = sample_stable(config)
    fmt = _fmt(args.precision)
    _emit("draw\n" + "\n".join(fmt(d) for d in draws) + "\n", args.out)
    return 0


def cmd_mc(args: argparse.Namespace) -> int:
    contract = _contract_from_args(args, "call")
    price, std_error = mc_price_fmls(
        args.alpha, args.sigma, contract, paths=args.paths, seed=args.seed
    )
    fmt = _fmt(args.precision)
    print(f"price={fmt(price)} std_error={fmt(std_error)}")
    if args.check:
        series = fmls_call(
            args.alpha, args.sigma, contract, tolerance=args.tol
        ).price
        gap = abs(price - series) / std_error
        print(f"series={fmt(series)} abs_diff_over_se={fmt(gap)}")
    return 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    config = CalibrateConfig(
        starts=args.starts, seed=args.seed, free_mu=args.free_mu
    )
    payloads = []
    for path in args.chain:
        chain = load_chain(path)
        if args.calls_only:
            chain = filter_quotes(chain, "call")
        elif args.puts_only:
            chain = filter_quotes(chain, "put")
        report = calibrate(chain, args.model, config)
        payload = report_payload(report, precision=args.precision)
        if not report.converged:
            payload["warning"] = "optimizer did not converge"
        payloads.append((path, payload))

    if len(payloads) == 1:
        text = json.dumps(payloads[0][1], indent=2) + "\n"
    else:
        reports = [dict(p, file=path) for path, p in payloads]
        aggregate = {}
        for key in ("sigma", "alpha", "beta", "mu", "aggregated_error"):
            values = np.array([p[key] for _, p in payloads], dtype=float)
            fmt = _fmt(args.precision)
            aggregate[key] = {
                "mean": float(fmt(float(np.mean(values)))),
                "std": float(fmt(float(np.std(values)))),
            }
        text = json.dumps({"reports": reports, "aggregate": aggregate}, indent=2)
        text += "\n"
    _emit(text, args.out)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stablepricer",
        description="European option pricing under stable log-price dynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--precision",
            type=int,
            default=6,
            help="significant digits for numeric output (default 6)",
        )

    p = sub.add_parser("price", help="price one European option")
    _add_market_flags(p)
    _add_model_flags(p)
    p.add_argument("--side", choices=("call", "put"), default="call")
    p.add_argument("--tol", type=float, default=1e-4, help="series tolerance")
    p.add_argument("--max-column", type=int, default=64)
    p.add_argument(
        "--check",
        action="store_true",
        help="cross-check against the closed form when one exists (alpha=2, theta=0)",
    )
    common(p)
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("table", help="emit the (n, m) term table as CSV")
    _add_market_flags(p)
    _add_model_flags(p)
    p.add_argument("--nmax", type=int, required=True, help="last n-column")
    p.add_argument("--out", default=None, help="write CSV here instead of stdout")
    common(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("curve", help="price along a sweep of theta, alpha or spot")
    _add_market_flags(p)
    p.add_argument("--alpha", type=float, help="stability index (fixed axes)")
    p.add_argument("--sigma", type=float, required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--theta", type=float)
    group.add_argument("--beta", type=float)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--sweep", choices=("theta", "alpha", "spot"), required=True)
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--max-column", type=int, default=64)
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("density", help="stable density on a grid as CSV")
    p.add_argument("--alpha", type=float, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--theta", type=float)
    group.add_argument("--beta", type=float)
    p.add_argument("--xmin", type=float, default=None)
    p.add_argument("--xmax", type=float, default=10.0)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("sample", help="stable variates as CSV")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("mc", help="Monte-Carlo FMLS call price")
    _add_market_flags(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--paths", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument(
        "--check",
        action="store_true",
        help="also print the series price and |MC - series| / std_error",
    )
    common(p)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("calibrate", help="fit model parameters to chain CSVs")
    p.add_argument("--chain", nargs="+", required=True, help="chain CSV path(s)")
    p.add_argument("--model", choices=("bs", "carrwu", "stable"), required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--calls-only", action="store_true")
    group.add_argument("--puts-only", action="store_true")
    p.add_argument("--starts", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--free-mu",
        action="store_true",
        help="fit mu freely for the stable model instead of tying it to mu_fmls",
    )
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_calibrate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: non-convergence: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
