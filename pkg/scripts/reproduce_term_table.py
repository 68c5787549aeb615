"""Reproduce the reference term table and its stabilizing cumulative row.

Prints the (n, m) term lattice as CSV for the locked convention contract
(S=4300, K=4000, r=1%, tau=1 under alpha=1.5, theta=-0.4, sigma=0.25 with
the cos-form drift correction), followed by the adaptive-tolerance price.

    python3 scripts/reproduce_term_table.py [--nmax 10] [--out table.csv]
"""

import argparse
import math

from stablepricer import (
    OptionContract,
    StableModelParams,
    price_call,
    term_table,
    term_table_csv,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nmax", type=int, default=10, help="last n-column")
    parser.add_argument("--out", default=None, help="write the CSV here")
    parser.add_argument("--precision", type=int, default=6)
    args = parser.parse_args()

    params = StableModelParams(
        alpha=1.5,
        theta=-0.4,
        sigma=0.25,
        mu=0.25**1.5 * math.cos(math.pi * 1.5 / 2.0),
    )
    contract = OptionContract(spot=4300.0, strike=4000.0, rate=0.01, maturity=1.0)

    table = term_table(params, contract, args.nmax)
    csv_text = term_table_csv(table, precision=args.precision)
    if args.out:
        with open(args.out, "w", newline="") as handle:
            handle.write(csv_text)
        print(f"wrote {args.out}")
    else:
        print(csv_text, end="")

    result = price_call(params, contract, tolerance=1e-4)
    print(
        f"\nadaptive price: {result.price:.6f} "
        f"(columns_used={result.columns_used}, "
        f"truncation_estimate={result.truncation_estimate:.2e})"
    )
    moves = [
        abs(b - a)
        for a, b in zip(table.column_sums, table.column_sums[1:])
    ]
    print("cumulative-row moves:", ", ".join(f"{m:.3g}" for m in moves))


if __name__ == "__main__":
    main()
