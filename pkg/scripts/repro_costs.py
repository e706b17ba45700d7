"""Reproduce the headline sizing numbers.

Prints the optimizer's choice and predicted costs for the two n=10,000
deployment scenarios and the large-population row, then a four-decade
sweep in CSV form.
"""

import io
import sys

from altshuffle.costs import CSV_COLUMNS, optimize, sweep_rows

SCENARIOS = [
    ("amortized n=1e4", 10_000, 0.05, 0.05, 40.0, 10.0, "amortized"),
    ("alternating n=1e4", 10_000, 0.05, 0.05, 40.0, 10.0, "alternating"),
    ("amortized n=33k", 33_000, 1 / 3, 0.0, 13.0, 0.0, "amortized"),
]


def main() -> None:
    for label, n, gamma, alpha, s_target, e_target, protocol in SCENARIOS:
        params, rep = optimize(n, gamma, alpha, s_target, e_target,
                               protocol, "avg")
        print(f"{label}: n_dec={params.n_dec} t={params.t} m={params.m} "
              f"n_shuf={params.n_shuf} d={params.d}")
        print(f"  sigma={rep.sigma:.2f} eta={rep.eta:.2f} "
              f"rounds={rep.rounds_best}..{rep.rounds_worst} "
              f"bytes worst={rep.bytes_worst_client} avg={rep.bytes_avg_client}")

    print()
    print(",".join(CSV_COLUMNS))
    for row in sweep_rows([1000, 10_000, 100_000, 1_000_000]):
        print(",".join(str(row[c]) for c in CSV_COLUMNS))


if __name__ == "__main__":
    main()
