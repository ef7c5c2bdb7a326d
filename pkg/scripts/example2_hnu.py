"""Sensitivity of the bi-Laplacian with natural conditions on x = 0, 1 to the h_nu choice.

u = x^4 y z / 12, c = (1, 0, 0); all nine (reduction, entity) strategies.

Usage: python3 scripts/example2_hnu.py [--sizes 4,8,16] [--shipped cube_cvt cube_random]
"""

import argparse
import logging
from pathlib import Path

from c1vem.study import RunConfig, get_problem, run_sensitivity
from c1vem.study.driver import write_tables

from _common import SHIPPED_FAMILIES, families, out_dir, parse_sizes, slope_line


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=parse_sizes, default=[4, 8, 16])
    parser.add_argument("--shipped", nargs="*", choices=SHIPPED_FAMILIES, default=[])
    parser.add_argument("--out", type=Path, default=Path("results/example2"))
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    problem, config = get_problem("example2"), RunConfig()
    for name, family in families(args.sizes, args.shipped).items():
        print(f"{name}:")
        by_strategy = run_sensitivity(problem, family, config, family_name=name)
        for strategy, records in by_strategy.items():
            label = ":".join(strategy)
            write_tables(records, out_dir(args.out, name, label.replace(":", "_")), config.digest(problem))
            print(f"  {label:>9}  {slope_line(records, ('eH2', 'eH1', 'eL2'))}")


if __name__ == "__main__":
    main()
