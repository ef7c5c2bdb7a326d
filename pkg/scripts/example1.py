"""Bi-Laplacian with reaction, u = sin(pi x y z), c = (1, 0, 1).

Runs the structured cube family and, optionally, the shipped Voronoi
families; prints per-step rates and least-squares slopes.

Usage: python3 scripts/example1.py [--sizes 4,8,16,32] [--shipped octa_cvt octa_random]
"""

import argparse
import logging
from pathlib import Path

from c1vem.study import RunConfig, get_problem, run_convergence

from _common import SHIPPED_FAMILIES, families, out_dir, parse_sizes, print_table, slope_line


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=parse_sizes, default=[4, 8, 16])
    parser.add_argument("--shipped", nargs="*", choices=SHIPPED_FAMILIES, default=[])
    parser.add_argument("--out", type=Path, default=Path("results/example1"))
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    problem, config = get_problem("example1"), RunConfig()
    for name, family in families(args.sizes, args.shipped).items():
        records = run_convergence(problem, family, config, name, out_dir(args.out, name))
        print(f"{name}:")
        print_table(records)
        print(f"  slopes: {slope_line(records)}")


if __name__ == "__main__":
    main()
