"""Second-order reaction-diffusion, u = sin(2xy) cos(z), c = (0, 1, 1).

Prints the h-slopes and the error-versus-dofs slope, expected near -2/3.

Usage: python3 scripts/example3.py [--sizes 4,8,16] [--shipped cube_cvt]
"""

import argparse
import logging
from pathlib import Path

import numpy as np

from c1vem.study import RunConfig, get_problem, run_convergence

from _common import SHIPPED_FAMILIES, families, out_dir, parse_sizes, print_table, slope_line


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=parse_sizes, default=[4, 8, 16])
    parser.add_argument("--shipped", nargs="*", choices=SHIPPED_FAMILIES, default=[])
    parser.add_argument("--out", type=Path, default=Path("results/example3"))
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    problem, config = get_problem("example3"), RunConfig()
    for name, family in families(args.sizes, args.shipped).items():
        records = run_convergence(problem, family, config, name, out_dir(args.out, name))
        dofs = np.log([r.dofs for r in records])
        err = np.log([r.errors["eH1"] for r in records])
        print(f"{name}:")
        print_table(records)
        print(f"  slopes: {slope_line(records)}")
        print(f"  eH1 versus dofs: {np.polyfit(dofs, err, 1)[0]:.3f}")


if __name__ == "__main__":
    main()
