"""Shared helpers for the experiment scripts."""

from __future__ import annotations

import math
from pathlib import Path

from c1vem.mesh import FIXTURE_DIR
from c1vem.study import structured_family
from c1vem.study.driver import ERROR_KEYS, directory_family, fitted_slope

SHIPPED_FAMILIES = ("cube_cvt", "cube_random", "octa_cvt", "octa_random")


def parse_sizes(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s]


def families(sizes: list[int], shipped: list[str]) -> dict:
    out = {"structured": structured_family(sizes)}
    for name in shipped:
        out[name] = directory_family(FIXTURE_DIR / name)
    return out


def slope_line(records, keys=ERROR_KEYS) -> str:
    parts = []
    for k in keys:
        s = fitted_slope(records, k)
        parts.append(f"{k}={'exact' if math.isinf(s) else f'{s:.3f}'}")
    return "  ".join(parts)


def print_table(records) -> None:
    for r in records:
        rates = " ".join(
            f"{k}={r.errors[k]:.3e}" + ("" if not isinstance(r.rates.get(k), float) else f" ({r.rates[k]:.2f})")
            for k in ERROR_KEYS
        )
        print(f"  {r.mesh:>16} h={r.h:.4f} dofs={r.dofs:>7} {rates}")


def out_dir(root: Path, *parts: str) -> Path:
    path = Path(root).joinpath(*parts)
    path.mkdir(parents=True, exist_ok=True)
    return path
