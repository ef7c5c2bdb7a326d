"""Regenerate the meshes shipped in src/c1vem/data/meshes.

Usage: python3 scripts/make_fixtures.py [--families]
"""

import argparse

from c1vem.mesh import FIXTURE_DIR, save_mesh, total_volume
from meshgen import generate_kuhn_tets, generate_voronoi, truncated_octahedron

FAMILY_SIZES = (64, 216, 512)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--families", action="store_true", help="also write the CVT/random mesh families")
    args = parser.parse_args()
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)

    single = {
        "voronoi_cube_100.json": generate_voronoi(100, seed=1, lloyd_steps=10),
        "tets_cube_3.json": generate_kuhn_tets(3, jitter=0.15, seed=3),
    }
    for name, mesh in single.items():
        save_mesh(mesh, FIXTURE_DIR / name)
        print(f"{name}: {mesh.n_cells} cells, volume {total_volume(mesh):.15f}")

    if not args.families:
        return
    octa = truncated_octahedron()
    families = {
        "cube_cvt": lambda n, s: generate_voronoi(n, seed=s, lloyd_steps=10),
        "cube_random": lambda n, s: generate_voronoi(n, seed=s, lloyd_steps=0),
        "octa_cvt": lambda n, s: generate_voronoi(n, octa, seed=s, lloyd_steps=10),
        "octa_random": lambda n, s: generate_voronoi(n, octa, seed=s, lloyd_steps=0),
    }
    for fam, make in families.items():
        out = FIXTURE_DIR / fam
        out.mkdir(exist_ok=True)
        for k, n in enumerate(FAMILY_SIZES):
            mesh = make(n, 100 + k)
            save_mesh(mesh, out / f"{fam}_{n:04d}.json")
            print(f"{fam}/{n}: {mesh.n_cells} cells, volume {total_volume(mesh):.15f}")


if __name__ == "__main__":
    main()
