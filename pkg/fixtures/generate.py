"""Regenerate the bundled fixture graphs.

Each fixture is a seeded random graph with a planted clique whose status as
a maximum-weight clique is certified by the exact solver before writing.
Run from the repository root:

    python3 fixtures/generate.py
"""

from pathlib import Path

from gbsclique.clique import max_weight_clique_exact
from gbsclique.graph import clique_weight, erdos_renyi, plant_clique, save_graph

HERE = Path(__file__).resolve().parent

# name -> (nodes, edge probability, planted clique size, seed)
FIXTURES = {
    "demo6": (6, 0.5, 4, 1),
    "er16_clique8": (16, 0.2, 8, 3),
    "er12_clique6": (12, 0.2, 6, 2),
    "er18_clique6": (18, 0.2, 6, 4),
}


def build(nodes, p, size, seed):
    g = erdos_renyi(nodes, p, seed=seed)
    g, planted = plant_clique(g, size, seed=seed)
    certified, best_weight = max_weight_clique_exact(g)
    if abs(best_weight - clique_weight(g, planted)) > 1e-12:
        raise SystemExit(
            f"seed {seed}: planted {size}-clique is not a maximum "
            f"(weight {clique_weight(g, planted)} vs {best_weight}); pick another seed"
        )
    return g, planted, certified


def main():
    for name, (nodes, p, size, seed) in FIXTURES.items():
        g, planted, certified = build(nodes, p, size, seed)
        path = HERE / f"{name}.json"
        save_graph(g, path)
        print(f"{name}: M={nodes} p={p} seed={seed} planted={planted} certified={certified}")


if __name__ == "__main__":
    main()
