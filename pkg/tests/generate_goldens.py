"""Regenerate the golden DR files from the naive reference implementation.

Run from the repository root:  python tests/generate_goldens.py

The goldens are produced WITHOUT the library's fast paths: graphs are
enumerated by raw generation with pairwise isomorphism dedupe, weightings by
scanning all r^(2d) assignments, automorphisms by brute force over half-edge
permutations, and the constant term by Gaussian elimination.
"""

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from oracles import naive_dr_constant_term  # noqa: E402

HERE = pathlib.Path(__file__).parent / "golden"

CASES = [
    ("dr_cycle_g1_a1-1.json", 1, 2, (1, -1), 1),
    ("dr_cycle_g2_a1-1.json", 2, 2, (1, -1), 2),
]


def graph_json(graph):
    return {
        "vertices": [{"genus": g} for g in graph.genera],
        "edges": [[i, j] for i, j in graph.edges],
        "legs": list(graph.legs),
    }


def main():
    for name, g, n, a, d in CASES:
        pairs = naive_dr_constant_term(g, n, a, d)
        r0 = max(sum(abs(x) for x in a), 2 * d) + 1
        payload = {
            "meta": {
                "g": g,
                "n": n,
                "a": list(a),
                "d": d,
                "k": 0,
                "r_samples": list(range(r0, r0 + 2 * d + 4)),
            },
            "element": {
                "g": g,
                "n": n,
                "mode": "genus-free",
                "terms": [
                    {"graph": graph_json(gr), "coeff": str(c)} for gr, c in pairs
                ],
            },
        }
        path = HERE / name
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        print("wrote", path, f"({len(pairs)} terms)")


if __name__ == "__main__":
    main()
