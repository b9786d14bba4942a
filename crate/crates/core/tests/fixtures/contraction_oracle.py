"""Regenerates contraction_oracle.json: derived contraction constants for 100
random admissible (p, a, b) triples, evaluated at 50 significant digits."""

import json
import random
from pathlib import Path

import mpmath as mp

mp.mp.dps = 50


def constants(p, a, b):
    p, a, b = mp.mpf(p), mp.mpf(a), mp.mpf(b)
    c = (1 - p) * a + p * b
    A, B, V = a / c, b / c, (b - a) / c
    k = int(mp.floor(mp.log(1 / p) / mp.log(V))) + 2
    gamma = mp.log(1 / p) / mp.log(B)
    rho = (1 + (1 - p) * A**k) / (p * B**k)
    return {"c": c, "A": A, "B": B, "V": V, "k": k, "gamma": gamma, "rho": rho}


def main():
    rng = random.Random(20240611)
    rows = []
    while len(rows) < 100:
        p = rng.uniform(0.02, 0.98)
        a = rng.uniform(0.005, 0.98 * (1 - p) / (2 - p))
        b = rng.uniform(a * (2 - p) / (1 - p), 1.0)
        if (b - a) / ((1 - p) * a + p * b) <= 1 + 1e-9:
            continue
        out = constants(p, a, b)
        row = {"p": p, "a": a, "b": b}
        row.update({key: (v if key == "k" else float(v)) for key, v in out.items()})
        rows.append(row)
    path = Path(__file__).with_suffix(".json")
    path.write_text(json.dumps(rows, indent=1) + "\n")


if __name__ == "__main__":
    main()
