#!/usr/bin/env python3
"""Regenerates the JSON model fixtures used by the test suite.

Writes eight small M/G/1-type models into fixtures/.  All numbers are plain
doubles printed with 17 significant digits so they round-trip exactly.
"""

import json
import math
import os
import sys

OUT_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "fixtures")


def fmt(x):
    return float(f"{x:.17g}")


def mat(rows):
    return [[fmt(v) for v in row] for row in rows]


def pole(angle_num, angle_den, weight_re, weight_im):
    return {
        "angle_num": angle_num,
        "angle_den": angle_den,
        "weight_re": mat(weight_re),
        "weight_im": mat(weight_im),
    }


def write(name, model):
    path = os.path.join(OUT_DIR, name)
    with open(path, "w") as f:
        json.dump(model, f, indent=1)
        f.write("\n")
    print(f"wrote {path}")


def scalar_random_walk():
    # Scalar chain: up-2 with 0.2, up-1 with 0.4, down-1 with 0.4.
    a = [[[0.4]], [[0.4]], [[0.2]]]
    return {
        "M": 1,
        "M0": 1,
        "A": a,
        "B0": [[0.4]],
        "B": [[[0.4]], [[0.2]]],
        "C0": [[0.4]],
        "a_tail": None,
        "b_tail": None,
    }


def two_phase(p01, p10, q01, q10):
    # Phases alternate deterministically; level moves -1 or +1 (blocks 0 and 2).
    a0 = [[0.0, p01], [p10, 0.0]]
    a1 = [[0.0, 0.0], [0.0, 0.0]]
    a2 = [[0.0, q01], [q10, 0.0]]
    return {
        "M": 2,
        "M0": 2,
        "A": [mat(a0), mat(a1), mat(a2)],
        "B0": mat(a0),
        "B": [mat(a1), mat(a2)],
        "C0": mat(a0),
        "a_tail": None,
        "b_tail": None,
    }


def boundary_small():
    # Two interior phases, a single boundary phase.
    a0 = [[0.0, 0.7], [0.9, 0.0]]
    a1 = [[0.0, 0.0], [0.0, 0.0]]
    a2 = [[0.0, 0.3], [0.1, 0.0]]
    return {
        "M": 2,
        "M0": 1,
        "A": [mat(a0), mat(a1), mat(a2)],
        "B0": [[0.2]],
        "B": [mat([[0.5, 0.3]])],
        "C0": mat([[0.7], [0.9]]),
        "a_tail": None,
        "b_tail": None,
    }


def geometric_boundary(radius, b0):
    # Scalar interior as in scalar_random_walk; boundary jumps follow a pure
    # geometric tail B(k) = w * radius^-k for k >= 1 with w chosen so the
    # boundary row is stochastic: w * 1/(radius - 1) + b0 = 1.
    w = (1.0 - b0) * (radius - 1.0)
    return {
        "M": 1,
        "M0": 1,
        "A": [[[0.4]], [[0.4]], [[0.2]]],
        "B0": [[fmt(b0)]],
        "B": [],
        "C0": [[0.4]],
        "a_tail": None,
        "b_tail": {
            "radius": fmt(radius),
            "order": 1,
            "start_index": 0,
            "poles": [pole(0, 1, [[w]], [[0.0]])],
        },
    }


def slow_polynomial_head(with_boundary_tail):
    # Interior jumps c * 1.5^-k * (k+1)^-3 for k = 0..60, plus a tiny declared
    # geometric remainder so the generating-function radius is exactly 1.5.
    top = 60
    tail_coeff = 1e-30
    ratio = 2.0 / 3.0
    tail_mass = tail_coeff * ratio ** (top + 1) / (1.0 - ratio)
    s = math.fsum((ratio**k) / ((k + 1) ** 3) for k in range(top + 1))
    c = (1.0 - tail_mass) / s
    a = [[[fmt(c * ratio**k / ((k + 1) ** 3))]] for k in range(top + 1)]
    model = {
        "M": 1,
        "M0": 1,
        "A": a,
        "B0": a[0],
        "B": a[1:],
        "C0": a[0],
        "a_tail": {"start_index": top, "ratio": fmt(ratio), "coeff": [[tail_coeff]]},
        "b_tail": None,
    }
    if with_boundary_tail:
        model["B0"] = [[0.5]]
        model["B"] = []
        model["b_tail"] = {
            "radius": 1.2,
            "order": 1,
            "start_index": 0,
            "poles": [pole(0, 1, [[0.1]], [[0.0]])],
        }
    return model


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    write("scalar.json", scalar_random_walk())
    write("two_phase.json", two_phase(0.8, 0.8, 0.2, 0.2))
    write("asym_two_phase.json", two_phase(0.7, 0.9, 0.3, 0.1))
    write("boundary_m0.json", boundary_small())
    write("above_rb.json", geometric_boundary(1.5, 0.0))
    write("at_rb.json", geometric_boundary(2.0, 0.5))
    write("polyhead.json", slow_polynomial_head(False))
    write("polyhead_btail.json", slow_polynomial_head(True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
