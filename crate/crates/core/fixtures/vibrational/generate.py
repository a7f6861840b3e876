"""Writes the synthetic vibrational fragment sets in this directory.

Fragment 0 is a diagonal anharmonic oscillator with U = I. The remaining
fragments carry small random Bogoliubov parameters and small diagonal
corrections, so the reconstructed Hamiltonian is a weakly perturbed
oscillator whose low spectrum sits near w(n + 1/2) + x n^2.

Run with `python3 generate.py`; the output is deterministic.
"""

import json
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent


def occupations(num_modes, cutoff):
    idx = np.arange(cutoff**num_modes)
    return [(idx // cutoff**p) % cutoff for p in range(num_modes)]


def base_diag(num_modes, cutoff, omega, anharm, cross):
    n = occupations(num_modes, cutoff)
    e = np.zeros(cutoff**num_modes)
    for p in range(num_modes):
        e += omega[p] * (n[p] + 0.5) + anharm[p] * n[p] ** 2
    for p in range(num_modes):
        for q in range(p):
            e += cross * n[p] * n[q]
    return e


def lower_triangle(rng, num_modes, scale):
    m = np.zeros((num_modes, num_modes))
    for p in range(num_modes):
        for q in range(p):
            m[p, q] = rng.uniform(-scale, scale)
    return m.tolist() if num_modes > 1 else []


def fragment_set(name, seed, num_modes, cutoff, num_fragments, omega, anharm, cross=0.0):
    rng = np.random.default_rng(seed)
    n = occupations(num_modes, cutoff)
    zero = [[0.0, 0.0]] * num_modes
    fragments = [
        {
            "gamma": zero,
            "zeta": [0.0] * num_modes,
            "diag": base_diag(num_modes, cutoff, omega, anharm, cross).tolist(),
        }
    ]
    for _ in range(num_fragments - 1):
        diag = np.zeros(cutoff**num_modes)
        for p in range(num_modes):
            diag += rng.uniform(-40.0, 40.0) * n[p] + rng.uniform(-1.5, 1.5) * n[p] ** 2
        frag = {
            "gamma": [[rng.uniform(-0.15, 0.15), rng.uniform(-0.15, 0.15)] for _ in range(num_modes)],
            "zeta": [rng.uniform(-0.08, 0.08) for _ in range(num_modes)],
            "diag": diag.tolist(),
        }
        if num_modes > 1:
            frag["phi"] = lower_triangle(rng, num_modes, 0.3)
            frag["chi"] = lower_triangle(rng, num_modes, 0.3)
        fragments.append(frag)
    out = {
        "num_modes": num_modes,
        "cutoff": cutoff,
        "fragments": fragments,
        "metadata": {
            "description": f"synthetic {num_fragments}-fragment vibrational Hamiltonian",
            "units": "cm-1",
            "generator": "generate.py",
            "seed": seed,
        },
    }
    (HERE / name).write_text(json.dumps(out, indent=1) + "\n")


def single_diagonal():
    diag = [1500.0 * (k + 0.5) - 12.0 * k * k for k in range(8)]
    diag[3], diag[5] = diag[5], diag[3]
    out = {
        "num_modes": 1,
        "cutoff": 8,
        "fragments": [{"gamma": [[0.0, 0.0]], "zeta": [0.0], "diag": diag}],
        "metadata": {"description": "one diagonal fragment with U = I", "units": "cm-1"},
    }
    (HERE / "single_diagonal.json").write_text(json.dumps(out, indent=1) + "\n")


if __name__ == "__main__":
    fragment_set("two_fragment.json", 11, 1, 32, 2, [1320.0], [-9.0])
    fragment_set("synthetic_a.json", 23, 1, 64, 3, [1350.0], [-10.5])
    fragment_set("synthetic_b.json", 37, 1, 64, 5, [1180.0], [-8.0])
    fragment_set("two_mode.json", 41, 2, 6, 3, [1330.0, 660.0], [-7.0, -3.5], cross=-12.0)
    single_diagonal()
