"""Regenerate the H2/STO-3G electronic Hamiltonian fixtures.

Runs RHF with PySCF, transforms the one- and two-electron integrals to the
MO basis, and writes the second-quantized spin-orbital Hamiltonian in the
electronic Hamiltonian JSON format. Spin orbitals are interleaved
(2p = alpha, 2p + 1 = beta of spatial orbital p). Each file is checked
against PySCF's FCI energy in the two-electron sector before it is written.

    python3 generate.py
"""

import itertools
import json

import numpy as np
from pyscf import ao2mo, fci, gto, scf

BOND_LENGTHS = [0.4, 0.5, 0.6, 0.735, 0.9, 1.1, 1.3, 1.6, 2.0, 2.5]
CUTOFF = 1e-12


def spin_orbital_terms(h1, eri, e_nuc):
    n = h1.shape[0]
    m = 2 * n
    terms = [{"coeff": float(e_nuc), "ops": []}]
    for p, q in itertools.product(range(m), repeat=2):
        if p % 2 != q % 2:
            continue
        c = h1[p // 2, q // 2]
        if abs(c) > CUTOFF:
            terms.append({"coeff": float(c), "ops": [
                {"orbital": p, "dagger": True},
                {"orbital": q, "dagger": False},
            ]})
    # 1/2 sum (pr|qs) a+_p a+_q a_s a_r
    for p, q, r, s in itertools.product(range(m), repeat=4):
        if p % 2 != r % 2 or q % 2 != s % 2 or p == q or r == s:
            continue
        c = 0.5 * eri[p // 2, r // 2, q // 2, s // 2]
        if abs(c) > CUTOFF:
            terms.append({"coeff": float(c), "ops": [
                {"orbital": p, "dagger": True},
                {"orbital": q, "dagger": True},
                {"orbital": s, "dagger": False},
                {"orbital": r, "dagger": False},
            ]})
    return m, terms


def apply_term(ops, state):
    sign = 1
    for op in reversed(ops):
        j = op["orbital"]
        occupied = (state >> j) & 1
        if op["dagger"] == bool(occupied):
            return None, 0
        if bin(state & ((1 << j) - 1)).count("1") % 2:
            sign = -sign
        state ^= 1 << j
    return state, sign


def dense_matrix(m, terms):
    dim = 1 << m
    h = np.zeros((dim, dim))
    for term in terms:
        for x in range(dim):
            y, sign = apply_term(term["ops"], x)
            if sign:
                h[y, x] += term["coeff"] * sign
    return h


def main():
    for r in BOND_LENGTHS:
        geometry = f"H 0 0 0; H 0 0 {r}"
        mol = gto.M(atom=geometry, basis="sto-3g", unit="Angstrom", verbose=0)
        mf = scf.RHF(mol).run()
        c = mf.mo_coeff
        h1 = c.T @ mf.get_hcore() @ c
        n = c.shape[1]
        eri = ao2mo.restore(1, ao2mo.kernel(mol, c), n)
        m, terms = spin_orbital_terms(h1, eri, mol.energy_nuc())

        h = dense_matrix(m, terms)
        assert np.allclose(h, h.T, atol=1e-12)
        sector = [i for i in range(1 << m) if bin(i).count("1") == 2]
        e_sector = np.linalg.eigvalsh(h[np.ix_(sector, sector)])
        e_fci = fci.FCI(mf).kernel()[0]
        assert abs(e_sector[0] - e_fci) < 1e-9, (r, e_sector[0], e_fci)

        doc = {
            "num_spin_orbitals": m,
            "terms": terms,
            "metadata": {
                "system": "H2",
                "geometry": geometry,
                "basis": "STO-3G",
                "bond_length_angstrom": r,
                "fci_energy_hartree": float(e_fci),
                "generator": "PySCF " + __import__("pyscf").__version__ + " RHF/MO integrals",
            },
        }
        path = f"h2_r{r:.3f}.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
        print(path, e_fci, np.round(e_sector, 6))


if __name__ == "__main__":
    main()
