#!/usr/bin/env python3
"""Regenerate the FCIDUMP fixtures under tests/data.

Requires pyscf. The fixtures are checked in; this script only documents how
they were produced. Orbitals are canonical RHF orbitals. A reference CSV with
pyscf FCI energies (lowest roots of the Sz=0 sector) is written alongside.
"""
import math
import os
import sys

import numpy as np
from pyscf import gto, scf, fci
from pyscf.tools import fcidump

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "tests", "data")


def hchain(n, spacing):
    return [("H", (0.0, 0.0, i * spacing)) for i in range(n)]


def nh3(r_stretch, r_eq=1.012, angle=106.7):
    # N at the origin, the three hydrogens on a cone; the first two N-H bonds
    # are stretched to r_stretch, the third stays at r_eq.
    theta = math.radians(angle)
    # cone half-angle from the HNH angle of a C3v pyramid
    cos_b = math.sqrt((1.0 + 2.0 * math.cos(theta)) / 3.0)
    beta = math.acos(cos_b)
    dirs = []
    for k in range(3):
        phi = 2.0 * math.pi * k / 3.0
        dirs.append((math.sin(beta) * math.cos(phi), math.sin(beta) * math.sin(phi), -cos_b))
    rs = [r_stretch, r_stretch, r_eq]
    atoms = [("N", (0.0, 0.0, 0.0))]
    for r, d in zip(rs, dirs):
        atoms.append(("H", tuple(r * c for c in d)))
    return atoms


def h2o(r, angle=104.5):
    half = math.radians(angle) / 2.0
    return [
        ("O", (0.0, 0.0, 0.0)),
        ("H", (r * math.sin(half), 0.0, r * math.cos(half))),
        ("H", (-r * math.sin(half), 0.0, r * math.cos(half))),
    ]


def write(name, atoms, basis, nroots, refs, cas=None):
    mol = gto.M(atom=atoms, basis=basis, unit="Angstrom", verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.max_cycle = 500
    mf.kernel()
    if not mf.converged:
        mf = scf.newton(mf).run()
    path = os.path.join(OUT, name + ".fcidump")
    fcidump.from_scf(mf, path, tol=1e-15)
    norb = mf.mo_coeff.shape[1]
    if norb <= 8:
        cis = fci.direct_spin1.FCI(mol)
        cis.conv_tol = 1e-12
        h1 = mf.mo_coeff.T @ mf.get_hcore() @ mf.mo_coeff
        from pyscf import ao2mo
        eri = ao2mo.full(mol, mf.mo_coeff)
        nelec = (mol.nelectron // 2, mol.nelectron // 2)
        k = min(nroots, math.comb(norb, nelec[0]) * math.comb(norb, nelec[1]))
        e, _ = cis.kernel(h1, eri, norb, nelec, nroots=k, ecore=mol.energy_nuc())
        e = np.atleast_1d(e)
        for i, v in enumerate(e):
            refs.append((name, i, float(v)))
    if cas is not None:
        from pyscf import mcscf
        ncas, nelecas = cas
        mc = mcscf.CASCI(mf, ncas, nelecas)
        mc.fcisolver.nroots = nroots
        mc.fcisolver.conv_tol = 1e-12
        mc.kernel()
        for i, v in enumerate(np.atleast_1d(mc.e_tot)):
            refs.append((f"{name}@cas{nelecas}e{ncas}o", i, float(v)))
    print(name, norb, mf.e_tot)


def main():
    os.makedirs(OUT, exist_ok=True)
    refs = []
    write("h2_0.74_sto3g", hchain(2, 0.74), "sto-3g", 4, refs)
    for r in (0.5, 1.0, 1.5, 2.0, 2.5):
        write(f"h2_{r:.2f}_sto3g", hchain(2, r), "sto-3g", 4, refs)
    write("h4_linear_3.0_sto6g", hchain(4, 3.0), "sto-6g", 6, refs)
    for n in range(2, 13, 2):
        write(f"hchain{n}_1.5_sto3g", hchain(n, 1.5), "sto-3g", 6, refs)
    for r in (1.012, 1.4, 1.8, 2.2):
        write(f"nh3_{r:.3f}_sto3g", nh3(r), "sto-3g", 6, refs, cas=(6, 6))
    for r in (0.94, 1.4, 1.8, 2.2):
        write(f"h2o_{r:.2f}_sto3g", h2o(r), "sto-3g", 6, refs, cas=(2, 2))
    with open(os.path.join(OUT, "pyscf_fci_reference.csv"), "w") as f:
        f.write("# full-space FCI (Sz=0 sector) computed with pyscf direct_spin1\n")
        f.write("fixture,root_index,energy_hartree\n")
        for name, i, v in refs:
            f.write(f"{name},{i},{v:.12f}\n")


if __name__ == "__main__":
    sys.exit(main())
