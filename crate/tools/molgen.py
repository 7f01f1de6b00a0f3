#!/usr/bin/env python3
"""Generate STO-3G FCIDUMP fixtures plus sidecar metadata.

Usage: molgen.py --molecule h4_chain --r 0.9 --out fixtures/
       molgen.py --all --out fixtures/
"""
import argparse
import json
import math
import os

import numpy as np
from pyscf import ao2mo, fci, gto, mcscf, scf

GEOMETRIES = {
    "h2": {"eq": 0.74},
    "h4_chain": {"eq": 0.9, "corr": 2.0, "diss": 3.0},
    "h4_rect": {"corr": 1.0, "diss": 3.0},
    "h2o": {"eq": 1.0, "corr": 2.1, "diss": 3.0},
    "n2": {"eq": 1.2, "corr": 1.4, "diss": 2.2},
}
REFERENCE = {"h2": "rhf", "h4_chain": "rhf", "h4_rect": "rhf", "h2o": "uhf", "n2": "uhf"}
FROZEN = {"h2o": 1, "n2": 2}


def atoms(molecule, r):
    if molecule == "h2":
        return [("H", (0, 0, 0)), ("H", (0, 0, r))]
    if molecule == "h4_chain":
        return [("H", (0, 0, i * r)) for i in range(4)]
    if molecule == "h4_rect":
        return [("H", (0, 0, 0)), ("H", (1.0, 0, 0)), ("H", (0, r, 0)), ("H", (1.0, r, 0))]
    if molecule == "h2o":
        half = math.radians(104.5) / 2
        return [
            ("O", (0, 0, 0)),
            ("H", (r * math.sin(half), 0, r * math.cos(half))),
            ("H", (-r * math.sin(half), 0, r * math.cos(half))),
        ]
    if molecule == "n2":
        return [("N", (0, 0, 0)), ("N", (0, 0, r))]
    raise ValueError(molecule)


def run_scf(mol, reference):
    if reference == "rhf":
        mf = scf.RHF(mol)
        mf.conv_tol = 1e-12
        mf.kernel()
        return mf
    mf = scf.UHF(mol)
    mf.conv_tol = 1e-12
    dm = mf.get_init_guess()
    # break spin symmetry so stretched geometries find the broken-symmetry solution
    dm[0] = dm[0] + 0.05 * np.eye(dm[0].shape[0])
    mf.kernel(dm)
    for _ in range(5):
        mo, _, stable, _ = mf.stability(return_status=True)
        if stable:
            break
        mf.kernel(mf.make_rdm1(mo, mf.mo_occ))
    return mf


def fmt(v, *idx):
    return "%23.16e %4d %4d %4d %4d\n" % (v, *idx)


def write_restricted(path, h1, eri, ecore, norb, nelec, ms2, tol=1e-12):
    eri = ao2mo.restore(1, eri, norb)
    with open(path, "w") as f:
        f.write(" &FCI NORB=%d,NELEC=%d,MS2=%d,\n" % (norb, nelec, ms2))
        f.write("  ORBSYM=%s\n" % ("1," * norb))
        f.write("  ISYM=1,\n &END\n")
        for i in range(norb):
            for j in range(i + 1):
                for k in range(norb):
                    for l in range(k + 1):
                        if i * (i + 1) // 2 + j < k * (k + 1) // 2 + l:
                            continue
                        v = eri[i, j, k, l]
                        if abs(v) > tol:
                            f.write(fmt(v, i + 1, j + 1, k + 1, l + 1))
        for i in range(norb):
            for j in range(i + 1):
                if abs(h1[i, j]) > tol:
                    f.write(fmt(h1[i, j], i + 1, j + 1, 0, 0))
        f.write(fmt(ecore, 0, 0, 0, 0))


def write_unrestricted(path, h1, eri, ecore, norb, nelec, ms2, tol=1e-12):
    h1a, h1b = h1
    aa, ab, bb = (ao2mo.restore(1, x, norb) if x.ndim != 4 else x for x in eri)
    zero = fmt(0.0, 0, 0, 0, 0)
    with open(path, "w") as f:
        f.write(" &FCI NORB=%d,NELEC=%d,MS2=%d,\n" % (norb, nelec, ms2))
        f.write("  ORBSYM=%s\n" % ("1," * norb))
        f.write("  ISYM=1,\n  UHF=.TRUE.\n &END\n")

        def block(t, eight_fold):
            for i in range(norb):
                for j in range(i + 1):
                    for k in range(norb):
                        for l in range(k + 1):
                            if eight_fold and i * (i + 1) // 2 + j < k * (k + 1) // 2 + l:
                                continue
                            v = t[i, j, k, l]
                            if abs(v) > tol:
                                f.write(fmt(v, i + 1, j + 1, k + 1, l + 1))
            f.write(zero)

        block(aa, True)
        block(bb, True)
        block(ab, False)
        for h in (h1a, h1b):
            for i in range(norb):
                for j in range(i + 1):
                    if abs(h[i, j]) > tol:
                        f.write(fmt(h[i, j], i + 1, j + 1, 0, 0))
            f.write(zero)
        f.write(fmt(ecore, 0, 0, 0, 0))


def generate(molecule, label, r, out):
    reference = REFERENCE[molecule]
    mol = gto.M(atom=atoms(molecule, r), basis="sto-3g", unit="Angstrom", verbose=0)
    mf = run_scf(mol, reference)
    ncore = FROZEN.get(molecule, 0)
    norb = mol.nao - ncore
    nelec = mol.nelectron - 2 * ncore
    ms2 = mol.spin
    path = os.path.join(out, "%s_%s.fcidump" % (molecule, label))
    if reference == "rhf":
        cas = mcscf.CASCI(mf, norb, nelec)
        h1, ecore = cas.get_h1eff()
        eri = cas.get_h2eff()
        write_restricted(path, h1, eri, ecore, norb, nelec, ms2)
        e_fci = fci.direct_spin1.kernel(h1, eri, norb, nelec, ecore=ecore, conv_tol=1e-12)[0]
    else:
        cas = mcscf.UCASCI(mf, norb, nelec)
        h1, ecore = cas.get_h1eff()
        eri = cas.get_h2eff()
        write_unrestricted(path, h1, eri, ecore, norb, nelec, ms2)
        na, nb = (nelec + ms2) // 2, (nelec - ms2) // 2
        eri_u = tuple(ao2mo.restore(1, x, norb) if x.ndim != 4 else x for x in eri)
        e_fci = fci.direct_uhf.kernel(h1, eri_u, norb, (na, nb), ecore=ecore, conv_tol=1e-12)[0]
    meta = {
        "molecule": molecule,
        "geometry": label,
        "bond_length_angstrom": r,
        "basis": "sto-3g",
        "reference": reference,
        "frozen_core_orbitals": ncore,
        "n_qubits": 2 * norb,
        "n_electrons": nelec,
        "scf_energy": mf.e_tot,
        "scf_converged": bool(mf.converged),
        "fci_energy": e_fci,
    }
    with open(path.replace(".fcidump", ".json"), "w") as f:
        json.dump(meta, f, indent=2)
        f.write("\n")
    print(path, meta["scf_energy"], e_fci)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--molecule")
    ap.add_argument("--r", type=float)
    ap.add_argument("--label")
    ap.add_argument("--all", action="store_true")
    ap.add_argument("--out", default="fixtures")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    if args.all:
        for mol, geoms in GEOMETRIES.items():
            for label, r in geoms.items():
                generate(mol, label, r, args.out)
    else:
        label = args.label or ("r%.2f" % args.r)
        generate(args.molecule, label, args.r, args.out)


if __name__ == "__main__":
    main()
