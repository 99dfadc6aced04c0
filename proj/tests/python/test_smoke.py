import csv
import os
from pathlib import Path

import pytest

import qsceom

DATA = Path(os.environ.get("QSCEOM_TEST_DATA", Path(__file__).resolve().parents[1] / "data"))


def reference(name):
    with open(DATA / "pyscf_fci_reference.csv") as f:
        rows = [r for r in csv.reader(line for line in f if not line.startswith("#"))][1:]
    return [float(e) for fx, _, e in rows if fx == name]


def test_fcidump_and_fci():
    ints = qsceom.read_fcidump(DATA / "h2_0.74_sto3g.fcidump")
    assert (ints.n_spatial, ints.n_electrons, ints.n_qubits) == (2, 2, 4)
    assert qsceom.fci_energies(ints, 4) == pytest.approx(reference("h2_0.74_sto3g")[:4], abs=1e-9)


def test_hamiltonian_text_has_fifteen_terms():
    ints = qsceom.read_fcidump(DATA / "h2_0.74_sto3g.fcidump")
    lines = [l for l in qsceom.hamiltonian_text(ints).splitlines() if l.strip()]
    assert len(lines) == 15


def test_pool_size():
    assert qsceom.excitation_pool_size(6, 6) == 117


def test_eom_roots_match_fci():
    roots = qsceom.eom_roots("h2_0.74_sto3g", config={"fixture.dir": str(DATA), "adapt.threshold": "1e-6"})
    assert roots == pytest.approx(reference("h2_0.74_sto3g")[:4], abs=1e-8)


def test_bad_config_key_raises():
    with pytest.raises(Exception):
        qsceom.eom_roots("h2_0.74_sto3g", config={"no.such.key": "1"})


def test_brg_group_count():
    ints = qsceom.read_fcidump(DATA / "h2_0.74_sto3g.fcidump")
    assert qsceom.brg_group_count(ints, 1e-6) == 4


def test_m3_single_qubit():
    q = qsceom.m3_correct(1, {0: 900, 1: 100}, [0.1])
    assert q[0] == pytest.approx(1.0, abs=1e-12)
    assert q.get(1, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_uniform_allocation():
    assert qsceom.uniform_allocation(3, 100) == [34, 33, 33]
