from ._core import (
    MolecularIntegrals,
    brg_group_count,
    eom_roots,
    excitation_pool_size,
    fci_energies,
    hamiltonian_text,
    m3_correct,
    read_fcidump,
    uniform_allocation,
)

__all__ = [
    "MolecularIntegrals",
    "brg_group_count",
    "eom_roots",
    "excitation_pool_size",
    "fci_energies",
    "hamiltonian_text",
    "m3_correct",
    "read_fcidump",
    "uniform_allocation",
]
