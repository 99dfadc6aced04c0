#include <map>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qsceom/experiments.hpp"
#include "qsceom/fci.hpp"
#include "qsceom/measurement.hpp"
#include "qsceom/mitigation.hpp"

namespace py = pybind11;
using namespace qsceom;

namespace {

ExperimentConfig make_config(const std::map<std::string, std::string>& overrides) {
  ExperimentConfig c;
  for (const auto& [k, v] : overrides) c.set(k, v);
  return c;
}

std::vector<double> eom_roots(const std::string& fixture, const std::string& ansatz,
                              const std::map<std::string, std::string>& overrides, std::uint64_t seed) {
  const auto cfg = make_config(overrides);
  const auto problem = load_problem(cfg, FixtureSpec::parse(fixture));
  const auto gs = solve_ground_state(cfg, problem, parse_ansatz_kind(ansatz), seed);
  return diagonalize(build_m_exact(gs.circuit, problem.hamiltonian, problem.basis)).total_energies;
}

std::map<std::uint64_t, double> m3(int n_qubits, const std::map<std::uint64_t, double>& counts,
                                   const std::vector<double>& eps) {
  CountsHistogram h{n_qubits, counts, 0, false};
  for (const auto& [b, v] : counts) h.shots += static_cast<std::uint64_t>(v);
  return m3_correct(h, AssignmentModel{eps}).values;
}

std::vector<std::uint64_t> uniform_allocation(std::size_t n_settings, std::uint64_t budget) {
  std::vector<MeasurementSetting> s;
  for (std::size_t k = 0; k < n_settings; ++k) s.push_back({0, 0, 0, static_cast<int>(k)});
  return allocate_shots_uniform(s, budget, 1).shots;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "qsc-EOM excited-state toolkit";

  py::class_<MolecularIntegrals>(m, "MolecularIntegrals")
      .def_readonly("n_spatial", &MolecularIntegrals::n_spatial)
      .def_readonly("n_electrons", &MolecularIntegrals::n_electrons)
      .def_readonly("ms2", &MolecularIntegrals::ms2)
      .def_readonly("core_energy", &MolecularIntegrals::core_energy)
      .def_property_readonly("n_qubits", &MolecularIntegrals::n_qubits);

  m.def("read_fcidump", &read_fcidump, py::arg("path"));
  m.def(
      "hamiltonian_text", [](const MolecularIntegrals& ints) { return build_hamiltonian(ints).to_text(); },
      py::arg("integrals"), "Jordan-Wigner qubit Hamiltonian, one term per line.");
  m.def(
      "fci_energies", [](const MolecularIntegrals& ints, int n_roots) { return fci_solve(ints, n_roots).energies; },
      py::arg("integrals"), py::arg("n_roots") = 4);
  m.def(
      "excitation_pool_size",
      [](int n_occ_spin, int n_virt_spin) { return build_excitation_pool(n_occ_spin, n_virt_spin).size(); },
      py::arg("n_occ_spin"), py::arg("n_virt_spin"));
  m.def("eom_roots", &eom_roots, py::arg("fixture"), py::arg("ansatz") = "adapt",
        py::arg("config") = std::map<std::string, std::string>{}, py::arg("seed") = 1,
        "Exact qsc-EOM total energies for a fixture; config holds key=value overrides.");
  m.def(
      "brg_group_count",
      [](const MolecularIntegrals& ints, double tol) { return brg_group_count(brg_factorize(ints, tol)); },
      py::arg("integrals"), py::arg("tolerance"));
  m.def("m3_correct", &m3, py::arg("n_qubits"), py::arg("counts"), py::arg("eps"),
        "Readout-corrected quasi-probabilities keyed by bitstring integer.");
  m.def("uniform_allocation", &uniform_allocation, py::arg("n_settings"), py::arg("budget"));
}
