#include "qsceom/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qsceom/fci.hpp"
#include "qsceom/measurement.hpp"
#include "qsceom/random.hpp"

namespace qsceom {

// ---------------------------------------------------------------- fixtures

FixtureSpec FixtureSpec::parse(const std::string& text) {
  FixtureSpec spec;
  const auto colon = text.find(':');
  spec.name = trim(text.substr(0, colon));
  if (spec.name.empty()) throw ConfigError("empty fixture name");
  if (colon != std::string::npos) {
    static const std::regex active(R"((\d+)e(\d+)o)");
    std::smatch m;
    const std::string tail = trim(text.substr(colon + 1));
    if (!std::regex_match(tail, m, active))
      throw ConfigError("fixture '" + text + "': active space must look like <N>e<M>o");
    spec.active_electrons = std::stoi(m[1].str());
    spec.active_orbitals = std::stoi(m[2].str());
  }
  return spec;
}

double fixture_distance(const std::string& name) {
  std::string stem = std::filesystem::path(name).filename().string();
  if (stem.ends_with(".fcidump")) stem.resize(stem.size() - 8);
  const auto parts = split_list(stem, '_');
  for (std::size_t i = 1; i < parts.size(); ++i) {
    try {
      std::size_t used = 0;
      const double v = std::stod(parts[i], &used);
      if (used == parts[i].size()) return v;
    } catch (const std::exception&) {
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::filesystem::path fixture_path(const ExperimentConfig& config, const std::string& name) {
  const std::filesystem::path direct(name);
  if (direct.has_extension() && std::filesystem::exists(direct)) return direct;
  const auto p = std::filesystem::path(config.get("fixture.dir")) / (name + ".fcidump");
  if (!std::filesystem::exists(p)) throw std::invalid_argument("missing fixture '" + name + "' (looked for " + p.string() + ")");
  return p;
}

Problem load_problem(const ExperimentConfig& config, const FixtureSpec& fixture) {
  Problem pr;
  pr.name = fixture.name;
  MolecularIntegrals full = read_fcidump(fixture_path(config, fixture.name));
  int ne = fixture.active_electrons, no = fixture.active_orbitals;
  if (ne == 0 && no == 0) {
    ne = static_cast<int>(config.get_int("active.electrons"));
    no = static_cast<int>(config.get_int("active.orbitals"));
  }
  if ((ne == 0) != (no == 0)) throw ConfigError("active.electrons and active.orbitals must be set together");
  if (ne > 0 && !(ne == full.n_electrons && no == full.n_spatial))
    pr.integrals = restrict_active(full, centered_active_space(full, ne, no));
  else
    pr.integrals = std::move(full);
  pr.n_alpha = pr.integrals.n_alpha();
  pr.n_beta = pr.integrals.n_beta();
  const auto na = config.get_int("sector.n_alpha"), nb = config.get_int("sector.n_beta");
  if (na >= 0) pr.n_alpha = static_cast<int>(na);
  if (nb >= 0) pr.n_beta = static_cast<int>(nb);
  if (pr.n_alpha + pr.n_beta != pr.integrals.n_electrons)
    throw ConfigError("sector electron count does not match the active space");
  pr.integrals.ms2 = pr.n_alpha - pr.n_beta;
  if (config.get("manifold") != "singles_doubles") throw ConfigError("manifold must be singles_doubles");
  pr.hamiltonian = build_hamiltonian(pr.integrals);
  pr.basis = EomBasis::singles_doubles(pr.n_qubits(), pr.n_alpha, pr.n_beta);
  return pr;
}

OptimizeOptions optimizer_options(const ExperimentConfig& config, std::uint64_t seed) {
  OptimizeOptions o;
  o.method = parse_optimizer_method(config.get("optimizer.method"));
  o.max_evaluations = static_cast<int>(config.get_int("optimizer.max_evaluations"));
  o.gradient_tolerance = config.get_double("optimizer.gradient_tolerance");
  o.seed = seed;
  return o;
}

GroundState solve_ground_state(const ExperimentConfig& config, const Problem& problem, AnsatzKind kind,
                               std::uint64_t seed) {
  GroundState gs;
  gs.kind = kind;
  gs.reference = problem.hartree_fock();
  const int nq = problem.n_qubits();
  const int n_occ = problem.n_alpha + problem.n_beta;
  const auto opt = optimizer_options(config, seed);
  if (kind == AnsatzKind::adapt) {
    AdaptConfig ac;
    ac.gradient_norm_threshold = config.get_double("adapt.threshold");
    ac.max_operators = static_cast<int>(config.get_int("adapt.max_operators"));
    ac.optimizer = opt;
    const auto res = adapt_vqe(problem.hamiltonian, build_excitation_pool(n_occ, nq - n_occ), ac, gs.reference);
    gs.circuit = res.circuit;
    gs.energy = res.energy_trace.back();
    gs.status = res.status;
    gs.warning = res.warning;
    gs.evaluations = static_cast<int>(res.selected.size());
    return gs;
  }
  AnsatzCircuit circuit;
  if (kind == AnsatzKind::uccsd) {
    circuit = uccsd_ansatz(build_excitation_pool(n_occ, nq - n_occ), nq);
  } else if (kind == AnsatzKind::hea) {
    circuit = hea_ansatz(nq, static_cast<int>(config.get_int("hea.layers")), seed, config.get_double("hea.init_scale"));
    const std::string ref = config.get("hea.reference");
    if (ref == "vacuum")
      gs.reference = Statevector::basis_state(nq, 0);
    else if (ref != "hf")
      throw ConfigError("hea.reference must be vacuum or hf");
  } else {
    const auto lc = LucjConfig::with_default_mask(problem.integrals.n_spatial, static_cast<int>(config.get_int("lucj.layers")));
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    std::vector<double> p(lc.num_parameters());
    for (auto& x : p) x = u(rng);
    circuit = lucj_ansatz(lc, p);
  }
  const auto res = run_vqe(circuit, problem.hamiltonian, gs.reference, opt);
  gs.circuit = res.circuit;
  gs.energy = res.energy;
  gs.status = res.status;
  gs.evaluations = res.evaluations;
  gs.warning = res.status != OptimizeStatus::converged;
  return gs;
}

NoiseModel config_noise(const ExperimentConfig& config, int n_qubits) {
  NoiseModel nm = NoiseModel::uniform_readout(n_qubits, config.get_double("noise.readout"));
  nm.depol_1q = config.get_double("noise.depol_1q");
  nm.depol_2q = config.get_double("noise.depol_2q");
  nm.validate();
  return nm;
}

MitigationConfig config_mitigation(const ExperimentConfig& config, const Problem& problem, const NoiseModel& noise) {
  MitigationConfig m;
  m.m3 = config.get_bool("mitigation.m3");
  m.postselect = config.get_bool("mitigation.postselect");
  m.sector = {problem.n_alpha, problem.n_beta};
  m.model = AssignmentModel::from_noise(noise, problem.n_qubits());
  return m;
}

BudgetedBuildOptions config_budget(const ExperimentConfig& config) {
  BudgetedBuildOptions b;
  b.budget = config.get_uint("shots.budget");
  b.allocation = parse_allocation_mode(config.get("shots.allocation"));
  b.floor = config.get_uint("shots.floor");
  b.pilot_fraction = config.get_double("shots.pilot_fraction");
  b.pilot_floor = config.get_uint("shots.pilot_floor");
  return b;
}

double sampled_energy(const Statevector& state, const GroupedObservable& observable, std::uint64_t shots_per_group,
                      const NoiseModel& noise, std::uint64_t seed) {
  double e = observable.offset;
  for (std::size_t g = 0; g < observable.groups.size(); ++g) {
    const auto& grp = observable.groups[g];
    const auto counts = sample_counts(state, std::span<const char>(grp.basis.data(), grp.basis.size()),
                                      shots_per_group, noise, derive_seed(seed, {g}));
    e += grp.estimate(counts);
  }
  return e;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void RunRecord::write_json(const std::filesystem::path& path) const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["wall_time_seconds"] = wall_time_seconds;
  j["ledger"] = {{"elements_evaluated", ledger.elements_evaluated},
                 {"circuits_executed", ledger.circuits_executed},
                 {"shots_consumed", ledger.shots_consumed}};
  auto& roots_json = j["roots"] = nlohmann::ordered_json::array();
  for (const auto& r : roots)
    roots_json.push_back({{"system", r.system},
                          {"root", r.root},
                          {"energy", r.energy},
                          {"reference", r.reference},
                          {"error", r.energy - r.reference}});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line needs at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i];
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r_squared = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

// ---------------------------------------------------------------- output helpers

namespace {

using Clock = std::chrono::steady_clock;

class OutputDir {
 public:
  OutputDir(const ExperimentConfig& config, std::string command, CommandResult& result)
      : config_(config), dir_(config.output_dir()), result_(result), start_(Clock::now()) {
    std::filesystem::create_directories(dir_);
    result_.record.command = std::move(command);
    result_.record.config_hash = config.hash();
  }

  void table(const std::string& stem, const Table& t) {
    const auto path = dir_ / (stem + ".csv");
    write_csv(path, t, config_.hash());
    result_.tables[stem] = t;
    result_.files.push_back(path);
  }

  /// Renders a plot from the CSV just written, so plots depend on tables only.
  void plot(const std::string& csv_stem, const std::string& svg_stem,
            const std::function<PlotSpec(const Table&)>& render) {
    const Table t = read_csv(dir_ / (csv_stem + ".csv"));
    const auto path = dir_ / (svg_stem + ".svg");
    write_svg(path, render(t));
    result_.files.push_back(path);
  }

  void finish() {
    const auto cfg_path = dir_ / "resolved_config.cfg";
    config_.write_resolved(cfg_path);
    result_.files.push_back(cfg_path);
    result_.record.wall_time_seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    const auto rec_path = dir_ / "run_record.json";
    result_.record.write_json(rec_path);
    result_.files.push_back(rec_path);
  }

 private:
  const ExperimentConfig& config_;
  std::filesystem::path dir_;
  CommandResult& result_;
  Clock::time_point start_;
};

struct EomRun {
  EomSolution solution;
  CostLedger ledger;
};

EomRun solve_eom_exact(const ExperimentConfig& config, const Problem& problem, const AnsatzCircuit& circuit) {
  const double shift = config.get_double("eom.shift");
  const std::string solver = config.get("solver");
  auto states = prepare_basis_states(circuit, problem.basis);
  const std::uint64_t n = states.size();
  EomRun run;
  if (solver == "dense") {
    run.solution = diagonalize(build_m_exact(states, problem.hamiltonian, shift));
    run.ledger.elements_evaluated = n * (n + 1) / 2;
  } else if (solver == "davidson") {
    DavidsonOptions d;
    d.k = static_cast<int>(config.get_int("davidson.k"));
    d.tol = config.get_double("davidson.tol");
    d.max_subspace = static_cast<int>(config.get_int("davidson.max_subspace"));
    d.support_tol = config.get_double("davidson.support_tol");
    ExactElementOracle oracle(std::move(states), problem.hamiltonian);
    const Eigen::VectorXd diag = oracle.diagonal();
    const auto element = [&](int i, int j) { return oracle(i, j); };
    const auto gradings = orbital_z2_symmetries(problem.integrals);
    const bool blocked =
        config.get_bool("davidson.symmetry") && !gradings.empty() && preserves_symmetries(circuit, gradings);
    auto res = blocked ? davidson_solve_blocked(element, diag, basis_symmetry_labels(problem.basis, gradings), d, shift)
                       : davidson_solve(element, diag, d, shift);
    run.solution = std::move(res.solution);
    run.ledger = res.ledger;
  } else {
    throw ConfigError("solver must be dense or davidson");
  }
  return run;
}

SampledBuildOptions sampled_options(const ExperimentConfig& config, const Problem& problem) {
  SampledBuildOptions o;
  o.noise = config_noise(config, problem.n_qubits());
  o.mitigation = config_mitigation(config, problem, o.noise);
  o.trajectories = static_cast<int>(config.get_int("noise.trajectories"));
  return o;
}

int reported_roots(const ExperimentConfig& config, const Problem& problem, std::size_t available) {
  const auto sector = sector_basis(problem.integrals.n_spatial, problem.n_alpha, problem.n_beta).size();
  const auto want = static_cast<std::size_t>(std::max<std::int64_t>(1, config.get_int("eom.roots")));
  return static_cast<int>(std::min({want, available, sector}));
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::vector<std::string> distinct(const Table& t, const std::string& col) {
  std::vector<std::string> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& v = t.cell(r, col);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- pes

CommandResult cmd_pes(const ExperimentConfig& config) {
  CommandResult result;
  OutputDir out(config, "pes", result);
  const auto fixtures = config.get_list("pes.fixtures");
  if (fixtures.empty()) throw ConfigError("pes.fixtures is empty");
  const AnsatzKind kind = parse_ansatz_kind(config.get("ansatz.kind"));
  const std::string mode = config.get("expectations");
  if (mode != "exact" && mode != "sampled") throw ConfigError("expectations must be exact or sampled");

  struct Geometry {
    std::string fixture;
    double distance = 0;
    GroundState gs;
    std::vector<double> roots, fci;
    CostLedger ledger;
  };
  std::vector<Geometry> geos(fixtures.size());
  parallel_for(fixtures.size(), config.threads(), [&](std::size_t i) {
    const FixtureSpec spec = FixtureSpec::parse(fixtures[i]);
    const Problem problem = load_problem(config, spec);
    const std::uint64_t seed = derive_seed(config.master_seed(), {i});
    Geometry& g = geos[i];
    g.fixture = spec.name;
    g.distance = fixture_distance(spec.name);
    g.gs = solve_ground_state(config, problem, kind, seed);
    EomSolution sol;
    if (mode == "exact") {
      auto run = solve_eom_exact(config, problem, g.gs.circuit);
      sol = std::move(run.solution);
      g.ledger = run.ledger;
    } else {
      const auto grouped = group_pauli_terms(problem.hamiltonian);
      auto build = build_m_budgeted(g.gs.circuit, grouped, problem.basis, config_budget(config),
                                    sampled_options(config, problem), derive_seed(seed, {1}));
      build.matrix.shift = config.get_double("eom.shift");
      sol = diagonalize(build.matrix);
      g.ledger = build.ledger;
    }
    const int nr = reported_roots(config, problem, sol.total_energies.size());
    const auto fci = fci_solve(problem.integrals, nr);
    for (int r = 0; r < nr; ++r) {
      g.roots.push_back(sol.total_energies[static_cast<std::size_t>(r)]);
      g.fci.push_back(fci.energies[static_cast<std::size_t>(r)]);
    }
  });

  Table t;
  t.columns = {"fixture", "distance", "root", "eom_energy", "fci_energy", "abs_error", "ground_state_energy",
               "ansatz", "parameters"};
  for (const auto& g : geos) {
    for (std::size_t r = 0; r < g.roots.size(); ++r) {
      t.add_row({g.fixture, fmt(g.distance), fmt(static_cast<int>(r)), fmt(g.roots[r]), fmt(g.fci[r]),
                 fmt(std::abs(g.roots[r] - g.fci[r])), fmt(g.gs.energy), to_string(kind),
                 fmt(static_cast<unsigned long long>(g.gs.circuit.num_parameters()))});
      result.record.roots.push_back({g.fixture, static_cast<int>(r), g.roots[r], g.fci[r]});
    }
    result.record.ledger += g.ledger;
  }
  out.table("pes", t);
  out.plot("pes", "pes", plot_pes);
  out.finish();
  return result;
}

PlotSpec plot_pes(const Table& t) {
  PlotSpec p;
  p.title = "Potential energy surface: q-sc-EOM roots and FCI";
  p.x_label = "bond distance (angstrom)";
  p.y_label = "total energy (Hartree)";
  int max_root = -1;
  for (std::size_t r = 0; r < t.rows.size(); ++r) max_root = std::max(max_root, std::stoi(t.cell(r, "root")));
  for (int root = 0; root <= max_root; ++root) {
    PlotSeries eom, fci;
    eom.label = "q-sc-EOM root " + std::to_string(root);
    fci.label = "FCI root " + std::to_string(root);
    fci.dashed = true;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      if (std::stoi(t.cell(r, "root")) != root) continue;
      eom.x.push_back(t.number(r, "distance"));
      eom.y.push_back(t.number(r, "eom_energy"));
      fci.x.push_back(t.number(r, "distance"));
      fci.y.push_back(t.number(r, "fci_energy"));
    }
    eom.line = false;
    fci.markers = false;
    p.series.push_back(std::move(eom));
    p.series.push_back(std::move(fci));
  }
  return p;
}

// ---------------------------------------------------------------- ansatz bench

CommandResult cmd_ansatz_bench(const ExperimentConfig& config) {
  CommandResult result;
  OutputDir out(config, "ansatz-bench", result);
  const Problem problem = load_problem(config, FixtureSpec::parse(config.get("bench.fixture")));
  const double fci = fci_solve(problem.integrals, 1).energies.front();
  constexpr double kChemicalAccuracy = 1.59e-3;
  const auto kinds = config.get_list("bench.ansatze");
  const std::uint64_t master = config.master_seed();

  std::vector<GroundState> states(kinds.size());
  parallel_for(kinds.size(), config.threads(), [&](std::size_t i) {
    states[i] = solve_ground_state(config, problem, parse_ansatz_kind(kinds[i]), derive_seed(master, {i}));
  });
  Table errors;
  errors.columns = {"ansatz", "energy", "fci_energy", "error", "parameters", "evaluations", "status",
                    "below_chemical_accuracy"};
  std::optional<AnsatzCircuit> adapt_circuit;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const auto& gs = states[i];
    const double err = gs.energy - fci;
    errors.add_row({to_string(gs.kind), fmt(gs.energy), fmt(fci), fmt(err),
                    fmt(static_cast<unsigned long long>(gs.circuit.num_parameters())), fmt(gs.evaluations),
                    gs.warning ? "warning" : "ok", err < kChemicalAccuracy ? "yes" : "no"});
    result.record.roots.push_back({to_string(gs.kind), 0, gs.energy, fci});
    if (gs.kind == AnsatzKind::adapt) adapt_circuit = gs.circuit;
  }
  out.table("ansatz_errors", errors);
  out.plot("ansatz_errors", "ansatz_errors", plot_ansatz_errors);

  // Optimizer comparison. Shot-sampled objectives reuse the ADAPT-selected
  // circuit restarted from zero parameters.
  if (!adapt_circuit) {
    ExperimentConfig c = config;
    adapt_circuit = solve_ground_state(c, problem, AnsatzKind::adapt, derive_seed(master, {kinds.size()})).circuit;
  }
  AnsatzCircuit base = *adapt_circuit;
  std::fill(base.parameters().begin(), base.parameters().end(), 0.0);
  const Statevector ref = problem.hartree_fock();
  const CompiledPauliSum h(problem.hamiltonian);
  const auto grouped = group_pauli_terms(problem.hamiltonian);
  const auto methods = config.get_list("bench.optimizers");
  const auto n_seeds = config.get_uint("bench.seeds");
  const auto shots = config.get_uint("bench.sampled_shots");

  struct OptRow {
    std::string objective, method;
    std::uint64_t seed_index = 0;
    double energy = 0;
    int evaluations = 0;
    OptimizeStatus status = OptimizeStatus::failed;
  };
  std::vector<OptRow> rows(methods.size() * (1 + n_seeds));
  parallel_for(rows.size(), config.threads(), [&](std::size_t k) {
    const std::size_t m = k % methods.size();
    const std::size_t s = k / methods.size();
    OptRow& row = rows[k];
    row.method = to_string(parse_optimizer_method(methods[m]));
    OptimizeOptions opt = optimizer_options(config, derive_seed(master, {100, s}));
    opt.method = parse_optimizer_method(methods[m]);
    if (s == 0) {
      // Exact objective: the full ADAPT-VQE loop driven by this optimizer.
      ExperimentConfig c = config;
      c.set("optimizer.method", methods[m]);
      c.set("optimizer.max_evaluations", config.get("bench.exact_max_evaluations"));
      const auto gs = solve_ground_state(c, problem, AnsatzKind::adapt, derive_seed(master, {100, s}));
      row.objective = "exact";
      row.energy = gs.energy;
      row.evaluations = gs.evaluations;
      row.status = gs.warning ? OptimizeStatus::budget_exhausted : OptimizeStatus::converged;
      return;
    }
    row.objective = "sampled";
    row.seed_index = s - 1;
    opt.max_evaluations = static_cast<int>(config.get_int("bench.sampled_max_evaluations"));
    const std::uint64_t run_seed = derive_seed(master, {200, s - 1});
    std::uint64_t counter = 0;
    auto objective = [&](std::span<const double> x) {
      Statevector psi = ref;
      base.apply(psi, x);
      return sampled_energy(psi, grouped, shots, NoiseModel::noiseless(), derive_seed(run_seed, {counter++}));
    };
    const auto res = optimize(objective, base.parameters(), opt);
    row.energy = circuit_energy(base, res.x, h, ref);
    row.evaluations = res.evaluations;
    row.status = res.status;
  });
  auto status_name = [](OptimizeStatus s) {
    return s == OptimizeStatus::converged ? "converged" : s == OptimizeStatus::budget_exhausted ? "budget_exhausted" : "failed";
  };
  Table opt_table;
  opt_table.columns = {"objective", "optimizer", "seed_index", "final_energy", "error", "evaluations", "status"};
  for (const auto& r : rows)
    opt_table.add_row({r.objective, r.method, fmt(static_cast<unsigned long long>(r.seed_index)), fmt(r.energy),
                       fmt(r.energy - fci), fmt(r.evaluations), status_name(r.status)});
  out.table("optimizer_comparison", opt_table);

  Table summary;
  summary.columns = {"objective", "optimizer", "runs", "rms_error", "max_abs_error"};
  for (const std::string objective : {"exact", "sampled"})
    for (const auto& m : methods) {
      const std::string name = to_string(parse_optimizer_method(m));
      double ss = 0, mx = 0;
      int n = 0;
      for (const auto& r : rows)
        if (r.objective == objective && r.method == name) {
          ss += (r.energy - fci) * (r.energy - fci);
          mx = std::max(mx, std::abs(r.energy - fci));
          ++n;
        }
      if (n) summary.add_row({objective, name, fmt(n), fmt(std::sqrt(ss / n)), fmt(mx)});
    }
  out.table("optimizer_summary", summary);
  out.finish();
  return result;
}

PlotSpec plot_ansatz_errors(const Table& t) {
  PlotSpec p;
  p.title = "Ansatz error vs FCI (x: row index)";
  p.x_label = "ansatz (row order of ansatz_errors.csv)";
  p.y_label = "E_ansatz - E_FCI (Hartree)";
  p.log_y = true;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    PlotSeries s;
    s.label = t.cell(r, "ansatz");
    s.x = {static_cast<double>(r)};
    s.y = {std::max(t.number(r, "error"), 1e-16)};
    s.line = false;
    p.series.push_back(std::move(s));
  }
  p.hlines.emplace_back(1.59e-3, "chemical accuracy 1.59 mHa");
  return p;
}

// ---------------------------------------------------------------- BRG sweep

namespace {

struct EomRoots {
  std::vector<double> exact, brg;
  int groups = 0;
  double reconstruction_error = 0;
};

EomRoots brg_eom_roots(const Problem& problem, const std::vector<Statevector>& states, const EomSolution& exact,
                       double tolerance, BrgCutoff cutoff, int n_roots) {
  const auto f = brg_factorize(problem.integrals, tolerance, cutoff);
  const auto build = build_m_brg(states, f, 0, NoiseModel::noiseless(), 0);
  const auto sol = diagonalize(build.matrix);
  EomRoots out;
  out.groups = brg_group_count(f);
  const auto rec = f.reconstruct_eri();
  for (std::size_t i = 0; i < rec.size(); ++i)
    out.reconstruction_error = std::max(out.reconstruction_error, std::abs(rec[i] - problem.integrals.g[i]));
  for (int r = 0; r < n_roots; ++r) {
    out.exact.push_back(exact.total_energies[static_cast<std::size_t>(r)]);
    out.brg.push_back(sol.total_energies[static_cast<std::size_t>(r)]);
  }
  return out;
}

}  // namespace

CommandResult cmd_brg_sweep(const ExperimentConfig& config) {
  CommandResult result;
  OutputDir out(config, "brg-sweep", result);
  const std::uint64_t master = config.master_seed();
  const int threads = config.threads();
  const BrgCutoff cutoff = parse_brg_cutoff(config.get("brg.cutoff"));

  // Group counts per chain and tolerance.
  const auto fixtures = config.get_list("brg.fixtures");
  const auto tolerances = config.get_double_list("brg.tolerances");
  std::vector<std::vector<int>> counts(fixtures.size(), std::vector<int>(tolerances.size()));
  std::vector<int> orbitals(fixtures.size());
  parallel_for(fixtures.size(), threads, [&](std::size_t i) {
    const auto ints = read_fcidump(fixture_path(config, FixtureSpec::parse(fixtures[i]).name));
    orbitals[i] = ints.n_spatial;
    for (std::size_t k = 0; k < tolerances.size(); ++k) counts[i][k] = brg_group_count(brg_factorize(ints, tolerances[k], cutoff));
  });
  Table ct;
  ct.columns = {"system", "n_orbitals", "tolerance", "group_count"};
  for (std::size_t k = 0; k < tolerances.size(); ++k)
    for (std::size_t i = 0; i < fixtures.size(); ++i)
      ct.add_row({FixtureSpec::parse(fixtures[i]).name, fmt(orbitals[i]), fmt(tolerances[k]), fmt(counts[i][k])});
  out.table("brg_group_counts", ct);
  Table fit;
  fit.columns = {"tolerance", "slope", "intercept", "r_squared"};
  if (fixtures.size() >= 2)
    for (std::size_t k = 0; k < tolerances.size(); ++k) {
      std::vector<double> x, y;
      for (std::size_t i = 0; i < fixtures.size(); ++i) x.push_back(orbitals[i]), y.push_back(counts[i][k]);
      const auto lf = fit_line(x, y);
      fit.add_row({fmt(tolerances[k]), fmt(lf.slope), fmt(lf.intercept), fmt(lf.r_squared)});
    }
  out.table("brg_group_fit", fit);
  out.plot("brg_group_counts", "brg_group_counts", plot_brg_counts);

  const AnsatzKind kind = parse_ansatz_kind(config.get("ansatz.kind"));
  auto prepare = [&](const std::string& fixture, std::uint64_t id) {
    const Problem problem = load_problem(config, FixtureSpec::parse(fixture));
    const auto gs = solve_ground_state(config, problem, kind, derive_seed(master, {id}));
    auto states = prepare_basis_states(gs.circuit, problem.basis);
    auto exact = diagonalize(build_m_exact(states, problem.hamiltonian));
    return std::tuple{problem, std::move(states), std::move(exact)};
  };

  // Error vs tolerance on one system.
  {
    const auto [problem, states, exact] = prepare(config.get("brg.sweep_fixture"), 1000);
    const auto tols = config.get_double_list("brg.sweep_tolerances");
    const int nr = reported_roots(config, problem, exact.total_energies.size());
    std::vector<EomRoots> res(tols.size());
    parallel_for(tols.size(), threads, [&](std::size_t k) { res[k] = brg_eom_roots(problem, states, exact, tols[k], cutoff, nr); });
    Table t;
    t.columns = {"system", "tolerance", "group_count", "reconstruction_error", "root", "exact_energy", "brg_energy",
                 "abs_error"};
    for (std::size_t k = 0; k < tols.size(); ++k)
      for (int r = 0; r < nr; ++r) {
        const auto ur = static_cast<std::size_t>(r);
        t.add_row({problem.name, fmt(tols[k]), fmt(res[k].groups), fmt(res[k].reconstruction_error), fmt(r),
                   fmt(res[k].exact[ur]), fmt(res[k].brg[ur]), fmt(std::abs(res[k].brg[ur] - res[k].exact[ur]))});
      }
    out.table("brg_tolerance_sweep", t);
    out.plot("brg_tolerance_sweep", "brg_tolerance_sweep", plot_brg_tolerance);
  }

  // Error vs chain length at a fixed tolerance.
  {
    const auto chains = config.get_list("brg.chain_fixtures");
    const double tol = config.get_double("brg.chain_tolerance");
    struct ChainRes {
      std::string name;
      int n_orbitals = 0;
      EomRoots roots;
    };
    std::vector<ChainRes> res(chains.size());
    parallel_for(chains.size(), threads, [&](std::size_t i) {
      const auto [problem, states, exact] = prepare(chains[i], 2000 + i);
      res[i].name = problem.name;
      res[i].n_orbitals = problem.integrals.n_spatial;
      res[i].roots = brg_eom_roots(problem, states, exact, tol, cutoff, reported_roots(config, problem, exact.total_energies.size()));
    });
    Table t;
    t.columns = {"system", "n_orbitals", "tolerance", "group_count", "root", "exact_energy", "brg_energy", "abs_error"};
    for (const auto& c : res)
      for (std::size_t r = 0; r < c.roots.exact.size(); ++r) {
        t.add_row({c.name, fmt(c.n_orbitals), fmt(tol), fmt(c.roots.groups), fmt(static_cast<int>(r)),
                   fmt(c.roots.exact[r]), fmt(c.roots.brg[r]), fmt(std::abs(c.roots.brg[r] - c.roots.exact[r]))});
        result.record.roots.push_back({c.name, static_cast<int>(r), c.roots.brg[r], c.roots.exact[r]});
      }
    out.table("brg_chain_errors", t);
    out.plot("brg_chain_errors", "brg_chain_errors", plot_brg_chains);
  }

  // Measurement-cost scaling: brute force, Davidson, Davidson with BRG groups.
  {
    const auto sys = config.get_list("brg.scaling_fixtures");
    const auto shots = config.get_uint("brg.scaling_shots");
    const double tol = config.get_double("brg.chain_tolerance");
    struct Cost {
      std::string name;
      int n_orbitals = 0;
      std::size_t n_basis = 0;
      std::uint64_t qwc_groups = 0, brg_groups = 0, davidson_elements = 0;
    };
    std::vector<Cost> costs(sys.size());
    parallel_for(sys.size(), threads, [&](std::size_t i) {
      const Problem problem = load_problem(config, FixtureSpec::parse(sys[i]));
      const auto gs = solve_ground_state(config, problem, kind, derive_seed(master, {3000 + i}));
      ExactElementOracle oracle(prepare_basis_states(gs.circuit, problem.basis), problem.hamiltonian);
      DavidsonOptions d;
      d.k = static_cast<int>(std::min<std::int64_t>(config.get_int("davidson.k"), static_cast<std::int64_t>(oracle.size())));
      d.tol = config.get_double("davidson.tol");
      d.max_subspace = static_cast<int>(config.get_int("davidson.max_subspace"));
      d.support_tol = config.get_double("davidson.support_tol");
      const Eigen::VectorXd diag = oracle.diagonal();
      const auto dv = davidson_solve([&](int a, int b) { return oracle(a, b); }, diag, d);
      Cost& c = costs[i];
      c.name = problem.name;
      c.n_orbitals = problem.integrals.n_spatial;
      c.n_basis = oracle.size();
      c.qwc_groups = group_pauli_terms(problem.hamiltonian).groups.size();
      c.brg_groups = static_cast<std::uint64_t>(brg_group_count(brg_factorize(problem.integrals, tol, cutoff)));
      c.davidson_elements = dv.ledger.elements_evaluated;
    });
    Table t;
    t.columns = {"mode", "system", "n_orbitals", "n_basis", "groups_per_state", "elements", "circuits", "shots"};
    Table slopes;
    slopes.columns = {"mode", "slope_elements", "slope_circuits", "slope_shots"};
    for (ScalingMode mode : {ScalingMode::brute, ScalingMode::davidson, ScalingMode::davidson_brg}) {
      std::vector<ScalingRow> rows;
      for (const auto& c : costs) {
        const std::uint64_t n = c.n_basis;
        const std::uint64_t elements = mode == ScalingMode::brute ? n * (n + 1) / 2 : c.davidson_elements;
        const std::uint64_t u = mode == ScalingMode::davidson_brg ? c.brg_groups : c.qwc_groups;
        ScalingRow row{c.name, c.n_orbitals, c.n_basis, element_cost(n, elements - n, u, shots)};
        t.add_row({to_string(mode), c.name, fmt(c.n_orbitals), fmt(static_cast<unsigned long long>(n)),
                   fmt(static_cast<unsigned long long>(u)), fmt(static_cast<unsigned long long>(row.ledger.elements_evaluated)),
                   fmt(static_cast<unsigned long long>(row.ledger.circuits_executed)),
                   fmt(static_cast<unsigned long long>(row.ledger.shots_consumed))});
        rows.push_back(row);
        if (mode == ScalingMode::brute) result.record.ledger += row.ledger;
      }
      if (rows.size() >= 3) {
        const auto rep = scaling_report(mode, rows);
        slopes.add_row({to_string(mode), fmt(rep.slope_elements), fmt(rep.slope_circuits), fmt(rep.slope_shots)});
      }
    }
    out.table("cost_scaling", t);
    out.table("cost_scaling_slopes", slopes);
  }
  out.finish();
  return result;
}

PlotSpec plot_brg_counts(const Table& t) {
  PlotSpec p;
  p.title = "BRG measurement groups vs chain length";
  p.x_label = "spatial orbitals";
  p.y_label = "group count";
  for (const auto& tol : distinct(t, "tolerance")) {
    PlotSeries s;
    s.label = "tolerance " + tol;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      if (t.cell(r, "tolerance") == tol) {
        s.x.push_back(t.number(r, "n_orbitals"));
        s.y.push_back(t.number(r, "group_count"));
      }
    p.series.push_back(std::move(s));
  }
  return p;
}

PlotSpec plot_brg_tolerance(const Table& t) {
  PlotSpec p;
  p.title = "BRG q-sc-EOM root error vs tolerance";
  p.x_label = "log10(tolerance) (tolerance 0 omitted)";
  p.y_label = "|E_BRG - E_exact| (Hartree)";
  p.log_y = true;
  for (const auto& root : distinct(t, "root")) {
    PlotSeries s;
    s.label = "root " + root;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      if (t.cell(r, "root") == root && t.number(r, "tolerance") > 0) {
        s.x.push_back(std::log10(t.number(r, "tolerance")));
        s.y.push_back(std::max(t.number(r, "abs_error"), 1e-16));
      }
    p.series.push_back(std::move(s));
  }
  p.hlines.emplace_back(1e-6, "1e-6 Ha");
  return p;
}

PlotSpec plot_brg_chains(const Table& t) {
  PlotSpec p;
  p.title = "BRG q-sc-EOM root error vs chain length";
  p.x_label = "spatial orbitals";
  p.y_label = "|E_BRG - E_exact| (Hartree)";
  p.log_y = true;
  for (const auto& root : distinct(t, "root")) {
    PlotSeries s;
    s.label = "root " + root;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      if (t.cell(r, "root") == root) {
        s.x.push_back(t.number(r, "n_orbitals"));
        s.y.push_back(std::max(t.number(r, "abs_error"), 1e-16));
      }
    p.series.push_back(std::move(s));
  }
  p.hlines.emplace_back(1e-6, "1e-6 Ha");
  return p;
}

// ---------------------------------------------------------------- noise bench

namespace {

struct NoiseSetup {
  std::string configuration;
  std::string mitigation;
  std::string allocation;
  std::uint64_t budget = 0;
};

NoiseModel setup_noise(const ExperimentConfig& config, const std::string& configuration, int n_qubits, double depol_2q,
                       double depol_1q) {
  NoiseModel nm;
  if (configuration == "exact" || configuration == "shots") return nm;
  if (configuration != "shots+readout" && configuration != "shots+readout+depol")
    throw ConfigError("unknown noise configuration '" + configuration + "'");
  nm = NoiseModel::uniform_readout(n_qubits, config.get_double("noise.readout"));
  if (configuration == "shots+readout+depol") {
    nm.depol_2q = depol_2q;
    nm.depol_1q = depol_1q;
  }
  return nm;
}

MitigationConfig setup_mitigation(const std::string& name, const Problem& problem, const NoiseModel& noise) {
  MitigationConfig m;
  if (name == "none") {
  } else if (name == "m3") {
    m.m3 = true;
  } else if (name == "m3+postselect") {
    m.m3 = true;
    m.postselect = true;
  } else if (name == "postselect") {
    m.postselect = true;
  } else {
    throw ConfigError("unknown mitigation stack '" + name + "'");
  }
  m.sector = {problem.n_alpha, problem.n_beta};
  m.model = AssignmentModel::from_noise(noise, problem.n_qubits());
  return m;
}

}  // namespace

CommandResult cmd_noise_bench(const ExperimentConfig& config) {
  CommandResult result;
  OutputDir out(config, "noise-bench", result);
  const auto fixtures = config.get_list("noise.fixtures");
  const auto n_seeds = config.get_uint("noise.seeds");
  const AnsatzKind kind = parse_ansatz_kind(config.get("ansatz.kind"));
  const std::uint64_t master = config.master_seed();
  const int threads = config.threads();
  const int trajectories = static_cast<int>(config.get_int("noise.trajectories"));

  std::vector<NoiseSetup> setups;
  for (const auto& c : config.get_list("noise.configurations"))
    for (const auto& m : config.get_list("noise.mitigations"))
      for (const auto& a : config.get_list("noise.allocations"))
        for (double b : config.get_double_list("noise.budgets"))
          setups.push_back({c, m, a, static_cast<std::uint64_t>(b)});
  const auto sweep = config.get_double_list("noise.depol_sweep");

  Table runs;
  runs.columns = {"fixture", "configuration", "mitigation", "allocation", "budget", "seed_index", "root", "energy",
                  "fci_energy", "abs_error", "shots", "retained_fraction"};
  Table summary;
  summary.columns = {"fixture", "configuration", "mitigation", "allocation", "budget", "root", "mean_abs_error",
                     "std_abs_error", "runs"};
  Table sweep_table;
  sweep_table.columns = {"fixture", "depol_2q", "depol_1q", "seed_index", "root", "abs_error"};

  for (std::size_t fi = 0; fi < fixtures.size(); ++fi) {
    const FixtureSpec spec = FixtureSpec::parse(fixtures[fi]);
    const Problem problem = load_problem(config, spec);
    const auto gs = solve_ground_state(config, problem, kind, derive_seed(master, {fi}));
    const int nr = reported_roots(config, problem, problem.basis.size());
    const auto fci = fci_solve(problem.integrals, nr).energies;
    const auto grouped = group_pauli_terms(problem.hamiltonian);
    const auto exact = diagonalize(build_m_exact(gs.circuit, problem.hamiltonian, problem.basis));

    struct Run {
      std::vector<double> energies;
      CostLedger ledger;
      double retained = 1.0;
    };
    auto run_one = [&](const NoiseModel& noise, const MitigationConfig& mit, AllocationMode alloc,
                       std::uint64_t budget, std::uint64_t seed) {
      Run r;
      SampledBuildOptions o;
      o.noise = noise;
      o.mitigation = mit;
      o.trajectories = trajectories;
      BudgetedBuildOptions b;
      b.budget = budget;
      b.allocation = alloc;
      b.floor = config.get_uint("shots.floor");
      b.pilot_fraction = config.get_double("shots.pilot_fraction");
      b.pilot_floor = config.get_uint("shots.pilot_floor");
      const auto build = build_m_budgeted(gs.circuit, grouped, problem.basis, b, o, seed);
      r.energies = diagonalize(build.matrix).total_energies;
      r.ledger = build.ledger;
      r.retained = build.mean_retained_fraction;
      return r;
    };

    // Seeds are shared across setups (paired comparisons): run index = seed index.
    std::vector<Run> grid(setups.size() * n_seeds);
    parallel_for(grid.size(), threads, [&](std::size_t k) {
      const auto& s = setups[k / n_seeds];
      const std::uint64_t seed_index = k % n_seeds;
      if (s.configuration == "exact") {
        grid[k].energies = exact.total_energies;
        return;
      }
      const NoiseModel nm = setup_noise(config, s.configuration, problem.n_qubits(), config.get_double("noise.depol_2q"),
                                        config.get_double("noise.depol_1q"));
      grid[k] = run_one(nm, setup_mitigation(s.mitigation, problem, nm), parse_allocation_mode(s.allocation), s.budget,
                        derive_seed(master, {seed_index}));
    });
    for (std::size_t si = 0; si < setups.size(); ++si) {
      const auto& s = setups[si];
      for (int root = 0; root < nr; ++root) {
        const auto ur = static_cast<std::size_t>(root);
        std::vector<double> errs;
        for (std::uint64_t seed_index = 0; seed_index < n_seeds; ++seed_index) {
          const Run& r = grid[si * n_seeds + seed_index];
          const double e = r.energies[ur];
          errs.push_back(std::abs(e - fci[ur]));
          runs.add_row({spec.name, s.configuration, s.mitigation, s.allocation, fmt(static_cast<unsigned long long>(s.budget)),
                        fmt(static_cast<unsigned long long>(seed_index)), fmt(root), fmt(e), fmt(fci[ur]), fmt(errs.back()),
                        fmt(static_cast<unsigned long long>(r.ledger.shots_consumed)), fmt(r.retained)});
          if (root == 0) result.record.ledger += r.ledger;
        }
        summary.add_row({spec.name, s.configuration, s.mitigation, s.allocation,
                         fmt(static_cast<unsigned long long>(s.budget)), fmt(root), fmt(mean(errs)), fmt(stddev(errs)),
                         fmt(static_cast<unsigned long long>(n_seeds))});
      }
    }

    // Gate-noise sweep: readout noise on, no mitigation, uniform allocation,
    // first budget; depol_1q = depol_2q / 10.
    const auto budgets = config.get_double_list("noise.budgets");
    if (budgets.empty()) throw ConfigError("noise.budgets is empty");
    std::vector<Run> sweep_runs(sweep.size() * n_seeds);
    parallel_for(sweep_runs.size(), threads, [&](std::size_t k) {
      const double p2 = sweep[k / n_seeds];
      const NoiseModel nm = setup_noise(config, "shots+readout+depol", problem.n_qubits(), p2, p2 / 10.0);
      sweep_runs[k] = run_one(nm, setup_mitigation("none", problem, nm), AllocationMode::uniform,
                              static_cast<std::uint64_t>(budgets.front()), derive_seed(master, {k % n_seeds}));
    });
    for (std::size_t k = 0; k < sweep_runs.size(); ++k) {
      const double p2 = sweep[k / n_seeds];
      for (int root = 0; root < nr; ++root) {
        const auto ur = static_cast<std::size_t>(root);
        sweep_table.add_row({spec.name, fmt(p2), fmt(p2 / 10.0), fmt(static_cast<unsigned long long>(k % n_seeds)), fmt(root),
                             fmt(std::abs(sweep_runs[k].energies[ur] - fci[ur]))});
      }
    }
    for (int root = 0; root < nr; ++root)
      result.record.roots.push_back({spec.name, root, exact.total_energies[static_cast<std::size_t>(root)],
                                     fci[static_cast<std::size_t>(root)]});
  }
  out.table("noise_runs", runs);
  out.table("noise_summary", summary);
  out.table("depol_sweep", sweep_table);
  for (const auto& f : fixtures) {
    const std::string name = FixtureSpec::parse(f).name;
    out.plot("noise_summary", "noise_summary_" + name, [&](const Table& t) { return plot_noise_summary(t, name); });
    out.plot("depol_sweep", "depol_sweep_" + name, [&](const Table& t) { return plot_depol_sweep(t, name); });
  }
  out.finish();
  return result;
}

PlotSpec plot_noise_summary(const Table& t, const std::string& fixture) {
  PlotSpec p;
  p.title = fixture + ": mean absolute root error vs FCI (uniform allocation, first budget)";
  p.x_label = "root";
  p.y_label = "mean |E - E_FCI| (Hartree)";
  p.log_y = true;
  std::string budget;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    if (t.cell(r, "fixture") == fixture) {
      budget = t.cell(r, "budget");
      break;
    }
  for (const auto& c : distinct(t, "configuration"))
    for (const auto& m : distinct(t, "mitigation")) {
      PlotSeries s;
      s.label = c + " / " + m;
      for (std::size_t r = 0; r < t.rows.size(); ++r)
        if (t.cell(r, "fixture") == fixture && t.cell(r, "configuration") == c && t.cell(r, "mitigation") == m &&
            t.cell(r, "allocation") == "uniform" && t.cell(r, "budget") == budget) {
          s.x.push_back(t.number(r, "root"));
          s.y.push_back(std::max(t.number(r, "mean_abs_error"), 1e-16));
          s.err.push_back(t.number(r, "std_abs_error"));
        }
      if (!s.x.empty()) p.series.push_back(std::move(s));
    }
  p.hlines.emplace_back(1.59e-3, "chemical accuracy");
  return p;
}

PlotSpec plot_depol_sweep(const Table& t, const std::string& fixture) {
  PlotSpec p;
  p.title = fixture + ": mean root error vs two-qubit depolarizing rate";
  p.x_label = "sweep point (depol_2q in depol_sweep.csv order)";
  p.y_label = "mean |E - E_FCI| (Hartree)";
  p.log_y = true;
  const auto rates = distinct(t, "depol_2q");
  for (const auto& root : distinct(t, "root")) {
    PlotSeries s;
    s.label = "root " + root;
    for (std::size_t k = 0; k < rates.size(); ++k) {
      std::vector<double> errs;
      for (std::size_t r = 0; r < t.rows.size(); ++r)
        if (t.cell(r, "fixture") == fixture && t.cell(r, "root") == root && t.cell(r, "depol_2q") == rates[k])
          errs.push_back(t.number(r, "abs_error"));
      if (errs.empty()) continue;
      s.x.push_back(static_cast<double>(k));
      s.y.push_back(std::max(mean(errs), 1e-16));
    }
    if (!s.x.empty()) p.series.push_back(std::move(s));
  }
  return p;
}

// ---------------------------------------------------------------- fci / dump

CommandResult cmd_fci(const ExperimentConfig& config) {
  CommandResult result;
  OutputDir out(config, "fci", result);
  const Problem problem = load_problem(config, FixtureSpec::parse(config.get("fixture")));
  const auto sector = sector_basis(problem.integrals.n_spatial, problem.n_alpha, problem.n_beta).size();
  const int nr = static_cast<int>(std::min<std::size_t>(sector, static_cast<std::size_t>(config.get_int("fci.roots"))));
  const auto spec = fci_solve(problem.integrals, nr);
  Table t;
  t.columns = {"fixture", "root", "energy"};
  for (int r = 0; r < nr; ++r) {
    const double e = spec.energies[static_cast<std::size_t>(r)];
    t.add_row({problem.name, fmt(r), fmt(e)});
    result.record.roots.push_back({problem.name, r, e, e});
  }
  out.table("fci", t);
  out.finish();
  return result;
}

CommandResult cmd_dump_hamiltonian(const ExperimentConfig& config) {
  CommandResult result;
  OutputDir out(config, "dump-hamiltonian", result);
  const Problem problem = load_problem(config, FixtureSpec::parse(config.get("fixture")));
  const auto path = config.output_dir() / "hamiltonian.txt";
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << problem.hamiltonian.to_text();
  result.files.push_back(path);
  const auto grouped = group_pauli_terms(problem.hamiltonian);
  Table t;
  t.columns = {"group_id", "basis_pattern", "member_count"};
  for (std::size_t g = 0; g < grouped.groups.size(); ++g) {
    const auto& grp = grouped.groups[g];
    t.add_row({fmt(static_cast<unsigned long long>(g)), std::string(grp.basis.rbegin(), grp.basis.rend()),
               fmt(static_cast<unsigned long long>(grp.members.size()))});
  }
  out.table("hamiltonian_groups", t);
  out.finish();
  return result;
}

}  // namespace qsceom
