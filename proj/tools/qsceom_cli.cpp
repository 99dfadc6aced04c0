#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsceom/experiments.hpp"

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<int> threads;
  std::vector<std::string> overrides;
};

qsceom::ExperimentConfig resolve(const GlobalOptions& g) {
  auto cfg = g.config_path.empty() ? qsceom::ExperimentConfig() : qsceom::ExperimentConfig::load(g.config_path);
  for (const auto& o : g.overrides) cfg.set_assignment(o);
  if (g.seed) cfg.set("seed", std::to_string(*g.seed));
  if (!g.out_dir.empty()) cfg.set("output.dir", g.out_dir);
  if (g.threads) cfg.set("threads", std::to_string(*g.threads));
  return cfg;
}

void report(const qsceom::CommandResult& r) {
  std::cout << r.record.command << ": config_hash=" << r.record.config_hash << " wall_time=" << r.record.wall_time_seconds
            << "s\n";
  for (const auto& f : r.files) std::cout << "  wrote " << f.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum self-consistent EOM experiment driver"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  GlobalOptions g;
  app.add_option("--config", g.config_path, "key=value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed (overrides the config)");
  app.add_option("--out", g.out_dir, "output directory (overrides the config)");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--set", g.overrides, "extra key=value override, repeatable");

  std::string fixture;
  auto* pes = app.add_subcommand("pes", "potential-energy-surface scan with q-sc-EOM roots and FCI references");
  auto* bench = app.add_subcommand("ansatz-bench", "UCCSD / HEA / ADAPT errors and optimizer comparison");
  auto* brg = app.add_subcommand("brg-sweep", "BRG group counts, tolerance and chain-length error tables");
  auto* noise = app.add_subcommand("noise-bench", "noise configurations x mitigation x allocation");
  auto* dump = app.add_subcommand("dump-hamiltonian", "write the qubit Hamiltonian of a fixture");
  auto* fci = app.add_subcommand("fci", "exact sector spectrum of a fixture");
  for (auto* sub : {dump, fci}) sub->add_option("fixture", fixture, "fixture name or FCIDUMP path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    auto cfg = resolve(g);
    if (!fixture.empty()) cfg.set("fixture", fixture);
    qsceom::CommandResult r;
    if (*pes) {
      r = qsceom::cmd_pes(cfg);
    } else if (*bench) {
      r = qsceom::cmd_ansatz_bench(cfg);
    } else if (*brg) {
      r = qsceom::cmd_brg_sweep(cfg);
    } else if (*noise) {
      r = qsceom::cmd_noise_bench(cfg);
    } else if (*dump) {
      r = qsceom::cmd_dump_hamiltonian(cfg);
      std::ifstream in(cfg.output_dir() / "hamiltonian.txt");
      std::cout << in.rdbuf();
    } else if (*fci) {
      r = qsceom::cmd_fci(cfg);
      const auto& t = r.tables.at("fci");
      std::cout << "root,energy\n";
      for (std::size_t i = 0; i < t.rows.size(); ++i) std::cout << t.cell(i, "root") << "," << t.cell(i, "energy") << "\n";
    }
    report(r);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
