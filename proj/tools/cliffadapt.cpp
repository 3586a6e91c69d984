// Copyright 2026 The cliffadapt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cliffadapt/cliffadapt.hpp"

namespace ca = cliffadapt;

namespace {

struct EngineFlags {
  std::string pool = "multi";
  std::vector<std::string> select{"exact"};
  std::vector<std::string> preopt{"skip"};
  std::vector<std::string> delta;
  std::size_t seeds = 1;
  std::uint64_t seed_base = 1;
  std::size_t spsa_iters = 300;
  std::size_t max_iters = 10;
  double gamma0 = 0.01;
  double threshold = 1e-3;
  std::size_t outer_iters = 10;
  std::size_t fine_tune_iters = 5;
  std::size_t shots = 0;
  std::size_t workers = 0;
  std::string out = "results";
  double tolerance = 0.01;
};

void add_engine_flags(CLI::App* app, EngineFlags& f) {
  app->add_option("--pool", f.pool, "Operator pool: qaoa, single, multi")->capture_default_str();
  app->add_option("--select", f.select, "Selection: exact, clifford, random (repeatable)")
      ->capture_default_str();
  app->add_option("--preopt", f.preopt,
                  "First-layer Clifford-point pre-optimization method (repeatable)")
      ->capture_default_str();
  app->add_option("--tgate-delta", f.delta,
                  "Low-rank pruning budget; 'exact' for the state-vector backend (repeatable)");
  app->add_option("--seeds", f.seeds, "Number of seeds")->capture_default_str();
  app->add_option("--seed-base", f.seed_base, "First seed")->capture_default_str();
  app->add_option("--spsa-iters", f.spsa_iters, "SPSA iterations per ADAPT step")->capture_default_str();
  app->add_option("--max-iters", f.max_iters, "Maximum ADAPT iterations")->capture_default_str();
  app->add_option("--gamma0", f.gamma0, "Initial cost-layer angle")->capture_default_str();
  app->add_option("--threshold", f.threshold, "Gradient infinity-norm stopping threshold")
      ->capture_default_str();
  app->add_option("--outer-iters", f.outer_iters, "Pre-optimization iterations")->capture_default_str();
  app->add_option("--fine-tune-iters", f.fine_tune_iters, "Hill-climb refinement iterations")
      ->capture_default_str();
  app->add_option("--shots", f.shots, "Shots per energy estimate (0: exact)")->capture_default_str();
  app->add_option("--workers", f.workers, "Parallel runs (0: hardware threads)")->capture_default_str();
  app->add_option("--out", f.out, "Output directory")->capture_default_str();
  app->add_option("--tolerance", f.tolerance, "Relative-error tolerance for success rates")
      ->capture_default_str();
}

void apply_engine_flags(const EngineFlags& f, ca::ExperimentConfig& c) {
  c.pool = f.pool;
  c.select = f.select;
  c.preopt = f.preopt;
  if (!f.delta.empty()) {
    c.delta.clear();
    for (const auto& d : f.delta) {
      if (d == "exact") {
        c.delta.emplace_back(std::nullopt);
      } else {
        try {
          c.delta.emplace_back(std::stod(d));
        } catch (const std::exception&) {
          throw ca::ConfigError("--tgate-delta: not a number: " + d);
        }
      }
    }
  }
  c.seeds.clear();
  for (std::size_t s = 0; s < f.seeds; ++s) c.seeds.push_back(f.seed_base + s);
  c.spsa.iters = f.spsa_iters;
  c.max_iters = f.max_iters;
  c.gamma0 = f.gamma0;
  c.threshold = f.threshold;
  c.outer_iters = f.outer_iters;
  c.fine_tune_iters = f.fine_tune_iters;
  c.shots = f.shots;
  c.workers = f.workers;
  c.out_dir = f.out;
  c.tolerance = f.tolerance;
  // Round-trip through the parser for validation.
  c = ca::config_from_json(ca::to_json(c));
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::trunc);
  if (!f) throw ca::ConfigError("cannot write " + p.string());
  f << text;
}

void write_report(const std::vector<ca::RunRecord>& records, const std::string& dir, double tol) {
  const ca::Report r = ca::report(records, tol);
  std::filesystem::create_directories(dir);
  write_text(std::filesystem::path(dir) / "traces.csv", r.traces_csv);
  write_text(std::filesystem::path(dir) / "success.csv", r.success_csv);
  write_text(std::filesystem::path(dir) / "census.csv", r.census_csv);
}

int run_and_summarize(const ca::ExperimentConfig& cfg) {
  std::size_t failed = 0;
  const auto out = ca::run_experiment(cfg, [&](const ca::RunRecord& r) {
    if (r.status != "ok") ++failed;
    std::printf("cell %zu  %s  seed %llu  E=%.10f", r.cell, r.variant.name().c_str(),
                static_cast<unsigned long long>(r.seed), r.final_energy);
    if (r.approximation_ratio) std::printf("  ratio=%.6f", *r.approximation_ratio);
    if (r.relative_error) std::printf("  relerr=%.3e", *r.relative_error);
    if (r.status != "ok") std::printf("  ERROR: %s", r.error.c_str());
    std::printf("\n");
    std::fflush(stdout);
  });
  write_report(out.records, cfg.out_dir, cfg.tolerance);
  std::printf("%zu runs (%zu failed); records: %s\n", out.records.size(), failed,
              out.records_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ADAPT-QAOA with Clifford-point and low-rank stabilizer approximations"};
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "Run ADAPT-QAOA on one problem");
  solve->require_subcommand(1);

  EngineFlags mc_flags;
  std::string graph_file;
  auto* mc = solve->add_subcommand("maxcut", "MaxCut on a graph file of 'i j w' lines");
  mc->add_option("graph", graph_file, "Graph file")->required()->check(CLI::ExistingFile);
  add_engine_flags(mc, mc_flags);

  EngineFlags tf_flags;
  std::size_t tf_n = 5;
  double tf_w = 1.0;
  std::vector<double> tf_gx{0.0}, tf_gz{0.0};
  std::string couplings;
  auto* tf = solve->add_subcommand("tfim", "Transverse-field Ising model");
  tf->add_option("--n", tf_n, "Sites of the open chain")->capture_default_str();
  tf->add_option("--w", tf_w, "Uniform chain coupling")->capture_default_str();
  tf->add_option("--gx", tf_gx, "X field (repeatable for a grid)")->capture_default_str();
  tf->add_option("--gz", tf_gz, "Z field (repeatable for a grid)")->capture_default_str();
  tf->add_option("--couplings", couplings, "Coupling-matrix file instead of a chain")
      ->check(CLI::ExistingFile);
  add_engine_flags(tf, tf_flags);

  std::string config_file, sweep_out;
  std::size_t sweep_workers = 0;
  bool sweep_workers_set = false;
  auto* sweep = app.add_subcommand("sweep", "Run every cell of a JSON experiment config");
  sweep->add_option("config", config_file, "Config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", sweep_out, "Override output.dir");
  sweep->add_option("--workers", sweep_workers, "Override execution.workers")
      ->each([&](const std::string&) { sweep_workers_set = true; });

  std::string oracle_graph;
  std::uint64_t oracle_seed = 1;
  auto* oracle = app.add_subcommand("oracle", "Exact and greedy MaxCut baselines for a graph");
  oracle->add_option("graph", oracle_graph, "Graph file")->required()->check(CLI::ExistingFile);
  oracle->add_option("--seed", oracle_seed, "Seed for the greedy start")->capture_default_str();

  std::vector<std::string> report_files;
  std::string report_out = "report";
  double report_tol = 0.01;
  auto* rep = app.add_subcommand("report", "Summarize JSON-lines run records");
  rep->add_option("records", report_files, "Record files")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", report_out, "Output directory")->capture_default_str();
  rep->add_option("--tolerance", report_tol, "Relative-error tolerance")->capture_default_str();

  std::string replay_file;
  double replay_tol = 1e-12;
  auto* rpl = app.add_subcommand("replay", "Re-execute records and compare final energies");
  rpl->add_option("records", replay_file, "Record file")->required()->check(CLI::ExistingFile);
  rpl->add_option("--tolerance", replay_tol, "Allowed final-energy difference")->capture_default_str();

  app.add_subcommand("defaults", "Print the fully resolved default config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (mc->parsed()) {
      ca::ExperimentConfig cfg;
      cfg.kind = "maxcut";
      cfg.graph_file = graph_file;
      apply_engine_flags(mc_flags, cfg);
      return run_and_summarize(cfg);
    }
    if (tf->parsed()) {
      ca::ExperimentConfig cfg;
      cfg.kind = "tfim";
      cfg.n = tf_n;
      cfg.w = tf_w;
      cfg.gx = tf_gx;
      cfg.gz = tf_gz;
      if (!couplings.empty()) {
        cfg.tfim_graph = "file";
        cfg.couplings_file = couplings;
      }
      apply_engine_flags(tf_flags, cfg);
      return run_and_summarize(cfg);
    }
    if (sweep->parsed()) {
      ca::ExperimentConfig cfg = ca::load_config(config_file);
      if (!sweep_out.empty()) cfg.out_dir = sweep_out;
      if (sweep_workers_set) cfg.workers = sweep_workers;
      return run_and_summarize(cfg);
    }
    if (oracle->parsed()) {
      const ca::MaxCutInstance g = ca::load_graph(oracle_graph);
      const std::size_t n = g.num_vertices();
      const ca::CutResult best = ca::brute_force_maxcut(g);
      ca::Rng rng(oracle_seed);
      const ca::CutResult greedy = ca::greedy_maxcut(g, rng);
      std::printf("vertices %zu  edges %zu  total weight %.10f\n", n, g.edges().size(), g.total_weight());
      std::printf("brute force  cost %.10f  cut %s\n", best.cost, ca::to_bitstring(best.bits, n).c_str());
      std::printf("greedy       cost %.10f  cut %s\n", greedy.cost, ca::to_bitstring(greedy.bits, n).c_str());
      if (n <= ca::kGroundStateCap) {
        std::printf("ground energy of cost Hamiltonian %.10f\n",
                    ca::ground_energy(ca::maxcut_hamiltonian(g)).energy);
      }
      return 0;
    }
    if (rep->parsed()) {
      std::vector<ca::RunRecord> all;
      for (const auto& f : report_files) {
        auto rs = ca::read_records(f);
        all.insert(all.end(), std::make_move_iterator(rs.begin()), std::make_move_iterator(rs.end()));
      }
      write_report(all, report_out, report_tol);
      std::printf("%zu records summarized into %s\n", all.size(), report_out.c_str());
      return 0;
    }
    if (rpl->parsed()) {
      std::size_t bad = 0;
      for (const auto& r : ca::read_records(replay_file)) {
        const ca::RunRecord again = ca::replay(r);
        const double diff = std::abs(again.final_energy - r.final_energy);
        const bool ok = diff <= replay_tol && again.status == r.status;
        if (!ok) ++bad;
        std::printf("cell %zu  seed %llu  recorded %.17g  replayed %.17g  %s\n", r.cell,
                    static_cast<unsigned long long>(r.seed), r.final_energy, again.final_energy,
                    ok ? "match" : "MISMATCH");
      }
      return bad == 0 ? 0 : 1;
    }
    std::cout << ca::to_json(ca::ExperimentConfig{}).dump(2) << "\n";
    return 0;
  } catch (const ca::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
