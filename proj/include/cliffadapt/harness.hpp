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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cliffadapt/adapt.hpp"
#include "cliffadapt/error.hpp"
#include "cliffadapt/parallel.hpp"
#include "cliffadapt/problems.hpp"
#include "cliffadapt/statevector.hpp"

namespace cliffadapt {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

/**
 * A sweep description. List-valued keys (select, preopt, delta, gx, gz,
 * seeds) span the cell product; every key has a default.
 */
struct ExperimentConfig {
  // problem
  std::string kind = "maxcut";  // maxcut | tfim
  std::string graph_file;       // maxcut from file; otherwise random instances
  std::size_t n = 5;
  std::size_t instances = 1;
  std::uint64_t instance_seed = 1;
  std::string tfim_graph = "chain";  // chain | random | file
  double w = 1.0;
  std::string couplings_file;
  std::vector<double> gx{0.0};
  std::vector<double> gz{0.0};
  // engine
  std::string pool = "multi";
  std::vector<std::string> select{"exact"};  // exact | clifford | random
  double gamma0 = 0.01;
  double threshold = 1e-3;
  std::size_t max_iters = 10;
  // optimizer
  SpsaOptions spsa;
  std::vector<std::string> preopt{"skip"};
  std::size_t outer_iters = 10;
  std::size_t fine_tune_iters = 5;
  PreoptOptions preopt_options;
  // evaluation
  std::vector<std::optional<double>> delta{std::nullopt};
  std::size_t shots = 0;
  // replication
  std::vector<std::uint64_t> seeds{1};
  // execution and output
  std::size_t workers = 0;
  std::size_t gradient_workers = 1;
  std::string out_dir = "results";
  double tolerance = 0.01;
};

namespace detail {

template <typename T>
std::vector<T> one_or_many(const json& v) {
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

inline std::vector<std::optional<double>> deltas_from(const json& v) {
  std::vector<std::optional<double>> out;
  auto one = [](const json& x) -> std::optional<double> {
    if (x.is_null() || (x.is_string() && x.get<std::string>() == "exact")) return std::nullopt;
    return x.get<double>();
  };
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(one(x));
  } else {
    out.push_back(one(v));
  }
  return out;
}

inline void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, _] : obj.items()) {
    if (!known.count(k)) throw ConfigError("unknown key '" + where + "." + k + "'");
  }
}

}  // namespace detail

inline json to_json(const ExperimentConfig& c) {
  json delta = json::array();
  for (const auto& d : c.delta) delta.push_back(d ? json(*d) : json(nullptr));
  return {
      {"problem",
       {{"kind", c.kind}, {"graph_file", c.graph_file}, {"n", c.n}, {"instances", c.instances},
        {"instance_seed", c.instance_seed}, {"generator", std::string(kInstanceGenerator)},
        {"tfim_graph", c.tfim_graph}, {"w", c.w}, {"couplings_file", c.couplings_file},
        {"gx", c.gx}, {"gz", c.gz}}},
      {"engine",
       {{"pool", c.pool}, {"select", c.select}, {"gamma0", c.gamma0}, {"threshold", c.threshold},
        {"max_iters", c.max_iters}}},
      {"optimizer",
       {{"spsa_iters", c.spsa.iters}, {"spsa_a", c.spsa.a}, {"spsa_c", c.spsa.c},
        {"spsa_A", c.spsa.A}, {"spsa_alpha", c.spsa.alpha}, {"spsa_gamma", c.spsa.gamma},
        {"preopt", c.preopt}, {"outer_iters", c.outer_iters},
        {"fine_tune_iters", c.fine_tune_iters}, {"sa_t0", c.preopt_options.annealing.t0},
        {"sa_ratio", c.preopt_options.annealing.ratio}, {"colony", c.preopt_options.ants.colony},
        {"evaporation", c.preopt_options.ants.evaporation},
        {"de_population", c.preopt_options.de.population}, {"de_f", c.preopt_options.de.f},
        {"de_cr", c.preopt_options.de.cr}}},
      {"evaluation", {{"delta", delta}, {"shots", c.shots}}},
      {"replication", {{"seeds", c.seeds}}},
      {"execution", {{"workers", c.workers}, {"gradient_workers", c.gradient_workers}}},
      {"output", {{"dir", c.out_dir}, {"tolerance", c.tolerance}}},
  };
}

/// Reads a config document; absent keys keep their defaults, unknown keys
/// are rejected.
inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    detail::reject_unknown(j, {"problem", "engine", "optimizer", "evaluation", "replication",
                               "execution", "output"}, "config");
    if (j.contains("problem")) {
      const json& p = j["problem"];
      detail::reject_unknown(p, {"kind", "graph_file", "n", "instances", "instance_seed", "generator",
                                 "tfim_graph", "w", "couplings_file", "gx", "gz"}, "problem");
      c.kind = p.value("kind", c.kind);
      c.graph_file = p.value("graph_file", c.graph_file);
      c.n = p.value("n", c.n);
      c.instances = p.value("instances", c.instances);
      c.instance_seed = p.value("instance_seed", c.instance_seed);
      if (p.contains("generator") && p["generator"].get<std::string>() != kInstanceGenerator) {
        throw ConfigError("unsupported instance generator '" + p["generator"].get<std::string>() + "'");
      }
      c.tfim_graph = p.value("tfim_graph", c.tfim_graph);
      c.w = p.value("w", c.w);
      c.couplings_file = p.value("couplings_file", c.couplings_file);
      if (p.contains("gx")) c.gx = detail::one_or_many<double>(p["gx"]);
      if (p.contains("gz")) c.gz = detail::one_or_many<double>(p["gz"]);
    }
    if (j.contains("engine")) {
      const json& e = j["engine"];
      detail::reject_unknown(e, {"pool", "select", "gamma0", "threshold", "max_iters"}, "engine");
      c.pool = e.value("pool", c.pool);
      if (e.contains("select")) c.select = detail::one_or_many<std::string>(e["select"]);
      c.gamma0 = e.value("gamma0", c.gamma0);
      if (e.contains("threshold")) {
        c.threshold = e["threshold"].is_null() ? std::numeric_limits<double>::infinity()
                                               : e["threshold"].get<double>();
      }
      c.max_iters = e.value("max_iters", c.max_iters);
    }
    if (j.contains("optimizer")) {
      const json& o = j["optimizer"];
      detail::reject_unknown(o, {"spsa_iters", "spsa_a", "spsa_c", "spsa_A", "spsa_alpha",
                                 "spsa_gamma", "preopt", "outer_iters", "fine_tune_iters", "sa_t0",
                                 "sa_ratio", "colony", "evaporation", "de_population", "de_f",
                                 "de_cr"}, "optimizer");
      c.spsa.iters = o.value("spsa_iters", c.spsa.iters);
      c.spsa.a = o.value("spsa_a", c.spsa.a);
      c.spsa.c = o.value("spsa_c", c.spsa.c);
      c.spsa.A = o.value("spsa_A", c.spsa.A);
      c.spsa.alpha = o.value("spsa_alpha", c.spsa.alpha);
      c.spsa.gamma = o.value("spsa_gamma", c.spsa.gamma);
      if (o.contains("preopt")) c.preopt = detail::one_or_many<std::string>(o["preopt"]);
      c.outer_iters = o.value("outer_iters", c.outer_iters);
      c.fine_tune_iters = o.value("fine_tune_iters", c.fine_tune_iters);
      c.preopt_options.annealing.t0 = o.value("sa_t0", c.preopt_options.annealing.t0);
      c.preopt_options.annealing.ratio = o.value("sa_ratio", c.preopt_options.annealing.ratio);
      c.preopt_options.ants.colony = o.value("colony", c.preopt_options.ants.colony);
      c.preopt_options.ants.evaporation = o.value("evaporation", c.preopt_options.ants.evaporation);
      c.preopt_options.de.population = o.value("de_population", c.preopt_options.de.population);
      c.preopt_options.de.f = o.value("de_f", c.preopt_options.de.f);
      c.preopt_options.de.cr = o.value("de_cr", c.preopt_options.de.cr);
    }
    if (j.contains("evaluation")) {
      const json& e = j["evaluation"];
      detail::reject_unknown(e, {"delta", "shots"}, "evaluation");
      if (e.contains("delta")) c.delta = detail::deltas_from(e["delta"]);
      c.shots = e.value("shots", c.shots);
    }
    if (j.contains("replication")) {
      const json& r = j["replication"];
      detail::reject_unknown(r, {"seeds", "count", "seed_base"}, "replication");
      if (r.contains("seeds")) {
        c.seeds = detail::one_or_many<std::uint64_t>(r["seeds"]);
      } else if (r.contains("count")) {
        const std::uint64_t base = r.value("seed_base", std::uint64_t{1});
        c.seeds.clear();
        for (std::uint64_t s = 0; s < r["count"].get<std::uint64_t>(); ++s) c.seeds.push_back(base + s);
      }
    }
    if (j.contains("execution")) {
      const json& e = j["execution"];
      detail::reject_unknown(e, {"workers", "gradient_workers"}, "execution");
      c.workers = e.value("workers", c.workers);
      c.gradient_workers = e.value("gradient_workers", c.gradient_workers);
    }
    if (j.contains("output")) {
      const json& o = j["output"];
      detail::reject_unknown(o, {"dir", "tolerance"}, "output");
      c.out_dir = o.value("dir", c.out_dir);
      c.tolerance = o.value("tolerance", c.tolerance);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.kind != "maxcut" && c.kind != "tfim") throw ConfigError("problem.kind must be maxcut or tfim");
  if (c.select.empty() || c.preopt.empty() || c.delta.empty() || c.seeds.empty() || c.gx.empty() ||
      c.gz.empty()) {
    throw ConfigError("list-valued config keys must be non-empty");
  }
  for (const auto& s : c.select) {
    if (s != "exact" && s != "clifford" && s != "random") {
      throw ConfigError("engine.select must be exact, clifford or random");
    }
  }
  for (const auto& p : c.preopt) preopt_method_from_string(p);
  pool_tag_from_string(c.pool);
  for (const auto& d : c.delta) {
    if (d && !(*d >= 0.0 && *d < 1.0)) throw ConfigError("evaluation.delta must lie in [0, 1)");
  }
  if (c.spsa.iters < 1) throw ConfigError("optimizer.spsa_iters must be at least 1");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  try {
    return config_from_json(json::parse(detail::read_file(path), nullptr, true, true));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Problem instances

/// One concrete Hamiltonian with the data needed to rebuild it.
struct ProblemInstance {
  std::string kind = "maxcut";
  MaxCutInstance graph;
  TfimInstance tfim;

  std::size_t num_qubits() const { return kind == "maxcut" ? graph.num_vertices() : tfim.n; }
  PauliSum hamiltonian() const {
    return kind == "maxcut" ? maxcut_hamiltonian(graph) : tfim_hamiltonian(tfim);
  }
};

inline json to_json(const ProblemInstance& p) {
  if (p.kind == "maxcut") {
    json edges = json::array();
    for (const auto& e : p.graph.edges()) edges.push_back({e.i, e.j, e.w});
    return {{"kind", "maxcut"}, {"n", p.graph.num_vertices()}, {"edges", edges}};
  }
  return {{"kind", "tfim"}, {"n", p.tfim.n}, {"couplings", p.tfim.w}, {"gx", p.tfim.gx}, {"gz", p.tfim.gz}};
}

inline ProblemInstance instance_from_json(const json& j) {
  ProblemInstance p;
  p.kind = j.at("kind").get<std::string>();
  if (p.kind == "maxcut") {
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      edges.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(), e.at(2).get<double>()});
    }
    p.graph = MaxCutInstance(j.at("n").get<std::size_t>(), std::move(edges));
  } else if (p.kind == "tfim") {
    p.tfim = {j.at("n").get<std::size_t>(), j.at("couplings").get<std::vector<std::vector<double>>>(),
              j.at("gx").get<double>(), j.at("gz").get<double>()};
    p.tfim.validate();
  } else {
    throw ConfigError("instance kind must be maxcut or tfim");
  }
  return p;
}

/// Instances spanned by the problem block, in cell order.
inline std::vector<ProblemInstance> make_instances(const ExperimentConfig& c) {
  std::vector<ProblemInstance> out;
  if (c.kind == "maxcut") {
    if (!c.graph_file.empty()) {
      out.push_back({"maxcut", load_graph(c.graph_file), {}});
      return out;
    }
    for (std::size_t i = 0; i < c.instances; ++i) {
      Rng rng = make_rng(c.instance_seed, SeedLane::Instance, i);
      out.push_back({"maxcut", random_maxcut(c.n, rng), {}});
    }
    return out;
  }
  auto add = [&](const TfimInstance& base) {
    for (double gx : c.gx) {
      for (double gz : c.gz) {
        TfimInstance t = base;
        t.gx = gx;
        t.gz = gz;
        t.validate();
        out.push_back({"tfim", {}, std::move(t)});
      }
    }
  };
  if (c.tfim_graph == "chain") {
    add(ising_chain(c.n, c.w, 0.0, 0.0));
  } else if (c.tfim_graph == "random") {
    for (std::size_t i = 0; i < c.instances; ++i) {
      Rng rng = make_rng(c.instance_seed, SeedLane::Instance, i);
      add(tfim_from_graph(random_maxcut(c.n, rng), 0.0, 0.0));
    }
  } else if (c.tfim_graph == "file") {
    if (c.couplings_file.empty()) throw ConfigError("tfim_graph=file needs problem.couplings_file");
    const auto w = load_couplings(c.couplings_file);
    add({w.size(), w, 0.0, 0.0});
  } else {
    throw ConfigError("problem.tfim_graph must be chain, random or file");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Variants and cells

struct Variant {
  std::string select = "exact";
  std::string preopt = "skip";
  std::optional<double> delta;

  std::string name() const {
    return "select=" + select + ",preopt=" + preopt +
           ",delta=" + (delta ? detail::format_double(*delta) : std::string("exact"));
  }
  /// File-name friendly form of name().
  std::string slug() const {
    std::string s = select + "_" + preopt + "_" + (delta ? "d" + detail::format_double(*delta) : "exact");
    for (auto& ch : s) {
      if (ch == '.' || ch == '-' || ch == '+') ch = 'p';
    }
    return s;
  }
};

inline std::vector<Variant> make_variants(const ExperimentConfig& c) {
  std::vector<Variant> v;
  for (const auto& s : c.select) {
    for (const auto& p : c.preopt) {
      for (const auto& d : c.delta) v.push_back({s, p, d});
    }
  }
  return v;
}

inline AdaptConfig adapt_config_for(const ExperimentConfig& c, const Variant& v) {
  AdaptConfig a;
  a.pool = pool_tag_from_string(c.pool);
  a.selection = v.select == "random" ? SelectionStrategy::Random : SelectionStrategy::MaxAbs;
  a.gradient = v.select == "clifford" ? GradientBackend::Clifford : GradientBackend::Exact;
  a.gamma0 = c.gamma0;
  a.threshold = c.threshold;
  a.max_iters = c.max_iters;
  a.spsa = c.spsa;
  a.preopt = preopt_method_from_string(v.preopt);
  a.preopt_budget = {c.outer_iters, c.fine_tune_iters, c.spsa.iters};
  a.preopt_options = c.preopt_options;
  a.evaluation = {v.delta, c.shots};
  a.workers = c.gradient_workers;
  return a;
}

/// Everything needed to re-execute one run.
struct Cell {
  std::size_t index = 0;
  std::size_t instance_index = 0;
  ProblemInstance instance;
  Variant variant;
  std::uint64_t seed = 0;
};

inline std::vector<Cell> make_cells(const ExperimentConfig& c) {
  const auto instances = make_instances(c);
  const auto variants = make_variants(c);
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (const auto& v : variants) {
      for (auto s : c.seeds) cells.push_back({cells.size(), i, instances[i], v, s});
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Run records

struct IterationRow {
  std::size_t k = 0;
  IterationRecord rec;
  std::optional<double> energy_exact;
};

struct RunRecord {
  json config;  // fully resolved experiment config
  std::size_t cell = 0;
  std::size_t instance_index = 0;
  ProblemInstance instance;
  Variant variant;
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::string error;
  std::string stop;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  std::optional<double> final_energy_exact;
  std::optional<double> ground_energy;
  std::optional<double> approximation_ratio;
  std::optional<double> relative_error;
  std::vector<IterationRow> iterations;
  std::vector<double> final_params;
  std::vector<double> preopt_point;
  CounterSnapshot counters;
  CounterSnapshot selection_counters;
  double wall_ms = 0.0;

  std::vector<std::string> families() const {
    std::vector<std::string> f;
    for (const auto& r : iterations) f.push_back(r.rec.family);
    return f;
  }
};

namespace detail {

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
inline std::optional<double> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}
inline json counters_json(const CounterSnapshot& c) {
  return {{"statevector_runs", c.statevector_runs}, {"stabilizer_runs", c.stabilizer_runs},
          {"lowrank_evolutions", c.lowrank_evolutions}};
}
inline CounterSnapshot counters_from(const json& j) {
  return {j.at("statevector_runs").get<std::uint64_t>(), j.at("stabilizer_runs").get<std::uint64_t>(),
          j.at("lowrank_evolutions").get<std::uint64_t>()};
}

}  // namespace detail

inline json to_json(const RunRecord& r) {
  json its = json::array();
  for (const auto& row : r.iterations) {
    its.push_back({{"k", row.k}, {"selected", row.rec.selected}, {"operator", row.rec.op},
                   {"family", row.rec.family}, {"gradient_norm", row.rec.gradient_norm},
                   {"gradient", row.rec.gradient}, {"energy", row.rec.energy},
                   {"energy_exact", detail::opt_json(row.energy_exact)},
                   {"params", row.rec.params}, {"wall_ms", row.rec.wall_ms}});
  }
  return {{"config", r.config},
          {"cell", r.cell},
          {"instance_index", r.instance_index},
          {"instance", to_json(r.instance)},
          {"variant", {{"name", r.variant.name()}, {"select", r.variant.select},
                       {"preopt", r.variant.preopt}, {"delta", detail::opt_json(r.variant.delta)}}},
          {"seed", r.seed},
          {"status", r.status},
          {"error", r.error},
          {"stop", r.stop},
          {"initial_energy", r.initial_energy},
          {"final_energy", r.final_energy},
          {"final_energy_exact", detail::opt_json(r.final_energy_exact)},
          {"ground_energy", detail::opt_json(r.ground_energy)},
          {"approximation_ratio", detail::opt_json(r.approximation_ratio)},
          {"relative_error", detail::opt_json(r.relative_error)},
          {"iterations", its},
          {"final_params", r.final_params},
          {"preopt_point", r.preopt_point},
          {"counters", detail::counters_json(r.counters)},
          {"selection_counters", detail::counters_json(r.selection_counters)},
          {"wall_ms", r.wall_ms}};
}

inline RunRecord record_from_json(const json& j) {
  RunRecord r;
  try {
    r.config = j.at("config");
    r.cell = j.at("cell").get<std::size_t>();
    r.instance_index = j.at("instance_index").get<std::size_t>();
    r.instance = instance_from_json(j.at("instance"));
    const json& v = j.at("variant");
    r.variant = {v.at("select").get<std::string>(), v.at("preopt").get<std::string>(),
                 detail::opt_from(v, "delta")};
    r.seed = j.at("seed").get<std::uint64_t>();
    r.status = j.at("status").get<std::string>();
    r.error = j.value("error", "");
    r.stop = j.value("stop", "");
    r.initial_energy = j.at("initial_energy").get<double>();
    r.final_energy = j.at("final_energy").get<double>();
    r.final_energy_exact = detail::opt_from(j, "final_energy_exact");
    r.ground_energy = detail::opt_from(j, "ground_energy");
    r.approximation_ratio = detail::opt_from(j, "approximation_ratio");
    r.relative_error = detail::opt_from(j, "relative_error");
    for (const auto& it : j.at("iterations")) {
      IterationRow row;
      row.k = it.at("k").get<std::size_t>();
      row.rec.selected = it.at("selected").get<std::size_t>();
      row.rec.op = it.at("operator").get<std::string>();
      row.rec.family = it.at("family").get<std::string>();
      row.rec.gradient_norm = it.at("gradient_norm").get<double>();
      row.rec.gradient = it.at("gradient").get<std::vector<double>>();
      row.rec.energy = it.at("energy").get<double>();
      row.energy_exact = detail::opt_from(it, "energy_exact");
      row.rec.params = it.at("params").get<std::vector<double>>();
      row.rec.wall_ms = it.value("wall_ms", 0.0);
      r.iterations.push_back(std::move(row));
    }
    r.final_params = j.at("final_params").get<std::vector<double>>();
    r.preopt_point = j.value("preopt_point", std::vector<double>{});
    r.counters = detail::counters_from(j.at("counters"));
    r.selection_counters = detail::counters_from(j.at("selection_counters"));
    r.wall_ms = j.value("wall_ms", 0.0);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run record: ") + e.what());
  }
  return r;
}

inline std::vector<RunRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::vector<RunRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Execution

/// Exact reference energy: optimal cut for MaxCut, lowest eigenvalue for TFIM.
inline std::optional<double> oracle_energy(const ProblemInstance& p) {
  if (p.kind == "maxcut") {
    if (p.graph.num_vertices() > kBruteForceCap) return std::nullopt;
    return brute_force_maxcut(p.graph).cost;
  }
  if (p.tfim.n > kGroundStateCap) return std::nullopt;
  return ground_energy(tfim_hamiltonian(p.tfim)).energy;
}

/// Runs one cell. Failures are captured in the record, not thrown.
inline RunRecord execute_cell(const Cell& cell, const ExperimentConfig& cfg,
                              const std::optional<double>& oracle) {
  RunRecord r;
  r.config = to_json(cfg);
  r.cell = cell.index;
  r.instance_index = cell.instance_index;
  r.instance = cell.instance;
  r.variant = cell.variant;
  r.seed = cell.seed;
  r.ground_energy = oracle;
  const auto t0 = std::chrono::steady_clock::now();
  const PauliSum h = cell.instance.hamiltonian();
  AdaptResult res;
  try {
    res = adapt_run(h, adapt_config_for(cfg, cell.variant), cell.seed);
  } catch (const AdaptFailure& f) {
    res = f.partial();
    r.status = "error";
    r.error = f.what();
  } catch (const std::exception& e) {
    r.status = "error";
    r.error = e.what();
  }
  r.stop = std::string(to_string(res.stop));
  r.initial_energy = res.initial_energy;
  r.final_energy = res.final_energy;
  r.final_params = res.state.ansatz.flat_params();
  r.preopt_point = res.preopt_point;
  r.counters = res.counters;
  r.selection_counters = res.selection_counters;
  const bool dense_ok = h.num_qubits() <= kStateVectorCap && h.num_qubits() > 0;
  if (r.status == "ok" || !res.state.history.empty()) {
    for (std::size_t k = 0; k < res.state.history.size(); ++k) {
      const auto& rec = res.state.history[k];
      IterationRow row{k + 1, rec, std::nullopt};
      if (dense_ok) {
        // Ansatz truncated to k+1 layers with that iteration's parameters.
        std::vector<PauliSum> mixers(res.state.ansatz.mixers().begin(),
                                     res.state.ansatz.mixers().begin() + static_cast<long>(k + 1));
        std::vector<LayerParams> params;
        for (std::size_t m = 0; m <= k; ++m) params.push_back({rec.params[2 * m], rec.params[2 * m + 1]});
        row.energy_exact = expectation(run(build_circuit(Ansatz(h, mixers, params))), h);
      }
      r.iterations.push_back(std::move(row));
    }
  }
  if (dense_ok && r.status == "ok") {
    r.final_energy_exact = r.iterations.empty() ? r.initial_energy : *r.iterations.back().energy_exact;
  }
  if (oracle && r.final_energy_exact) {
    const double e = *r.final_energy_exact;
    if (cell.instance.kind == "maxcut" && *oracle != 0.0) r.approximation_ratio = e / *oracle;
    if (*oracle != 0.0) r.relative_error = std::abs(e - *oracle) / std::abs(*oracle);
  }
  r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

namespace detail {

inline std::string csv_number(double v) { return format_double(v); }
inline std::string csv_number(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

/// Per-iteration metrics of one variant. No timing columns, so reruns of the
/// same config produce identical files.
inline std::string metrics_csv(const std::vector<RunRecord>& records) {
  std::string out =
      "cell,instance,seed,iteration,selected,operator,family,gradient_norm,energy,energy_exact\n";
  for (const auto& r : records) {
    const std::string head = std::to_string(r.cell) + "," + std::to_string(r.instance_index) + "," +
                             std::to_string(r.seed) + ",";
    out += head + "0,,,,," + detail::csv_number(r.initial_energy) + "," +
           detail::csv_number(r.initial_energy) + "\n";
    for (const auto& row : r.iterations) {
      out += head + std::to_string(row.k) + "," + std::to_string(row.rec.selected) + "," +
             detail::csv_quote(row.rec.op) + "," + row.rec.family + "," +
             detail::csv_number(row.rec.gradient_norm) + "," + detail::csv_number(row.rec.energy) +
             "," + detail::csv_number(row.energy_exact) + "\n";
    }
  }
  return out;
}

struct ExperimentOutput {
  std::vector<RunRecord> records;
  std::string records_path;
  std::vector<std::string> csv_paths;
};

/**
 * Executes every (instance x variant x seed) cell on a bounded worker pool.
 * Records are appended to <out_dir>/records.jsonl in cell order by a single
 * writer; one metrics CSV per variant is written at the end. An empty
 * out_dir disables file output.
 */
inline ExperimentOutput run_experiment(const ExperimentConfig& cfg,
                                       const std::function<void(const RunRecord&)>& on_record = {}) {
  const std::vector<Cell> cells = make_cells(cfg);
  std::vector<std::optional<double>> oracles;
  for (const auto& inst : make_instances(cfg)) oracles.push_back(oracle_energy(inst));

  ExperimentOutput out;
  std::ofstream jsonl;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    out.records_path = (std::filesystem::path(cfg.out_dir) / "records.jsonl").string();
    jsonl.open(out.records_path, std::ios::trunc);
    if (!jsonl) throw ConfigError("cannot write " + out.records_path);
  }
  std::vector<std::optional<RunRecord>> done(cells.size());
  std::size_t flushed = 0;
  std::mutex writer;
  parallel_for(cells.size(), cfg.workers, [&](std::size_t i) {
    RunRecord r = execute_cell(cells[i], cfg, oracles[cells[i].instance_index]);
    std::lock_guard lock(writer);
    done[i] = std::move(r);
    while (flushed < done.size() && done[flushed]) {
      if (jsonl.is_open()) jsonl << to_json(*done[flushed]).dump() << '\n' << std::flush;
      if (on_record) on_record(*done[flushed]);
      ++flushed;
    }
  });
  for (auto& r : done) out.records.push_back(std::move(*r));
  if (!cfg.out_dir.empty()) {
    for (const auto& v : make_variants(cfg)) {
      std::vector<RunRecord> mine;
      for (const auto& r : out.records) {
        if (r.variant.name() == v.name()) mine.push_back(r);
      }
      const auto path = (std::filesystem::path(cfg.out_dir) / ("metrics_" + v.slug() + ".csv")).string();
      std::ofstream f(path, std::ios::trunc);
      f << metrics_csv(mine);
      out.csv_paths.push_back(path);
    }
  }
  return out;
}

/// Re-executes a record from its embedded config, instance and seed.
inline RunRecord replay(const RunRecord& r) {
  const ExperimentConfig cfg = config_from_json(r.config);
  Cell cell{r.cell, r.instance_index, r.instance, r.variant, r.seed};
  return execute_cell(cell, cfg, oracle_energy(r.instance));
}

// ---------------------------------------------------------------------------
// Reports

struct Quartiles {
  double q1 = 0.0, median = 0.0, q3 = 0.0;
};

/// Linear-interpolation quantiles (type 7).
inline Quartiles quartiles(std::vector<double> v) {
  if (v.empty()) throw ContractError("quartiles: empty sample");
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return {q(0.25), q(0.5), q(0.75)};
}

inline double median(std::vector<double> v) { return quartiles(std::move(v)).median; }

struct Report {
  std::string traces_csv;
  std::string success_csv;
  std::string census_csv;
};

/**
 * Summaries per variant: median and IQR of the exact energy and relative
 * error per ADAPT iteration (runs that stopped early carry their last value
 * forward), success rate at a relative-error tolerance, and the census of
 * selected mixer families.
 */
inline Report report(const std::vector<RunRecord>& records, double tolerance = 0.01) {
  if (records.empty()) throw ContractError("report: no records");
  std::vector<std::string> order;
  std::map<std::string, std::vector<const RunRecord*>> by_variant;
  for (const auto& r : records) {
    const std::string v = r.variant.name();
    if (!by_variant.count(v)) order.push_back(v);
    by_variant[v].push_back(&r);
  }
  Report out;
  out.traces_csv =
      "variant,iteration,runs,energy_q1,energy_median,energy_q3,relerr_q1,relerr_median,relerr_q3\n";
  out.success_csv = "variant,runs,successes,success_rate,tolerance\n";
  out.census_csv = "variant,family,count,fraction\n";
  for (const auto& v : order) {
    const auto& rs = by_variant[v];
    std::size_t depth = 0;
    for (const auto* r : rs) depth = std::max(depth, r->iterations.size());
    for (std::size_t k = 0; k <= depth; ++k) {
      std::vector<double> es, rel;
      for (const auto* r : rs) {
        std::optional<double> e = r->initial_energy;
        for (const auto& row : r->iterations) {
          if (row.k <= k) e = row.energy_exact ? row.energy_exact : std::optional<double>(row.rec.energy);
        }
        es.push_back(*e);
        if (r->ground_energy && *r->ground_energy != 0.0) {
          rel.push_back(std::abs(*e - *r->ground_energy) / std::abs(*r->ground_energy));
        }
      }
      const Quartiles qe = quartiles(es);
      out.traces_csv += detail::csv_quote(v) + "," + std::to_string(k) + "," + std::to_string(es.size()) +
                        "," + detail::csv_number(qe.q1) + "," + detail::csv_number(qe.median) + "," +
                        detail::csv_number(qe.q3) + ",";
      if (rel.empty()) {
        out.traces_csv += ",,\n";
      } else {
        const Quartiles qr = quartiles(rel);
        out.traces_csv += detail::csv_number(qr.q1) + "," + detail::csv_number(qr.median) + "," +
                          detail::csv_number(qr.q3) + "\n";
      }
    }
    std::size_t wins = 0;
    for (const auto* r : rs) {
      if (r->relative_error && *r->relative_error <= tolerance) ++wins;
    }
    out.success_csv += detail::csv_quote(v) + "," + std::to_string(rs.size()) + "," + std::to_string(wins) +
                       "," + detail::csv_number(static_cast<double>(wins) / static_cast<double>(rs.size())) +
                       "," + detail::csv_number(tolerance) + "\n";
    std::vector<std::vector<std::string>> fams;
    for (const auto* r : rs) fams.push_back(r->families());
    const Census c = gate_selection_census(fams);
    std::size_t total = 0;
    for (const auto& [_, n] : c) total += n;
    for (const auto& f : census_families()) {
      const std::size_t n = c.at(f);
      out.census_csv += detail::csv_quote(v) + "," + f + "," + std::to_string(n) + "," +
                        detail::csv_number(total ? static_cast<double>(n) / static_cast<double>(total) : 0.0) +
                        "\n";
    }
  }
  return out;
}

}  // namespace cliffadapt
