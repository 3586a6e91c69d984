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


#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>

#include "cliffadapt/cliffadapt.hpp"

namespace {

using namespace cliffadapt;
namespace fs = std::filesystem;

const std::string kSamples = CLIFFADAPT_SAMPLES_DIR;

fs::path scratch(const std::string& name) {
  fs::path p = fs::path(::testing::TempDir()) / ("cliffadapt_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CLIFFADAPT_CLI + "\" " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

// Small TFIM sweep: 3 x 3 field grid, 2 seeds, exact and clifford selection.
ExperimentConfig small_sweep(const fs::path& out) {
  ExperimentConfig c;
  c.kind = "tfim";
  c.n = 3;
  c.gx = {0.0, 0.5, 1.0};
  c.gz = {0.0, 0.5, 1.0};
  c.select = {"exact", "clifford"};
  c.seeds = {1, 2};
  c.max_iters = 2;
  c.spsa.iters = 30;
  c.workers = 2;
  c.out_dir = out.string();
  return c;
}

TEST(Config, DefaultsRoundTrip) {
  const ExperimentConfig d;
  const json j = to_json(d);
  EXPECT_EQ(to_json(config_from_json(j)), j);
  EXPECT_EQ(to_json(config_from_json(json::object())), j);
}

TEST(Config, NonDefaultRoundTrip) {
  ExperimentConfig c;
  c.kind = "tfim";
  c.gx = {0.1, 0.7};
  c.select = {"clifford", "random"};
  c.preopt = {"hill_climb", "ant_colony"};
  c.delta = {std::nullopt, 0.1, 0.3};
  c.threshold = std::numeric_limits<double>::infinity();
  c.seeds = {4, 9};
  c.spsa.a = 0.123456789012345;
  const json j = to_json(c);
  const ExperimentConfig back = config_from_json(json::parse(j.dump()));
  EXPECT_EQ(to_json(back), j);
  EXPECT_TRUE(std::isinf(back.threshold));
  ASSERT_EQ(back.delta.size(), 3u);
  EXPECT_FALSE(back.delta[0].has_value());
  EXPECT_EQ(*back.delta[1], 0.1);
  EXPECT_EQ(back.spsa.a, c.spsa.a);
}

TEST(Config, RejectsUnknownAndInvalid) {
  EXPECT_THROW(config_from_json(json{{"problems", json::object()}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"engine", {{"pools", "multi"}}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"engine", {{"select", "best"}}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"engine", {{"pool", "double"}}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"optimizer", {{"preopt", "tabu"}}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"evaluation", {{"delta", 1.5}}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"problem", {{"kind", "sat"}}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"problem", {{"n", "five"}}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"problem", {{"generator", "other"}}}}), ConfigError);
}

TEST(Config, ScalarsPromoteToLists) {
  const auto c = config_from_json(json{{"engine", {{"select", "clifford"}}},
                                       {"evaluation", {{"delta", "exact"}}},
                                       {"replication", {{"count", 3}, {"seed_base", 10}}}});
  EXPECT_EQ(c.select, std::vector<std::string>{"clifford"});
  ASSERT_EQ(c.delta.size(), 1u);
  EXPECT_FALSE(c.delta[0]);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{10, 11, 12}));
}

TEST(Config, SampleFilesLoad) {
  const auto t = load_config(kSamples + "/tfim_sweep.json");
  EXPECT_EQ(t.kind, "tfim");
  EXPECT_EQ(make_cells(t).size(), 3u * 3u * 2u * 2u);
  const auto m = load_config(kSamples + "/maxcut_random.json");
  EXPECT_EQ(make_cells(m).size(), 4u * 2u * 5u);
  const auto g = load_graph(kSamples + "/pentagon.txt");
  EXPECT_EQ(g.num_vertices(), 5u);
  EXPECT_EQ(g.edges().size(), 6u);
  EXPECT_EQ(load_couplings(kSamples + "/chain4_couplings.txt").size(), 4u);
}

TEST(Instances, DeterministicAndCounted) {
  ExperimentConfig c;
  c.n = 6;
  c.instances = 3;
  c.instance_seed = 5;
  const auto a = make_instances(c);
  const auto b = make_instances(c);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(to_json(a[i]), to_json(b[i]));
    EXPECT_EQ(to_json(instance_from_json(to_json(a[i]))), to_json(a[i]));
  }
  EXPECT_NE(to_json(a[0]), to_json(a[1]));
}

TEST(Instances, TfimGridAndFile) {
  ExperimentConfig c;
  c.kind = "tfim";
  c.n = 4;
  c.gx = {0.0, 1.0};
  c.gz = {0.5};
  const auto grid = make_instances(c);
  ASSERT_EQ(grid.size(), 2u);
  EXPECT_EQ(grid[1].tfim.gx, 1.0);
  EXPECT_EQ(grid[1].tfim.gz, 0.5);
  c.tfim_graph = "file";
  c.couplings_file = kSamples + "/chain4_couplings.txt";
  const auto file = make_instances(c);
  EXPECT_TRUE(file[0].hamiltonian() == grid[0].hamiltonian());
}

TEST(Variants, CrossProductAndNames) {
  ExperimentConfig c;
  c.select = {"exact", "clifford"};
  c.preopt = {"skip", "hill_climb"};
  c.delta = {std::nullopt, 0.1};
  const auto v = make_variants(c);
  ASSERT_EQ(v.size(), 8u);
  std::set<std::string> names, slugs;
  for (const auto& x : v) {
    names.insert(x.name());
    slugs.insert(x.slug());
    EXPECT_EQ(x.slug().find_first_of("/ ,"), std::string::npos);
  }
  EXPECT_EQ(names.size(), 8u);
  EXPECT_EQ(slugs.size(), 8u);
}

TEST(Quartiles, Examples) {
  const Quartiles q = quartiles({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(q.q1, 1.75);
  EXPECT_DOUBLE_EQ(q.median, 2.5);
  EXPECT_DOUBLE_EQ(q.q3, 3.25);
  EXPECT_DOUBLE_EQ(median({5.0}), 5.0);
  EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_THROW(quartiles({}), ContractError);
}

class SweepTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(scratch("sweep_a"));
    out_ = new ExperimentOutput(run_experiment(small_sweep(*dir_)));
  }
  static void TearDownTestSuite() {
    delete out_;
    delete dir_;
  }
  static fs::path* dir_;
  static ExperimentOutput* out_;
};
fs::path* SweepTest::dir_ = nullptr;
ExperimentOutput* SweepTest::out_ = nullptr;

TEST_F(SweepTest, ProducesEveryCell) {
  ASSERT_EQ(out_->records.size(), 36u);
  const auto read = read_records(out_->records_path);
  ASSERT_EQ(read.size(), 36u);
  for (std::size_t i = 0; i < read.size(); ++i) {
    EXPECT_EQ(read[i].cell, i);
    EXPECT_EQ(read[i].status, "ok") << read[i].error;
    EXPECT_EQ(to_json(read[i]), to_json(out_->records[i]));
    ASSERT_TRUE(read[i].relative_error.has_value());
    EXPECT_GE(*read[i].relative_error, 0.0);
    EXPECT_FALSE(read[i].approximation_ratio.has_value());
  }
  EXPECT_EQ(out_->csv_paths.size(), 2u);
}

TEST_F(SweepTest, RerunGivesIdenticalMetrics) {
  const fs::path other = scratch("sweep_b");
  ExperimentConfig c = small_sweep(other);
  c.workers = 1;
  const auto again = run_experiment(c);
  ASSERT_EQ(again.csv_paths.size(), out_->csv_paths.size());
  for (std::size_t k = 0; k < again.csv_paths.size(); ++k) {
    EXPECT_EQ(fs::path(again.csv_paths[k]).filename(), fs::path(out_->csv_paths[k]).filename());
    const std::string a = slurp(out_->csv_paths[k]);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(again.csv_paths[k]));
  }
}

TEST_F(SweepTest, ReplayReproducesFinalEnergy) {
  for (const auto& r : read_records(out_->records_path)) {
    const RunRecord again = replay(r);
    EXPECT_EQ(again.status, r.status);
    EXPECT_NEAR(again.final_energy, r.final_energy, 1e-12);
    EXPECT_EQ(again.families(), r.families());
  }
}

TEST_F(SweepTest, ExactEnergiesMatchDenseRebuild) {
  for (const auto& r : out_->records) {
    const PauliSum h = r.instance.hamiltonian();
    for (const auto& row : r.iterations) {
      ASSERT_TRUE(row.energy_exact.has_value());
      // Exact selection evaluates with the statevector, so the two agree.
      if (r.variant.select == "exact" && !r.variant.delta) EXPECT_NEAR(*row.energy_exact, row.rec.energy, 1e-9);
    }
    EXPECT_GE(*r.final_energy_exact, *r.ground_energy - 1e-9);
  }
}

TEST_F(SweepTest, ReportSummaries) {
  const Report rep = report(out_->records, std::numeric_limits<double>::infinity());
  std::istringstream s(rep.success_csv);
  std::string line;
  std::getline(s, line);
  std::size_t rows = 0;
  while (std::getline(s, line)) {
    ++rows;
    EXPECT_NE(line.find(",18,18,1,"), std::string::npos) << line;
  }
  EXPECT_EQ(rows, 2u);

  // Census rows equal the census computed directly.
  std::vector<std::vector<std::string>> fams;
  for (const auto& r : out_->records) {
    if (r.variant.select == "exact") fams.push_back(r.families());
  }
  const Census c = gate_selection_census(fams);
  for (const auto& [family, count] : c) {
    const std::string needle = "\n" + detail::csv_quote(Variant{"exact", "skip", std::nullopt}.name()) + "," + family + "," +
                               std::to_string(count) + ",";
    EXPECT_NE(rep.census_csv.find(needle), std::string::npos) << family;
  }
}

TEST(Report, SingleRecordTraceIsItself) {
  RunRecord r;
  r.variant = {"exact", "skip", std::nullopt};
  r.initial_energy = -1.0;
  r.ground_energy = -4.0;
  r.relative_error = 0.25;
  IterationRow a{1, {}, -2.0};
  a.rec.family = "PauliWord";
  IterationRow b{2, {}, -3.0};
  b.rec.family = "PoolSum";
  r.iterations = {a, b};
  const Report rep = report({r}, 0.3);
  const std::string name = detail::csv_quote(r.variant.name());
  EXPECT_NE(rep.traces_csv.find(name + ",0,1,-1,-1,-1,0.75,0.75,0.75\n"), std::string::npos) << rep.traces_csv;
  EXPECT_NE(rep.traces_csv.find(name + ",1,1,-2,-2,-2,0.5,0.5,0.5\n"), std::string::npos);
  EXPECT_NE(rep.traces_csv.find(name + ",2,1,-3,-3,-3,0.25,0.25,0.25\n"), std::string::npos);
  EXPECT_NE(rep.success_csv.find(name + ",1,1,1,"), std::string::npos) << rep.success_csv;
  EXPECT_NE(report({r}, 0.2).success_csv.find(name + ",1,0,0,"), std::string::npos);
  EXPECT_THROW(report({}), ContractError);
}

TEST(Report, EarlyStopCarriesForward) {
  RunRecord a, b;
  a.variant = b.variant = {"exact", "skip", std::nullopt};
  a.initial_energy = b.initial_energy = 0.0;
  a.iterations = {IterationRow{1, {}, -1.0}};
  b.iterations = {IterationRow{1, {}, -2.0}, IterationRow{2, {}, -4.0}};
  const Report rep = report({a, b});
  // Iteration 2: a keeps -1, b is at -4; the median is -2.5.
  EXPECT_NE(rep.traces_csv.find(detail::csv_quote(a.variant.name()) + ",2,2,-3.25,-2.5,-1.75,"), std::string::npos)
      << rep.traces_csv;
}

TEST(Cli, ExitCodes) {
  const fs::path out = scratch("cli");
  fs::create_directories(out);
  EXPECT_EQ(cli("defaults"), 0);
  EXPECT_EQ(cli("oracle \"" + kSamples + "/pentagon.txt\""), 0);
  EXPECT_NE(cli("frobnicate"), 0);
  EXPECT_NE(cli("solve maxcut /nonexistent/graph.txt"), 0);
  EXPECT_EQ(cli("solve maxcut \"" + kSamples + "/pentagon.txt\" --select bogus --out \"" + out.string() + "\""), 2);

  const fs::path bad = out / "bad.json";
  std::ofstream(bad) << R"({"engine": {"unknown_key": 1}})";
  EXPECT_EQ(cli("sweep \"" + bad.string() + "\""), 2);

  const fs::path run = out / "run";
  EXPECT_EQ(cli("solve maxcut \"" + kSamples + "/pentagon.txt\" --max-iters 2 --spsa-iters 40 --seeds 2 --out \"" +
                run.string() + "\""),
            0);
  EXPECT_TRUE(fs::exists(run / "records.jsonl"));
  EXPECT_TRUE(fs::exists(run / "success.csv"));
  EXPECT_EQ(read_records((run / "records.jsonl").string()).size(), 2u);
  EXPECT_EQ(cli("replay \"" + (run / "records.jsonl").string() + "\""), 0);
  EXPECT_EQ(cli("report \"" + (run / "records.jsonl").string() + "\" --out \"" + (out / "rep").string() + "\""), 0);
  EXPECT_TRUE(fs::exists(out / "rep" / "census.csv"));
}

TEST(Cli, ReplayDetectsTampering) {
  const fs::path out = scratch("cli_tamper");
  ASSERT_EQ(cli("solve tfim --n 3 --gx 1.0 --max-iters 1 --spsa-iters 20 --out \"" + out.string() + "\""), 0);
  auto recs = read_records((out / "records.jsonl").string());
  ASSERT_EQ(recs.size(), 1u);
  recs[0].final_energy += 1e-6;
  const fs::path tampered = out / "tampered.jsonl";
  std::ofstream(tampered) << to_json(recs[0]).dump() << "\n";
  EXPECT_EQ(cli("replay \"" + tampered.string() + "\""), 1);
}

}  // namespace
