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

#include <boost/math/distributions/chi_squared.hpp>
#include <map>
#include <numbers>

#include "cliffadapt/lowrank.hpp"
#include "cliffadapt/statevector.hpp"
#include "test_support.hpp"

using namespace cliffadapt;
using testing_support::circuit_state;
using testing_support::to_eigen;

namespace {

constexpr double kPi = std::numbers::pi;

BranchSum with_amplitudes(std::size_t n, const std::vector<double>& amps) {
  BranchSum bs(StabilizerState::zero(n, PhaseTracking::On));
  auto& br = bs.branches();
  br.clear();
  for (std::size_t k = 0; k < amps.size(); ++k) {
    PauliString w(n);
    for (std::size_t q = 0; q < n; ++q) {
      if ((k >> q) & 1u) w.set(q, Pauli::X);
    }
    br.push_back({amps[k], w});
  }
  return bs;
}

Circuit rz_on_plus(double theta) {
  Circuit c(1);
  c.append(Gate::h(0)).append(Gate::rz(0, theta));
  return c;
}

double l1(const PauliSum& h) {
  double s = 0.0;
  for (const auto& t : h) s += std::abs(t.coeff);
  return s;
}

}  // namespace

TEST(Evolve, SingleRotationExample) {
  const BranchSum bs = evolve(rz_on_plus(0.3), 0.0);
  ASSERT_EQ(bs.size(), 2u);
  EXPECT_NEAR(std::abs(bs.branches()[0].amp), std::cos(0.15), 1e-15);
  EXPECT_NEAR(std::abs(bs.branches()[1].amp), std::sin(0.15), 1e-15);
  EXPECT_NEAR(expectation(bs, PauliSum::parse("X")), std::cos(0.3), 1e-12);
  EXPECT_NEAR(expectation(run(rz_on_plus(0.3)), PauliSum::parse("X")), std::cos(0.3), 1e-12);
}

TEST(Evolve, CliffordCircuitIsOneExactBranch) {
  Rng rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 5);
    const Circuit c = testing_support::random_clifford_circuit(n, 30, rng);
    for (double delta : {0.0, 0.3, 0.9}) {
      const BranchSum bs = evolve(c, delta);
      ASSERT_EQ(bs.size(), 1u);
      EXPECT_LT((to_eigen(to_statevector(bs)) - circuit_state(c)).norm(), 1e-10);
    }
  }
}

TEST(Evolve, ZeroDeltaKeepsAllBranchesAndIsExact) {
  Rng rng(52);
  for (std::size_t t = 0; t <= 12; ++t) {
    const std::size_t n = 2 + t % 4;
    const Circuit c = testing_support::random_ansatz_circuit(n, 10, t, rng);
    ASSERT_EQ(count_non_clifford(c), t);
    const BranchSum bs = evolve(c, 0.0);
    EXPECT_EQ(bs.size(), std::size_t{1} << t);
    EXPECT_EQ(bs.budget_spent(), 0.0);
    EXPECT_LT((to_eigen(to_statevector(bs)) - to_eigen(run(c))).norm(), 1e-10) << "t=" << t;
  }
}

TEST(Evolve, ZeroDeltaIsDeterministic) {
  Rng rng(53);
  const Circuit c = testing_support::random_ansatz_circuit(4, 20, 6, rng);
  const BranchSum a = evolve(c, 0.0), b = evolve(c, 0.0);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a.branches()[k].amp, b.branches()[k].amp);
    EXPECT_EQ(a.branches()[k].frame, b.branches()[k].frame);
  }
  const auto va = to_statevector(a).amplitudes(), vb = to_statevector(b).amplitudes();
  EXPECT_EQ(va, vb);
}

TEST(Evolve, RejectsBadDelta) {
  EXPECT_THROW(evolve(rz_on_plus(0.3), -0.1), ContractError);
  EXPECT_THROW(evolve(rz_on_plus(0.3), 1.0), ContractError);
  EXPECT_THROW(evolve(rz_on_plus(0.3), std::nan("")), ContractError);
}

TEST(Evolve, FidelityContract) {
  Rng rng(54);
  for (double delta : {0.05, 0.1, 0.2, 0.3}) {
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 1 + uniform_index(rng, 6);
      const std::size_t t = 1 + uniform_index(rng, 10);
      const Circuit c = testing_support::random_ansatz_circuit(n, 15, t, rng);
      const BranchSum bs = evolve(c, delta);
      EXPECT_LE(bs.budget_spent(), delta);
      const double err = (to_eigen(to_statevector(bs)) - to_eigen(run(c))).norm();
      ASSERT_LE(err, delta + 1e-9) << "delta=" << delta << " trial " << trial;
    }
  }
}

TEST(Evolve, MergedSumRepresentsSameState) {
  Rng rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 4);
    const Circuit c = testing_support::random_ansatz_circuit(n, 15, 1 + uniform_index(rng, 10), rng);
    const BranchSum bs = evolve(c, 0.0, {.merge = true});
    EXPECT_LE(bs.size(), std::size_t{1} << n);
    EXPECT_LT((to_eigen(to_statevector(bs)) - to_eigen(run(c))).norm(), 1e-10);
  }
}

TEST(Prune, Examples) {
  BranchSum a = prune(with_amplitudes(2, {0.99, 0.01}), 0.05);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a.branches()[0].amp, Complex(0.99));
  EXPECT_NEAR(a.budget_spent(), 0.01, 1e-15);

  const BranchSum id = prune(with_amplitudes(2, {0.3, 0.01, 0.2}), 0.0);
  EXPECT_EQ(id.size(), 3u);

  EXPECT_EQ(prune(with_amplitudes(2, {0.5, 0.5, 0.5, 0.5}), 0.4).size(), 4u);
}

TEST(Prune, NeverDropsLargestAndRespectsBudget) {
  Rng rng(56);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 1 + uniform_index(rng, 16);
    std::vector<double> amps(m);
    for (auto& a : amps) a = uniform01(rng) * 0.3;
    const double delta = uniform01(rng) * 2.0;
    const BranchSum out = prune(with_amplitudes(4, amps), delta);
    const double largest = *std::max_element(amps.begin(), amps.end());
    double kept_max = 0.0, kept_sum = 0.0;
    for (const auto& b : out.branches()) {
      kept_max = std::max(kept_max, std::abs(b.amp));
      kept_sum += std::abs(b.amp);
    }
    EXPECT_EQ(kept_max, largest);
    EXPECT_LE(out.budget_spent(), delta);
    const double total = std::accumulate(amps.begin(), amps.end(), 0.0);
    EXPECT_NEAR(total - kept_sum, out.budget_spent(), 1e-12);
  }
}

TEST(Prune, RetainedCountMonotoneInDelta) {
  Rng rng(57);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 1 + uniform_index(rng, 16);
    std::vector<double> amps(m);
    for (auto& a : amps) a = uniform01(rng);
    std::size_t prev = m + 1;
    for (double delta : {0.0, 0.05, 0.1, 0.2, 0.3, 0.6, 0.99}) {
      const std::size_t k = prune(with_amplitudes(4, amps), delta).size();
      EXPECT_LE(k, prev);
      prev = k;
    }
  }
}

TEST(Evolve, BranchCountMonotoneInDelta) {
  Rng rng(58);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 6);
    const Circuit c = testing_support::random_ansatz_circuit(n, 15, 1 + uniform_index(rng, 10), rng);
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (double delta : {0.0, 0.01, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.9}) {
      const std::size_t k = evolve(c, delta).size();
      EXPECT_LE(k, prev) << "trial " << trial << " delta " << delta;
      prev = k;
    }
  }
}

TEST(Expectation, SingleBranchMatchesStabilizer) {
  Rng rng(59);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 5);
    const Circuit c = testing_support::random_clifford_circuit(n, 25, rng);
    const BranchSum bs = evolve(c, 0.1);
    const PauliSum h = testing_support::random_sum(n, 5, rng, true);
    EXPECT_NEAR(expectation(bs, h), expectation(run_stabilizer(c), h), 1e-12);
  }
}

TEST(Expectation, ExactAtZeroDeltaAndMatchesOverlapSum) {
  Rng rng(60);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 5);
    const Circuit c = testing_support::random_ansatz_circuit(n, 15, 1 + uniform_index(rng, 7), rng);
    const PauliSum h = testing_support::random_sum(n, 6, rng, true);
    const BranchSum bs = evolve(c, 0.0);
    const double want = expectation(run(c), h);
    EXPECT_NEAR(expectation(bs, h), want, 1e-9);
    EXPECT_NEAR(expectation_by_overlaps(bs, h), want, 1e-9);
  }
}

TEST(Expectation, PerturbationBound) {
  Rng rng(61);
  for (double delta : {0.05, 0.1, 0.2, 0.3}) {
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 1 + uniform_index(rng, 6);
      const Circuit c = testing_support::random_ansatz_circuit(n, 15, 1 + uniform_index(rng, 10), rng);
      const PauliSum h = testing_support::random_sum(n, 6, rng, true);
      const double diff = std::abs(expectation(evolve(c, delta), h) - expectation(run(c), h));
      EXPECT_LE(diff, 2.0 * delta * l1(h) + 1e-9) << "delta=" << delta << " trial " << trial;
    }
  }
}

TEST(Expectation, RequiresHermitianAndNonEmpty) {
  const BranchSum bs = evolve(rz_on_plus(0.3), 0.0);
  EXPECT_THROW(expectation(bs, PauliSum::parse("(0+1j)*X")), ContractError);
  EXPECT_THROW(expectation(BranchSum{}, PauliSum::parse("X")), ContractError);
}

TEST(Sample, Examples) {
  Rng rng(62);
  Circuit bell(2);
  bell.append(Gate::h(0)).append(Gate::cnot(0, 1));
  for (auto b : sample(evolve(bell, 0.0), 500, rng)) EXPECT_TRUE(b == 0 || b == 3);
  EXPECT_THROW(sample(BranchSum{}, 10, rng), ContractError);
}

TEST(Sample, TotalVariationToStatevectorSampling) {
  Rng rng(63);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 3);
    const Circuit c = testing_support::random_ansatz_circuit(n, 15, 1 + uniform_index(rng, 6), rng);
    const auto a = sample(evolve(c, 0.0), 4096, rng);
    const auto b = sample(run(c), 4096, rng);
    std::map<std::uint64_t, double> diff;
    for (auto x : a) diff[x] += 1.0 / 4096;
    for (auto x : b) diff[x] -= 1.0 / 4096;
    double tv = 0.0;
    for (const auto& [k, v] : diff) tv += std::abs(v);
    EXPECT_LT(tv / 2.0, 0.05) << "trial " << trial;
  }
}
