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
#include <numeric>
#include <unordered_map>
#include <vector>

#include "cliffadapt/circuit.hpp"
#include "cliffadapt/counters.hpp"
#include "cliffadapt/error.hpp"
#include "cliffadapt/pauli.hpp"
#include "cliffadapt/random.hpp"
#include "cliffadapt/stabilizer.hpp"
#include "cliffadapt/statevector.hpp"

namespace cliffadapt {

/// One term b * W|base> of a branch sum; W is a Hermitian Pauli word.
struct Branch {
  Complex amp;
  PauliString frame;
};

struct EvolveOptions {
  /// Coalesce branches that represent the same stabilizer state. Keeps the
  /// count at most 2^n, but then delta=0 no longer yields 2^t branches.
  bool merge = false;
  /// Track the global phase of the shared base state; needed only for
  /// dense reconstruction and overlaps.
  bool track_phase = true;
};

/**
 * Weighted sum of stabilizer states sum_a b_a W_a |base>.
 *
 * Every branch is the shared Clifford state |base> with a Pauli frame W_a
 * applied, so each branch is itself a stabilizer state and Clifford gates
 * only need to be applied once to the base plus a conjugation per frame.
 */
class BranchSum {
 public:
  BranchSum() = default;
  explicit BranchSum(StabilizerState base) : base_(std::move(base)) {
    branches_.push_back({1.0, PauliString(base_.num_qubits())});
  }

  std::size_t num_qubits() const noexcept { return base_.num_qubits(); }
  std::size_t size() const noexcept { return branches_.size(); }
  bool empty() const noexcept { return branches_.empty(); }
  const StabilizerState& base() const noexcept { return base_; }
  const std::vector<Branch>& branches() const noexcept { return branches_; }
  std::vector<Branch>& branches() noexcept { return branches_; }
  double budget_spent() const noexcept { return spent_; }
  void add_spent(double v) noexcept { spent_ += v; }

  /// Branch a as a standalone phase-tracked stabilizer state (amplitude
  /// excluded).
  StabilizerState branch_state(std::size_t a) const {
    StabilizerState s = base_;
    s.enable_phase_tracking();
    s.apply_pauli(branches_.at(a).frame);
    return s;
  }

  void apply_clifford(const Gate& g) {
    base_.apply(g);
    for (auto& b : branches_) {
      bool neg = false;
      conjugate(g, b.frame, neg);
      if (neg) b.amp = -b.amp;
    }
  }

  /// exp(-i theta/2 P) = cos(theta/2) I - i sin(theta/2) P applied to every
  /// branch, doubling the branch count.
  void apply_rotation(const PauliString& p, double theta) {
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    const std::size_t m = branches_.size();
    branches_.reserve(2 * m);
    for (std::size_t a = 0; a < m; ++a) {
      Branch& b = branches_[a];
      Branch split{Complex(0.0, -s) * i_pow(product_phase(p, b.frame)) * b.amp, p ^ b.frame};
      b.amp *= c;
      branches_.push_back(std::move(split));
    }
  }

  /// Merges branches whose frames give the same state up to a phase, i.e.
  /// whose product lies in the stabilizer group of the base.
  void merge() {
    std::unordered_map<std::uint64_t, std::size_t> slot;
    std::vector<Branch> out;
    out.reserve(branches_.size());
    for (auto& b : branches_) {
      const std::uint64_t key = base_.syndrome(b.frame);
      auto [it, fresh] = slot.try_emplace(key, out.size());
      if (fresh) {
        out.push_back(std::move(b));
        continue;
      }
      Branch& keep = out[it->second];
      // W_b|base> = <base|W_keep W_b|base> W_keep|base>.
      const Complex e = i_pow(product_phase(keep.frame, b.frame)) *
                        base_.expectation_phase(keep.frame ^ b.frame);
      keep.amp += e * b.amp;
    }
    branches_ = std::move(out);
  }

 private:
  StabilizerState base_;
  std::vector<Branch> branches_;
  double spent_ = 0.0;
};

/**
 * Greedy pruning: visit branches by increasing |b| and drop each while the
 * accumulated dropped mass stays within delta. The largest branch is always
 * kept. Retained branches keep their relative order.
 */
inline BranchSum prune(BranchSum bs, double delta) {
  if (!(delta >= 0.0)) throw ContractError("prune: delta must be non-negative");
  auto& br = bs.branches();
  if (br.size() <= 1 || delta == 0.0) return bs;
  std::vector<std::size_t> order(br.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(br[a].amp) < std::abs(br[b].amp);
  });
  std::vector<char> drop(br.size(), 0);
  double spent = bs.budget_spent();
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const double m = std::abs(br[order[k]].amp);
    if (spent + m > delta) break;
    spent += m;
    drop[order[k]] = 1;
  }
  std::vector<Branch> kept;
  kept.reserve(br.size());
  for (std::size_t a = 0; a < br.size(); ++a) {
    if (!drop[a]) kept.push_back(std::move(br[a]));
  }
  bs.add_spent(spent - bs.budget_spent());
  br = std::move(kept);
  return bs;
}

/**
 * Evolves |0^n> through a circuit, splitting on every off-grid rotation and
 * pruning after each split.
 *
 * Each of the t splits may discard at most delta/t of amplitude mass; unused
 * allowance is not carried forward. This keeps the retained branches for a
 * larger delta a subset of those for a smaller one, so the branch count is
 * monotone in delta, while the total discarded mass stays within delta.
 */
inline BranchSum evolve(const Circuit& c, double delta, EvolveOptions opt = {},
                        BackendCounters* counters = nullptr) {
  if (!(delta >= 0.0) || !(delta < 1.0)) {
    throw ContractError("evolve: delta must lie in [0, 1)");
  }
  const PhaseTracking t = opt.track_phase ? PhaseTracking::On : PhaseTracking::Off;
  BranchSum bs(StabilizerState::zero(c.num_qubits(), t));
  const std::size_t splits = count_non_clifford(c);
  const double step = splits == 0 ? 0.0 : delta / static_cast<double>(splits);
  for (const auto& g : c) {
    if (is_clifford(g)) {
      bs.apply_clifford(g);
      continue;
    }
    bs.apply_rotation(g.axis(c.num_qubits()), g.theta);
    if (opt.merge) bs.merge();
    if (step > 0.0) bs = prune(std::move(bs), std::min(delta, bs.budget_spent() + step));
    if (bs.empty()) throw DegenerateApproximationError("evolve: no branches left");
  }
  bump(&BackendCounters::lowrank_evolutions, counters);
  return bs;
}

namespace detail {

// sum over pairs (a, b) of conj(b_a) b_b <base| W_a T W_b |base>, visiting
// only the pairs whose combined syndrome vanishes.
inline Complex branch_matrix_element(const BranchSum& bs, const PauliString& t,
                                     const std::vector<std::uint64_t>& syn,
                                     const std::unordered_multimap<std::uint64_t, std::size_t>& by_syn) {
  const auto& br = bs.branches();
  const std::uint64_t st = bs.base().syndrome(t);
  Complex acc = 0.0;
  for (std::size_t a = 0; a < br.size(); ++a) {
    const auto range = by_syn.equal_range(syn[a] ^ st);
    if (range.first == range.second) continue;
    const int p1 = product_phase(br[a].frame, t);
    const PauliString wt = br[a].frame ^ t;
    for (auto it = range.first; it != range.second; ++it) {
      const Branch& b = br[it->second];
      const int p2 = product_phase(wt, b.frame);
      const Complex e = bs.base().expectation_phase(wt ^ b.frame, p1 + p2);
      acc += std::conj(br[a].amp) * b.amp * e;
    }
  }
  return acc;
}

}  // namespace detail

/// <psi'|psi'> of the (unnormalized) retained sum.
inline double norm_squared(const BranchSum& bs) {
  if (bs.empty()) throw ContractError("norm_squared: empty branch sum");
  std::vector<std::uint64_t> syn;
  std::unordered_multimap<std::uint64_t, std::size_t> by_syn;
  for (std::size_t a = 0; a < bs.size(); ++a) {
    syn.push_back(bs.base().syndrome(bs.branches()[a].frame));
    by_syn.emplace(syn.back(), a);
  }
  return detail::branch_matrix_element(bs, PauliString(bs.num_qubits()), syn, by_syn).real();
}

/// <psi'|h|psi'> / <psi'|psi'>.
inline double expectation(const BranchSum& bs, const PauliSum& h) {
  if (bs.empty()) throw ContractError("expectation: empty branch sum");
  if (h.num_qubits() != bs.num_qubits()) throw DimensionError("expectation: qubit count differs");
  if (!h.is_hermitian()) throw ContractError("expectation: operator is not Hermitian");
  std::vector<std::uint64_t> syn;
  std::unordered_multimap<std::uint64_t, std::size_t> by_syn;
  for (std::size_t a = 0; a < bs.size(); ++a) {
    syn.push_back(bs.base().syndrome(bs.branches()[a].frame));
    by_syn.emplace(syn.back(), a);
  }
  const double nrm = detail::branch_matrix_element(bs, PauliString(bs.num_qubits()), syn, by_syn).real();
  Complex acc = 0.0;
  for (const auto& term : h) {
    acc += term.coeff * detail::branch_matrix_element(bs, term.word, syn, by_syn);
  }
  return acc.real() / nrm;
}

/**
 * Same quantity as expectation(), computed from explicit stabilizer-state
 * overlaps <phi_a| P |phi_b> over all branch pairs.
 */
inline double expectation_by_overlaps(const BranchSum& bs, const PauliSum& h) {
  if (bs.empty()) throw ContractError("expectation: empty branch sum");
  if (!h.is_hermitian()) throw ContractError("expectation: operator is not Hermitian");
  std::vector<StabilizerState> phi;
  for (std::size_t a = 0; a < bs.size(); ++a) phi.push_back(bs.branch_state(a));
  const auto& br = bs.branches();
  Complex nrm = 0.0, acc = 0.0;
  for (std::size_t a = 0; a < br.size(); ++a) {
    for (std::size_t b = 0; b < br.size(); ++b) {
      const Complex w = std::conj(br[a].amp) * br[b].amp;
      nrm += w * inner_product(phi[a], phi[b]);
      for (const auto& term : h) {
        StabilizerState pb = phi[b];
        pb.apply_pauli(term.word);
        acc += w * term.coeff * inner_product(phi[a], pb);
      }
    }
  }
  return acc.real() / nrm.real();
}

/// Dense sum_a b_a W_a |base> (not normalized).
inline StateVector to_statevector(const BranchSum& bs, std::size_t cap = kStateVectorCap) {
  if (bs.empty()) throw ContractError("to_statevector: empty branch sum");
  const StateVector base = bs.base().to_statevector(cap);
  StateVector out(bs.num_qubits(), cap);
  auto& acc = out.amplitudes();
  std::fill(acc.begin(), acc.end(), Complex(0.0));
  for (const auto& b : bs.branches()) {
    StateVector t = base;
    t.apply_pauli({b.frame, b.amp});
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += t[i];
  }
  return out;
}

/// Draws from the normalized |<x|psi'>|^2 by dense enumeration (n <= 12).
inline std::vector<std::uint64_t> sample(const BranchSum& bs, std::size_t shots, Rng& rng) {
  if (bs.empty()) throw ContractError("sample: empty branch sum");
  if (shots == 0) throw ContractError("sample: shots must be at least 1");
  if (bs.size() == 1) return sample(bs.branch_state(0), shots, rng);
  const StateVector psi = to_statevector(bs, kGroundStateCap);
  std::vector<double> probs = probabilities(psi);
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (auto& p : probs) p /= total;
  return sample_distribution(probs, shots, rng);
}

}  // namespace cliffadapt
