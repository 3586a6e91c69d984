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

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cliffadapt/circuit.hpp"
#include "cliffadapt/counters.hpp"
#include "cliffadapt/error.hpp"
#include "cliffadapt/pauli.hpp"
#include "cliffadapt/random.hpp"
#include "cliffadapt/statevector.hpp"

namespace cliffadapt {

/// i^phase * word, phase taken mod 4.
struct PhasedPauli {
  PauliString word;
  int phase = 0;

  friend PhasedPauli operator*(const PhasedPauli& a, const PhasedPauli& b) {
    return {a.word ^ b.word, (a.phase + b.phase + product_phase(a.word, b.word)) & 3};
  }
};

/// Whether a gate is in the Clifford set handled by the tableau simulator.
inline bool is_clifford(const Gate& g) {
  return !g.rotation() || grid_index(g.theta).has_value();
}

namespace detail {

// Conjugation P -> G P G^dag of one Hermitian word with a sign bit, for the
// non-rotation Clifford gates. Row update rules of Aaronson & Gottesman with
// Y stored as the letter (x=1, z=1).
inline void conjugate_basic(const Gate& g, PauliString& w, bool& neg) {
  std::uint64_t x = w.x_bits(), z = w.z_bits();
  const std::uint64_t a = std::uint64_t{1} << g.qubits[0];
  switch (g.kind) {
    case GateKind::H: {
      if ((x & a) && (z & a)) neg = !neg;
      const bool xa = x & a, za = z & a;
      x = (x & ~a) | (za ? a : 0);
      z = (z & ~a) | (xa ? a : 0);
      break;
    }
    case GateKind::S:
      if ((x & a) && (z & a)) neg = !neg;
      if (x & a) z ^= a;
      break;
    case GateKind::X:
      if (z & a) neg = !neg;
      break;
    case GateKind::Z:
      if (x & a) neg = !neg;
      break;
    case GateKind::Y:
      if (((x & a) != 0) != ((z & a) != 0)) neg = !neg;
      break;
    case GateKind::CNOT: {
      const std::uint64_t b = std::uint64_t{1} << g.qubits[1];
      const bool xa = x & a, zb = z & b, xb = x & b, za = z & a;
      if (xa && zb && (xb == za)) neg = !neg;
      if (xa) x ^= b;
      if (zb) z ^= a;
      break;
    }
    default: throw ContractError("conjugate_basic: not a basic Clifford gate");
  }
  w = PauliString(w.size(), x, z);
}

// Q -> U Q U^dag with U = exp(-i pi/4 P): anticommuting Q maps to -i P Q.
inline void conjugate_quarter_turn(const PauliString& p, PauliString& w, bool& neg) {
  if (p.commutes_with(w)) return;
  const int k = (2 * (neg ? 1 : 0) + 3 + product_phase(p, w)) & 3;
  w = p ^ w;
  neg = (k == 2);
}

}  // namespace detail

/**
 * Conjugates a signed Hermitian Pauli word by a Clifford gate (grid-angle
 * rotations included). Used both for tableau rows and for Pauli frames.
 */
inline void conjugate(const Gate& g, PauliString& w, bool& neg) {
  if (!g.rotation()) {
    detail::conjugate_basic(g, w, neg);
    return;
  }
  const auto k = grid_index(g.theta);
  if (!k) throw ContractError("conjugate: rotation is not on the Clifford grid");
  const PauliString axis = g.axis(w.size());
  for (int i = 0; i < *k; ++i) detail::conjugate_quarter_turn(axis, w, neg);
}

enum class PhaseTracking { Off, On };

/**
 * Stabilizer state as an Aaronson-Gottesman tableau (n destabilizers followed
 * by n stabilizers, each a Hermitian Pauli word with a sign).
 *
 * With phase tracking on, the state additionally stores one basis index in
 * its support and the exact amplitude there, which pins the global phase.
 * Every other amplitude follows from the stabilizer group.
 */
class StabilizerState {
 public:
  StabilizerState() = default;

  static StabilizerState zero(std::size_t n, PhaseTracking t = PhaseTracking::Off) {
    if (n > kMaxQubits) throw ResourceError("stabilizer state supports at most 64 qubits");
    StabilizerState s;
    s.n_ = n;
    s.rows_.reserve(2 * n);
    for (std::size_t q = 0; q < n; ++q) s.rows_.push_back(PauliString::single(n, q, Pauli::X));
    for (std::size_t q = 0; q < n; ++q) s.rows_.push_back(PauliString::single(n, q, Pauli::Z));
    s.neg_.assign(2 * n, false);
    s.tracked_ = (t == PhaseTracking::On);
    s.ref_ = 0;
    s.ref_amp_ = 1.0;
    return s;
  }

  std::size_t num_qubits() const noexcept { return n_; }
  bool phase_tracked() const noexcept { return tracked_; }

  const PauliString& destabilizer(std::size_t i) const { return rows_.at(i); }
  const PauliString& stabilizer(std::size_t i) const { return rows_.at(n_ + i); }
  bool stabilizer_negative(std::size_t i) const { return neg_.at(n_ + i); }

  /// The i-th stabilizer generator as a signed term.
  PauliTerm stabilizer_term(std::size_t i) const {
    return {stabilizer(i), stabilizer_negative(i) ? -1.0 : 1.0};
  }

  /// Turns phase tracking on, fixing the (otherwise arbitrary) global phase
  /// so that the first amplitude in the support is real and positive.
  void enable_phase_tracking() {
    if (tracked_) return;
    ref_ = min_support_element();
    ref_amp_ = std::pow(2.0, -0.5 * static_cast<double>(x_rank()));
    tracked_ = true;
  }

  void disable_phase_tracking() noexcept { tracked_ = false; }

  /// Applies a Clifford gate (H, S, Paulis, CNOT, grid-angle rotations).
  void apply(const Gate& g) {
    for (std::size_t i = 0; i < g.num_qubits(); ++i) {
      if (g.qubits[i] >= n_) throw DimensionError("gate qubit out of range");
    }
    if (g.rotation()) {
      const auto k = grid_index(g.theta);
      if (!k) {
        throw ContractError("apply_clifford: " + std::string(to_string(g.kind)) +
                            " angle is not a multiple of pi/2");
      }
      const PauliString axis = g.axis(n_);
      for (int i = 0; i < *k; ++i) apply_quarter_turn(axis);
      return;
    }
    if (tracked_) track_basic(g);
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      bool neg = neg_[r];
      detail::conjugate_basic(g, rows_[r], neg);
      neg_[r] = neg;
    }
  }

  /// Applies exp(-i pi/4 P) for a Hermitian Pauli word P.
  void apply_quarter_turn(const PauliString& p) {
    check_size(p);
    if (tracked_) {
      // U = (I - iP)/sqrt2; pick whichever of ref, ref^x(P) keeps a nonzero
      // amplitude (they cannot both vanish because P^2 = I).
      const std::uint64_t px = p.x_bits();
      const Complex a_r = ref_amp_;
      const Complex a_o = px == 0 ? a_r : amplitude(ref_ ^ px);
      const Complex c1 = i_pow(basis_action_phase(p, ref_ ^ px));
      const Complex c2 = i_pow(basis_action_phase(p, ref_));
      const Complex i(0.0, 1.0);
      const Complex at_ref = (a_r - i * c1 * a_o) / std::sqrt(2.0);
      const Complex at_other = (a_o - i * c2 * a_r) / std::sqrt(2.0);
      if (px == 0 || std::abs(at_ref) >= std::abs(at_other)) {
        ref_amp_ = at_ref;
      } else {
        ref_ ^= px;
        ref_amp_ = at_other;
      }
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      bool neg = neg_[r];
      detail::conjugate_quarter_turn(p, rows_[r], neg);
      neg_[r] = neg;
    }
  }

  /// Multiplies the state by the unitary i^phase * P.
  void apply_pauli(const PauliString& p, int phase = 0) {
    check_size(p);
    if (tracked_) {
      ref_amp_ *= i_pow(phase + basis_action_phase(p, ref_));
      ref_ ^= p.x_bits();
    }
    for (std::size_t r = n_; r < rows_.size(); ++r) {
      if (!p.commutes_with(rows_[r])) neg_[r] = !neg_[r];
    }
  }

  /// Syndrome of P: bit i set when P anticommutes with stabilizer i.
  std::uint64_t syndrome(const PauliString& p) const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!p.commutes_with(rows_[n_ + i])) s |= std::uint64_t{1} << i;
    }
    return s;
  }

  /**
   * <psi| i^phase P |psi>, which is 0 or a power of i. Decomposes P over the
   * stabilizers selected by its anticommutation with the destabilizers.
   */
  Complex expectation_phase(const PauliString& p, int phase = 0) const {
    check_size(p);
    for (std::size_t i = 0; i < n_; ++i) {
      if (!p.commutes_with(rows_[n_ + i])) return 0.0;
    }
    PhasedPauli acc{PauliString(n_), 0};
    for (std::size_t i = 0; i < n_; ++i) {
      if (!p.commutes_with(rows_[i])) {
        acc = acc * PhasedPauli{rows_[n_ + i], neg_[n_ + i] ? 2 : 0};
      }
    }
    // acc = i^a P and acc|psi> = |psi>, so <P> = i^-a.
    return i_pow(phase - acc.phase);
  }

  /// <psi|P|psi> in {+1, -1, 0} for a Hermitian word.
  int expectation_sign(const PauliString& p) const {
    const Complex e = expectation_phase(p);
    if (e == 0.0) return 0;
    return e.real() > 0 ? 1 : -1;
  }

  /**
   * Replaces the state with the normalized projection (I + sP)/2 |psi>,
   * s = -1 when `negative`. Returns the norm of the unnormalized projection:
   * 1, 1/sqrt2 or 0 (in which case the state is left unchanged).
   */
  double project(const PauliString& p, bool negative) {
    check_size(p);
    std::optional<std::size_t> pivot;
    for (std::size_t i = n_; i < 2 * n_; ++i) {
      if (!p.commutes_with(rows_[i])) {
        pivot = i;
        break;
      }
    }
    if (!pivot) {
      const int e = expectation_sign(p);
      return (e == (negative ? -1 : 1)) ? 1.0 : 0.0;
    }
    const StabilizerState old = tracked_ ? *this : StabilizerState{};
    const std::size_t pv = *pivot;
    for (std::size_t i = 0; i < 2 * n_; ++i) {
      if (i == pv || i == pv - n_) continue;
      if (!p.commutes_with(rows_[i])) rowmul(i, pv);
    }
    rows_[pv - n_] = rows_[pv];
    neg_[pv - n_] = neg_[pv];
    rows_[pv] = p;
    neg_[pv] = negative;
    if (tracked_) {
      // New amplitude at any x in the new support, from the old state:
      // <x|(psi + sP psi)>/sqrt2.
      const std::uint64_t x = min_support_element();
      const std::uint64_t px = p.x_bits();
      const Complex s = negative ? -1.0 : 1.0;
      ref_ = x;
      ref_amp_ = (old.amplitude(x) +
                  s * i_pow(basis_action_phase(p, x ^ px)) * old.amplitude(x ^ px)) /
                 std::sqrt(2.0);
    }
    return 1.0 / std::sqrt(2.0);
  }

  /// Measures qubit q in the Z basis, collapsing the state.
  int measure(std::size_t q, Rng& rng) {
    if (q >= n_) throw DimensionError("measure: qubit out of range");
    const PauliString zq = PauliString::single(n_, q, Pauli::Z);
    bool random = false;
    for (std::size_t i = n_; i < 2 * n_; ++i) {
      if (!zq.commutes_with(rows_[i])) {
        random = true;
        break;
      }
    }
    if (!random) return expectation_sign(zq) < 0 ? 1 : 0;
    const int outcome = coin(rng) ? 1 : 0;
    project(zq, outcome == 1);
    return outcome;
  }

  /// <x|psi>; requires phase tracking.
  Complex amplitude(std::uint64_t x) const {
    require_tracked("amplitude");
    const Echelon e = echelon();
    return amplitude_with(e, x);
  }

  /// Phase of the amplitude on the lowest basis index in the support.
  Complex global_phase() const {
    require_tracked("global_phase");
    const Complex a = amplitude(min_support_element());
    return a / std::abs(a);
  }

  /// Dense vector; exact including global phase when tracked, otherwise
  /// with the first support amplitude real and positive.
  StateVector to_statevector(std::size_t cap = kStateVectorCap) const {
    StateVector out(n_, cap);
    StabilizerState t = *this;
    t.enable_phase_tracking();
    const Echelon e = t.echelon();
    auto& amps = out.amplitudes();
    amps.assign(amps.size(), Complex(0.0));
    // Walk the support ref ^ span(pivot rows) in Gray-code order.
    const std::size_t k = e.rank;
    std::uint64_t x = t.ref_;
    amps[x] = t.amplitude_with(e, x);
    for (std::uint64_t c = 1; c < (std::uint64_t{1} << k); ++c) {
      const int flip = std::countr_zero(c);
      x ^= e.rows[static_cast<std::size_t>(flip)].word.x_bits();
      amps[x] = t.amplitude_with(e, x);
    }
    return out;
  }

  /**
   * Checks the tableau relations: stabilizers commute, destabilizers commute,
   * and destabilizer i anticommutes only with stabilizer i.
   */
  bool is_valid() const {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (!rows_[n_ + i].commutes_with(rows_[n_ + j])) return false;
        if (!rows_[i].commutes_with(rows_[j])) return false;
        const bool anti = !rows_[i].commutes_with(rows_[n_ + j]);
        if (anti != (i == j)) return false;
      }
    }
    return !tracked_ || std::abs(ref_amp_) > 0.0;
  }

  /// Dimension of the span of the stabilizers' X parts; the support has
  /// 2^x_rank() elements with equal magnitude.
  std::size_t x_rank() const { return echelon().rank; }

  /// Lowest basis index with a nonzero amplitude.
  std::uint64_t min_support_element() const {
    const Echelon e = echelon();
    std::uint64_t x = solve_z_constraints(e);
    for (std::size_t i = 0; i < e.rank; ++i) {
      if ((x >> e.pivot[i]) & 1U) x ^= e.rows[i].word.x_bits();
    }
    return x;
  }

 private:
  friend Complex inner_product(const StabilizerState&, const StabilizerState&);

  // Stabilizer rows in reduced row echelon form on their X parts. Pivots are
  // taken from the highest qubit down; rows [rank, n) have no X part.
  struct Echelon {
    std::vector<PhasedPauli> rows;
    std::vector<int> pivot;
    std::size_t rank = 0;
  };

  Echelon echelon() const {
    Echelon e;
    e.rows.reserve(n_);
    for (std::size_t i = 0; i < n_; ++i) e.rows.push_back({rows_[n_ + i], neg_[n_ + i] ? 2 : 0});
    std::size_t r = 0;
    for (int col = static_cast<int>(n_) - 1; col >= 0 && r < n_; --col) {
      const std::uint64_t bit = std::uint64_t{1} << col;
      std::size_t piv = r;
      while (piv < n_ && !(e.rows[piv].word.x_bits() & bit)) ++piv;
      if (piv == n_) continue;
      std::swap(e.rows[r], e.rows[piv]);
      for (std::size_t i = 0; i < n_; ++i) {
        if (i != r && (e.rows[i].word.x_bits() & bit)) e.rows[i] = e.rows[i] * e.rows[r];
      }
      e.pivot.push_back(col);
      ++r;
    }
    e.rank = r;
    return e;
  }

  // Some x satisfying the diagonal stabilizers (+-Z^v x = x).
  std::uint64_t solve_z_constraints(const Echelon& e) const {
    std::vector<std::pair<std::uint64_t, int>> eqs;  // v . x = b
    for (std::size_t i = e.rank; i < n_; ++i) {
      eqs.emplace_back(e.rows[i].word.z_bits(), (e.rows[i].phase >> 1) & 1);
    }
    std::vector<int> pivots;
    std::size_t r = 0;
    for (int col = static_cast<int>(n_) - 1; col >= 0 && r < eqs.size(); --col) {
      const std::uint64_t bit = std::uint64_t{1} << col;
      std::size_t piv = r;
      while (piv < eqs.size() && !(eqs[piv].first & bit)) ++piv;
      if (piv == eqs.size()) continue;
      std::swap(eqs[r], eqs[piv]);
      for (std::size_t i = 0; i < eqs.size(); ++i) {
        if (i != r && (eqs[i].first & bit)) {
          eqs[i].first ^= eqs[r].first;
          eqs[i].second ^= eqs[r].second;
        }
      }
      pivots.push_back(col);
      ++r;
    }
    std::uint64_t x = 0;
    for (std::size_t i = 0; i < r; ++i) {
      if (eqs[i].second) x |= std::uint64_t{1} << pivots[i];
    }
    return x;
  }

  Complex amplitude_with(const Echelon& e, std::uint64_t x) const {
    const std::uint64_t t = x ^ ref_;
    PhasedPauli acc{PauliString(n_), 0};
    for (std::size_t i = 0; i < e.rank; ++i) {
      if (((t ^ acc.word.x_bits()) >> e.pivot[i]) & 1U) acc = acc * e.rows[i];
    }
    if (acc.word.x_bits() != t) return 0.0;
    // acc stabilizes psi and maps |ref> to i^(phase + action)|x>.
    return i_pow(acc.phase + basis_action_phase(acc.word, ref_)) * ref_amp_;
  }

  void rowmul(std::size_t i, std::size_t j) {
    const PhasedPauli r = PhasedPauli{rows_[i], neg_[i] ? 2 : 0} *
                          PhasedPauli{rows_[j], neg_[j] ? 2 : 0};
    rows_[i] = r.word;
    neg_[i] = (r.phase == 2);
  }

  void track_basic(const Gate& g) {
    const std::uint64_t a = std::uint64_t{1} << g.qubits[0];
    const bool ra = ref_ & a;
    const Complex i(0.0, 1.0);
    switch (g.kind) {
      case GateKind::X: ref_ ^= a; break;
      case GateKind::Y:
        ref_amp_ *= ra ? -i : i;
        ref_ ^= a;
        break;
      case GateKind::Z:
        if (ra) ref_amp_ = -ref_amp_;
        break;
      case GateKind::S:
        if (ra) ref_amp_ *= i;
        break;
      case GateKind::CNOT:
        if (ra) ref_ ^= std::uint64_t{1} << g.qubits[1];
        break;
      case GateKind::H: {
        // <x|H|psi> for x in {ref, ref^a}; at least one is nonzero.
        const Complex a_r = ref_amp_;
        const Complex a_o = amplitude(ref_ ^ a);
        const Complex a0 = ra ? a_o : a_r;
        const Complex a1 = ra ? a_r : a_o;
        const double r = 1.0 / std::sqrt(2.0);
        const Complex at_ref = ra ? (a0 - a1) * r : (a0 + a1) * r;
        const Complex at_other = ra ? (a0 + a1) * r : (a0 - a1) * r;
        if (std::abs(at_ref) >= std::abs(at_other)) {
          ref_amp_ = at_ref;
        } else {
          ref_ ^= a;
          ref_amp_ = at_other;
        }
        break;
      }
      default: break;
    }
  }

  void check_size(const PauliString& p) const {
    if (p.size() != n_) throw DimensionError("stabilizer: Pauli qubit count differs");
  }
  void require_tracked(const char* what) const {
    if (!tracked_) throw ContractError(std::string(what) + " requires a phase-tracked state");
  }

  std::size_t n_ = 0;
  std::vector<PauliString> rows_;
  std::vector<bool> neg_;
  bool tracked_ = false;
  std::uint64_t ref_ = 0;
  Complex ref_amp_ = 1.0;
};

/// Runs an all-Clifford circuit from |0...0>.
inline StabilizerState run_stabilizer(const Circuit& c,
                                      PhaseTracking t = PhaseTracking::Off,
                                      BackendCounters* counters = nullptr) {
  StabilizerState s = StabilizerState::zero(c.num_qubits(), t);
  for (const auto& g : c) s.apply(g);
  bump(&BackendCounters::stabilizer_runs, counters);
  return s;
}

/// coeff * <s|P|s>.
inline Complex pauli_expectation(const StabilizerState& s, const PauliTerm& p) {
  if (p.size() != s.num_qubits()) throw DimensionError("pauli_expectation: qubit count differs");
  return p.coeff * s.expectation_phase(p.word);
}

/// <s|h|s> for a Hermitian sum.
inline double expectation(const StabilizerState& s, const PauliSum& h) {
  if (h.num_qubits() != s.num_qubits()) throw DimensionError("expectation: qubit count differs");
  if (!h.is_hermitian()) throw ContractError("expectation: operator is not Hermitian");
  double acc = 0.0;
  for (const auto& t : h) acc += pauli_expectation(s, t).real();
  return acc;
}

/**
 * <a|b> including global phases.
 *
 * Projects a copy of b onto each stabilizer generator of a. A zero
 * projection means orthogonal states; otherwise the result is proportional
 * to |a> and the ratio of amplitudes at a's reference index gives the
 * overlap.
 */
inline Complex inner_product(const StabilizerState& a, const StabilizerState& b) {
  if (!a.phase_tracked() || !b.phase_tracked()) {
    throw ContractError("inner_product requires phase-tracked states");
  }
  if (a.num_qubits() != b.num_qubits()) throw DimensionError("inner_product: qubit counts differ");
  StabilizerState c = b;
  double factor = 1.0;
  for (std::size_t i = 0; i < a.num_qubits(); ++i) {
    const double f = c.project(a.stabilizer(i), a.stabilizer_negative(i));
    if (f == 0.0) return 0.0;
    factor *= f;
  }
  return factor * c.amplitude(a.ref_) / a.ref_amp_;
}

/// Draws bitstrings by repeated Z-basis measurement of fresh copies.
inline std::vector<std::uint64_t> sample(const StabilizerState& s, std::size_t shots, Rng& rng) {
  if (shots == 0) throw ContractError("sample: shots must be at least 1");
  StabilizerState base = s;
  base.disable_phase_tracking();
  std::vector<std::uint64_t> out;
  out.reserve(shots);
  for (std::size_t k = 0; k < shots; ++k) {
    StabilizerState t = base;
    std::uint64_t x = 0;
    for (std::size_t q = 0; q < s.num_qubits(); ++q) {
      if (t.measure(q, rng)) x |= std::uint64_t{1} << q;
    }
    out.push_back(x);
  }
  return out;
}

}  // namespace cliffadapt
