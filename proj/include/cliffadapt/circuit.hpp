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
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cliffadapt/error.hpp"
#include "cliffadapt/pauli.hpp"

namespace cliffadapt {

enum class GateKind : std::uint8_t { RX, RY, RZ, RZZ, H, X, Y, Z, S, CNOT };

inline std::string_view to_string(GateKind k) {
  switch (k) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::RZZ: return "RZZ";
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::S: return "S";
    case GateKind::CNOT: return "CNOT";
  }
  return "?";
}

inline GateKind gate_kind_from_string(std::string_view s) {
  for (auto k : {GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::RZZ,
                 GateKind::H, GateKind::X, GateKind::Y, GateKind::Z,
                 GateKind::S, GateKind::CNOT}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown gate kind '" + std::string(s) + "'");
}

constexpr bool is_rotation(GateKind k) noexcept {
  return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ ||
         k == GateKind::RZZ;
}

constexpr std::size_t arity(GateKind k) noexcept {
  return (k == GateKind::RZZ || k == GateKind::CNOT) ? 2 : 1;
}

/**
 * One gate. Rotations follow R_P(theta) = exp(-i theta/2 P) with P the
 * gate's Pauli axis (Z(x)Z for RZZ). For CNOT, qubits = {control, target}.
 */
struct Gate {
  GateKind kind = GateKind::H;
  std::array<std::uint32_t, 2> qubits{0, 0};
  double theta = 0.0;

  static Gate h(std::size_t q) { return make(GateKind::H, q); }
  static Gate x(std::size_t q) { return make(GateKind::X, q); }
  static Gate y(std::size_t q) { return make(GateKind::Y, q); }
  static Gate z(std::size_t q) { return make(GateKind::Z, q); }
  static Gate s(std::size_t q) { return make(GateKind::S, q); }
  static Gate rx(std::size_t q, double t) { return make(GateKind::RX, q, t); }
  static Gate ry(std::size_t q, double t) { return make(GateKind::RY, q, t); }
  static Gate rz(std::size_t q, double t) { return make(GateKind::RZ, q, t); }
  static Gate cnot(std::size_t c, std::size_t t) {
    return make2(GateKind::CNOT, c, t);
  }
  static Gate rzz(std::size_t a, std::size_t b, double t) {
    return make2(GateKind::RZZ, a, b, t);
  }

  bool rotation() const noexcept { return is_rotation(kind); }
  std::size_t num_qubits() const noexcept { return arity(kind); }

  /// Rotation axis as a Pauli word on an n-qubit register.
  PauliString axis(std::size_t n) const {
    PauliString p(n);
    switch (kind) {
      case GateKind::RX: p.set(qubits[0], Pauli::X); break;
      case GateKind::RY: p.set(qubits[0], Pauli::Y); break;
      case GateKind::RZ: p.set(qubits[0], Pauli::Z); break;
      case GateKind::RZZ:
        p.set(qubits[0], Pauli::Z);
        p.set(qubits[1], Pauli::Z);
        break;
      default: throw ContractError("axis() on a non-rotation gate");
    }
    return p;
  }

  friend bool operator==(const Gate& a, const Gate& b) noexcept {
    if (a.kind != b.kind || a.qubits[0] != b.qubits[0]) return false;
    if (a.num_qubits() == 2 && a.qubits[1] != b.qubits[1]) return false;
    return !a.rotation() || a.theta == b.theta;
  }

 private:
  static Gate make(GateKind k, std::size_t q, double t = 0.0) {
    Gate g;
    g.kind = k;
    g.qubits = {static_cast<std::uint32_t>(q), 0};
    g.theta = t;
    return g;
  }
  static Gate make2(GateKind k, std::size_t a, std::size_t b, double t = 0.0) {
    Gate g;
    g.kind = k;
    g.qubits = {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
    g.theta = t;
    return g;
  }
};

class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(std::size_t n) : n_(n) {
    if (n > kMaxQubits) throw ResourceError("Circuit supports at most 64 qubits");
  }

  std::size_t num_qubits() const noexcept { return n_; }
  const std::vector<Gate>& gates() const noexcept { return gates_; }
  std::size_t size() const noexcept { return gates_.size(); }
  auto begin() const noexcept { return gates_.begin(); }
  auto end() const noexcept { return gates_.end(); }

  Circuit& append(const Gate& g) {
    validate(g);
    gates_.push_back(g);
    return *this;
  }
  Circuit& append(const Circuit& c) {
    if (c.n_ != n_) throw DimensionError("Circuit::append: qubit counts differ");
    gates_.insert(gates_.end(), c.gates_.begin(), c.gates_.end());
    return *this;
  }

  friend bool operator==(const Circuit& a, const Circuit& b) noexcept {
    return a.n_ == b.n_ && a.gates_ == b.gates_;
  }

 private:
  void validate(const Gate& g) const {
    for (std::size_t i = 0; i < g.num_qubits(); ++i) {
      if (g.qubits[i] >= n_) throw DimensionError("gate qubit out of range");
    }
    if (g.num_qubits() == 2 && g.qubits[0] == g.qubits[1]) {
      throw ContractError("two-qubit gate needs distinct qubits");
    }
    if (g.rotation() && !std::isfinite(g.theta)) {
      throw ContractError("rotation angle must be finite");
    }
  }

  std::size_t n_ = 0;
  std::vector<Gate> gates_;
};

// ---------------------------------------------------------------------------
// Clifford points

inline constexpr double kHalfPi = std::numbers::pi / 2.0;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Tolerance for treating a rotation angle as a multiple of pi/2.
inline constexpr double kGridTolerance = 1e-12;

/**
 * Index k in {0,1,2,3} of the grid angle k*pi/2 nearest to theta on the
 * circle. Exact midpoints go to the smaller index (so 7pi/4 maps to 0).
 */
inline int project_angle_index(double theta) {
  if (!std::isfinite(theta)) throw ContractError("project_angle: non-finite angle");
  double t = std::fmod(theta, kTwoPi);
  if (t < 0) t += kTwoPi;
  const double q = t / kHalfPi;
  const double lower = std::floor(q);
  const double frac = q - lower;
  const int lo = static_cast<int>(lower) % 4;
  const int hi = (lo + 1) % 4;
  if (frac < 0.5) return lo;
  if (frac > 0.5) return hi;
  return std::min(lo, hi);
}

inline double project_angle(double theta) {
  return project_angle_index(theta) * kHalfPi;
}

/// Grid index if theta is within kGridTolerance of k*pi/2, else nullopt.
inline std::optional<int> grid_index(double theta) {
  if (!std::isfinite(theta)) return std::nullopt;
  const double k = std::round(theta / kHalfPi);
  if (std::abs(theta - k * kHalfPi) > kGridTolerance) return std::nullopt;
  return static_cast<int>(((static_cast<long long>(k) % 4) + 4) % 4);
}

/**
 * A parameter vector whose entries are restricted to {0, pi/2, pi, 3pi/2},
 * stored as grid indices.
 */
class CliffordPointVector {
 public:
  CliffordPointVector() = default;
  explicit CliffordPointVector(std::size_t dim) : idx_(dim, 0) {}
  explicit CliffordPointVector(std::vector<std::uint8_t> indices)
      : idx_(std::move(indices)) {
    for (auto i : idx_) {
      if (i > 3) throw ContractError("Clifford point index out of range");
    }
  }

  /// Projects arbitrary angles onto the grid.
  static CliffordPointVector from_angles(const std::vector<double>& angles) {
    std::vector<std::uint8_t> idx;
    idx.reserve(angles.size());
    for (double a : angles) idx.push_back(static_cast<std::uint8_t>(project_angle_index(a)));
    return CliffordPointVector(std::move(idx));
  }

  /// All 4^dim vectors in lexicographic index order.
  static std::vector<CliffordPointVector> enumerate(std::size_t dim) {
    if (dim > 10) throw ResourceError("enumerate: 4^dim too large");
    std::vector<CliffordPointVector> out;
    const std::size_t total = std::size_t{1} << (2 * dim);
    out.reserve(total);
    for (std::size_t code = 0; code < total; ++code) {
      CliffordPointVector v(dim);
      for (std::size_t i = 0; i < dim; ++i) {
        v.idx_[dim - 1 - i] = static_cast<std::uint8_t>((code >> (2 * i)) & 3U);
      }
      out.push_back(std::move(v));
    }
    return out;
  }

  /// Size of the discrete search space, 4^dim.
  static double space_size(std::size_t dim) { return std::pow(4.0, static_cast<double>(dim)); }

  std::size_t size() const noexcept { return idx_.size(); }
  std::uint8_t index(std::size_t i) const { return idx_.at(i); }
  void set_index(std::size_t i, int k) {
    idx_.at(i) = static_cast<std::uint8_t>(((k % 4) + 4) % 4);
  }
  double angle(std::size_t i) const { return idx_.at(i) * kHalfPi; }
  std::vector<double> angles() const {
    std::vector<double> a;
    a.reserve(idx_.size());
    for (auto k : idx_) a.push_back(k * kHalfPi);
    return a;
  }
  const std::vector<std::uint8_t>& indices() const noexcept { return idx_; }

  friend bool operator==(const CliffordPointVector&, const CliffordPointVector&) = default;
  friend auto operator<=>(const CliffordPointVector&, const CliffordPointVector&) = default;

 private:
  std::vector<std::uint8_t> idx_;
};

/// Number of rotations whose angle is off the pi/2 grid.
inline std::size_t count_non_clifford(const Circuit& c) {
  std::size_t count = 0;
  for (const auto& g : c) {
    if (g.rotation() && !grid_index(g.theta)) ++count;
  }
  return count;
}

namespace detail {

// Gate sequences (time order) for R_Z(k pi/2), exact up to global phase.
inline void emit_rz_grid(Circuit& out, std::size_t q, int k) {
  switch (k) {
    case 1: out.append(Gate::s(q)); break;
    case 2: out.append(Gate::z(q)); break;
    case 3:
      out.append(Gate::s(q));
      out.append(Gate::z(q));
      break;
    default: break;
  }
}

inline void emit_rotation_grid(Circuit& out, const Gate& g, int k) {
  const std::size_t q = g.qubits[0];
  switch (g.kind) {
    case GateKind::RZ: emit_rz_grid(out, q, k); break;
    case GateKind::RX:
      if (k == 2) {
        out.append(Gate::x(q));
      } else if (k != 0) {
        out.append(Gate::h(q));
        emit_rz_grid(out, q, k);
        out.append(Gate::h(q));
      }
      break;
    case GateKind::RY:
      // R_Y(pi/2) = H Z and R_Y(3pi/2) = -Z H as matrices.
      if (k == 1) {
        out.append(Gate::z(q));
        out.append(Gate::h(q));
      } else if (k == 2) {
        out.append(Gate::y(q));
      } else if (k == 3) {
        out.append(Gate::h(q));
        out.append(Gate::z(q));
      }
      break;
    case GateKind::RZZ:
      if (k != 0) {
        out.append(Gate::cnot(g.qubits[0], g.qubits[1]));
        emit_rz_grid(out, g.qubits[1], k);
        out.append(Gate::cnot(g.qubits[0], g.qubits[1]));
      }
      break;
    default: out.append(g); break;
  }
}

}  // namespace detail

/**
 * Replaces every rotation by its nearest Clifford point, realized with
 * H, S, Pauli and CNOT gates. Exact up to a global phase per rotation.
 */
inline Circuit transpile_to_clifford(const Circuit& c) {
  Circuit out(c.num_qubits());
  for (const auto& g : c) {
    if (!g.rotation()) {
      out.append(g);
      continue;
    }
    detail::emit_rotation_grid(out, g, project_angle_index(g.theta));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Layered ansatz

enum class ReferenceState { PlusAll, Zero };

struct LayerParams {
  double gamma = 0.0;
  double beta = 0.0;
  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

/**
 * The alternating cost/mixer ansatz: layer k applies exp(-i H_C gamma_k)
 * then exp(-i A_k beta_k) to the reference state.
 */
class Ansatz {
 public:
  Ansatz() = default;
  Ansatz(PauliSum cost, std::vector<PauliSum> mixers,
         std::vector<LayerParams> params,
         ReferenceState ref = ReferenceState::PlusAll)
      : n_(cost.num_qubits()),
        cost_(std::move(cost)),
        mixers_(std::move(mixers)),
        params_(std::move(params)),
        ref_(ref) {
    if (mixers_.size() != params_.size()) {
      throw ContractError("Ansatz: one (gamma, beta) pair per mixer required");
    }
    if (!cost_.is_hermitian()) throw ContractError("Ansatz: cost must be Hermitian");
    for (const auto& m : mixers_) check_mixer(m);
  }

  std::size_t num_qubits() const noexcept { return n_; }
  std::size_t depth() const noexcept { return mixers_.size(); }
  const PauliSum& cost() const noexcept { return cost_; }
  const std::vector<PauliSum>& mixers() const noexcept { return mixers_; }
  const std::vector<LayerParams>& params() const noexcept { return params_; }
  ReferenceState reference() const noexcept { return ref_; }

  void append_layer(PauliSum mixer, LayerParams p) {
    check_mixer(mixer);
    mixers_.push_back(std::move(mixer));
    params_.push_back(p);
  }

  void set_layer_params(std::size_t k, LayerParams p) { params_.at(k) = p; }

  /// Parameters flattened as (gamma_1, beta_1, gamma_2, beta_2, ...).
  std::vector<double> flat_params() const {
    std::vector<double> v;
    v.reserve(2 * params_.size());
    for (const auto& p : params_) {
      v.push_back(p.gamma);
      v.push_back(p.beta);
    }
    return v;
  }

  void set_flat_params(const std::vector<double>& v) {
    if (v.size() != 2 * params_.size()) {
      throw DimensionError("set_flat_params: expected 2p values");
    }
    for (std::size_t k = 0; k < params_.size(); ++k) {
      params_[k] = {v[2 * k], v[2 * k + 1]};
    }
  }

  Ansatz with_flat_params(const std::vector<double>& v) const {
    Ansatz a = *this;
    a.set_flat_params(v);
    return a;
  }

 private:
  void check_mixer(const PauliSum& m) const {
    if (m.num_qubits() != n_) throw DimensionError("Ansatz: mixer qubit count differs");
    if (!m.is_hermitian()) throw ContractError("Ansatz: mixer must be Hermitian");
  }

  std::size_t n_ = 0;
  PauliSum cost_;
  std::vector<PauliSum> mixers_;
  std::vector<LayerParams> params_;
  ReferenceState ref_ = ReferenceState::PlusAll;
};

namespace detail {

// Basis change V with V P V^dag = Z on one qubit, and its inverse.
inline void emit_to_z_basis(Circuit& out, std::size_t q, Pauli p) {
  if (p == Pauli::X) {
    out.append(Gate::h(q));
  } else if (p == Pauli::Y) {
    // V = H S^dag, with S^dag = Z S.
    out.append(Gate::z(q));
    out.append(Gate::s(q));
    out.append(Gate::h(q));
  }
}

inline void emit_from_z_basis(Circuit& out, std::size_t q, Pauli p) {
  if (p == Pauli::X) {
    out.append(Gate::h(q));
  } else if (p == Pauli::Y) {
    out.append(Gate::h(q));
    out.append(Gate::s(q));
  }
}

}  // namespace detail

/**
 * Appends exp(-i (theta/2) P) for an arbitrary Pauli word. Weight-1 words use
 * the native RX/RY/RZ, Z(x)Z uses RZZ; other words are rotated into the Z
 * basis and reduced with a CNOT ladder.
 */
inline void append_pauli_rotation(Circuit& out, const PauliString& p,
                                  double theta) {
  if (p.size() != out.num_qubits()) {
    throw DimensionError("append_pauli_rotation: qubit count differs");
  }
  std::vector<std::size_t> qs;
  for (std::size_t q = 0; q < p.size(); ++q) {
    if (p.at(q) != Pauli::I) qs.push_back(q);
  }
  if (qs.empty()) return;  // global phase
  if (qs.size() == 1) {
    const std::size_t q = qs[0];
    switch (p.at(q)) {
      case Pauli::X: out.append(Gate::rx(q, theta)); break;
      case Pauli::Y: out.append(Gate::ry(q, theta)); break;
      default: out.append(Gate::rz(q, theta)); break;
    }
    return;
  }
  for (auto q : qs) detail::emit_to_z_basis(out, q, p.at(q));
  if (qs.size() == 2) {
    out.append(Gate::rzz(qs[0], qs[1], theta));
  } else {
    for (std::size_t i = 0; i + 1 < qs.size(); ++i) out.append(Gate::cnot(qs[i], qs[i + 1]));
    out.append(Gate::rz(qs.back(), theta));
    for (std::size_t i = qs.size() - 1; i-- > 0;) out.append(Gate::cnot(qs[i], qs[i + 1]));
  }
  for (auto q : qs) detail::emit_from_z_basis(out, q, p.at(q));
}

/**
 * Appends exp(-i h t) term by term. Exact when h's words commute; otherwise a
 * first-order product in canonical term order. Identity terms are dropped.
 */
/// Terms are emitted in order of their sorted qubit supports.
inline void append_evolution(Circuit& out, const PauliSum& h, double t) {
  std::vector<std::pair<std::vector<std::size_t>, const PauliTerm*>> order;
  for (const auto& term : h) {
    if (term.word.is_identity()) continue;
    std::vector<std::size_t> qs;
    for (std::uint64_t m = term.word.support(); m != 0; m &= m - 1) {
      qs.push_back(static_cast<std::size_t>(std::countr_zero(m)));
    }
    order.emplace_back(std::move(qs), &term);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [support, term] : order) {
    append_pauli_rotation(out, term->word, 2.0 * term->coeff.real() * t);
  }
}

inline void append_reference(Circuit& out, ReferenceState ref) {
  if (ref == ReferenceState::PlusAll) {
    for (std::size_t q = 0; q < out.num_qubits(); ++q) out.append(Gate::h(q));
  }
}

/// Lowers the ansatz to gates with its current parameters bound.
inline Circuit build_circuit(const Ansatz& a) {
  for (const auto& m : a.mixers()) {
    if (!m.is_commuting()) {
      throw NonFactorizableMixerError(
          "mixer " + m.str() + " has non-commuting terms");
    }
  }
  Circuit c(a.num_qubits());
  append_reference(c, a.reference());
  for (std::size_t k = 0; k < a.depth(); ++k) {
    append_evolution(c, a.cost(), a.params()[k].gamma);
    append_evolution(c, a.mixers()[k], a.params()[k].beta);
  }
  return c;
}

// ---------------------------------------------------------------------------
// JSON serialization: {"n": .., "gates": [{"kind": .., "qubits": [..], "theta": ..}]}

inline nlohmann::json to_json(const Circuit& c) {
  nlohmann::json gates = nlohmann::json::array();
  for (const auto& g : c) {
    nlohmann::json j;
    j["kind"] = std::string(to_string(g.kind));
    if (g.num_qubits() == 2) {
      j["qubits"] = {g.qubits[0], g.qubits[1]};
    } else {
      j["qubits"] = {g.qubits[0]};
    }
    if (g.rotation()) j["theta"] = g.theta;
    gates.push_back(std::move(j));
  }
  return {{"n", c.num_qubits()}, {"gates", std::move(gates)}};
}

inline Circuit circuit_from_json(const nlohmann::json& j) {
  try {
    Circuit c(j.at("n").get<std::size_t>());
    for (const auto& gj : j.at("gates")) {
      Gate g;
      g.kind = gate_kind_from_string(gj.at("kind").get<std::string>());
      const auto& qs = gj.at("qubits");
      if (qs.size() != g.num_qubits()) throw ConfigError("gate has wrong qubit count");
      g.qubits[0] = qs[0].get<std::uint32_t>();
      if (g.num_qubits() == 2) g.qubits[1] = qs[1].get<std::uint32_t>();
      if (g.rotation()) g.theta = gj.at("theta").get<double>();
      c.append(g);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("circuit JSON: ") + e.what());
  }
}

}  // namespace cliffadapt
