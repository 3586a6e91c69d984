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
#include <complex>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cliffadapt/circuit.hpp"
#include "cliffadapt/counters.hpp"
#include "cliffadapt/error.hpp"
#include "cliffadapt/pauli.hpp"
#include "cliffadapt/random.hpp"

namespace cliffadapt {

inline constexpr std::size_t kStateVectorCap = 14;
inline constexpr std::size_t kGroundStateCap = 12;

/// Computational basis label with qubit 0 printed leftmost.
inline std::string to_bitstring(std::uint64_t index, std::size_t n) {
  std::string s(n, '0');
  for (std::size_t q = 0; q < n; ++q) {
    if ((index >> q) & 1U) s[q] = '1';
  }
  return s;
}

inline std::uint64_t from_bitstring(std::string_view s) {
  std::uint64_t v = 0;
  for (std::size_t q = 0; q < s.size(); ++q) {
    if (s[q] == '1') {
      v |= std::uint64_t{1} << q;
    } else if (s[q] != '0') {
      throw ConfigError("bitstring must contain only 0/1");
    }
  }
  return v;
}

/**
 * Dense n-qubit state. Amplitude index bit q is qubit q.
 */
class StateVector {
 public:
  explicit StateVector(std::size_t n, std::size_t cap = kStateVectorCap) : n_(n) {
    if (n > cap) {
      throw ResourceError("statevector: " + std::to_string(n) +
                          " qubits exceeds cap " + std::to_string(cap));
    }
    amps_.assign(std::size_t{1} << n, Complex(0.0));
    amps_[0] = 1.0;
  }

  static StateVector from_amplitudes(std::vector<Complex> amps) {
    const std::size_t dim = amps.size();
    if (dim == 0 || (dim & (dim - 1)) != 0) {
      throw DimensionError("amplitude count must be a power of two");
    }
    StateVector s(static_cast<std::size_t>(std::countr_zero(dim)), kMaxQubits);
    s.amps_ = std::move(amps);
    return s;
  }

  std::size_t num_qubits() const noexcept { return n_; }
  std::size_t dim() const noexcept { return amps_.size(); }
  const std::vector<Complex>& amplitudes() const noexcept { return amps_; }
  std::vector<Complex>& amplitudes() noexcept { return amps_; }
  Complex operator[](std::size_t i) const { return amps_[i]; }

  double norm() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return std::sqrt(s);
  }

  void apply(const Gate& g) {
    const double h = g.theta / 2.0;
    const Complex i(0.0, 1.0);
    switch (g.kind) {
      case GateKind::H: {
        const double r = 1.0 / std::sqrt(2.0);
        apply_1q(g.qubits[0], r, r, r, -r);
        break;
      }
      case GateKind::X: apply_1q(g.qubits[0], 0.0, 1.0, 1.0, 0.0); break;
      case GateKind::Y: apply_1q(g.qubits[0], 0.0, -i, i, 0.0); break;
      case GateKind::Z: apply_1q(g.qubits[0], 1.0, 0.0, 0.0, -1.0); break;
      case GateKind::S: apply_1q(g.qubits[0], 1.0, 0.0, 0.0, i); break;
      case GateKind::RX:
        apply_1q(g.qubits[0], std::cos(h), -i * std::sin(h), -i * std::sin(h), std::cos(h));
        break;
      case GateKind::RY:
        apply_1q(g.qubits[0], std::cos(h), -std::sin(h), std::sin(h), std::cos(h));
        break;
      case GateKind::RZ:
        apply_1q(g.qubits[0], std::polar(1.0, -h), 0.0, 0.0, std::polar(1.0, h));
        break;
      case GateKind::RZZ: {
        const std::uint64_t m = (std::uint64_t{1} << g.qubits[0]) |
                                (std::uint64_t{1} << g.qubits[1]);
        const Complex even = std::polar(1.0, -h), odd = std::polar(1.0, h);
        for (std::size_t b = 0; b < amps_.size(); ++b) {
          amps_[b] *= (std::popcount(b & m) & 1) ? odd : even;
        }
        break;
      }
      case GateKind::CNOT: {
        const std::size_t c = std::size_t{1} << g.qubits[0];
        const std::size_t t = std::size_t{1} << g.qubits[1];
        for (std::size_t b = 0; b < amps_.size(); ++b) {
          if ((b & c) && !(b & t)) std::swap(amps_[b], amps_[b | t]);
        }
        break;
      }
    }
  }

  /// Multiplies the state by a (not necessarily unitary) Pauli term.
  void apply_pauli(const PauliTerm& p) {
    if (p.size() != n_) throw DimensionError("apply_pauli: qubit count differs");
    std::vector<Complex> out(amps_.size());
    const std::uint64_t flip = p.word.x_bits();
    for (std::size_t b = 0; b < amps_.size(); ++b) {
      out[b ^ flip] = p.coeff * i_pow(basis_action_phase(p.word, b)) * amps_[b];
    }
    amps_ = std::move(out);
  }

 private:
  void apply_1q(std::size_t q, Complex m00, Complex m01, Complex m10, Complex m11) {
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t b = 0; b < amps_.size(); ++b) {
      if (b & bit) continue;
      const Complex a0 = amps_[b], a1 = amps_[b | bit];
      amps_[b] = m00 * a0 + m01 * a1;
      amps_[b | bit] = m10 * a0 + m11 * a1;
    }
  }

  std::size_t n_;
  std::vector<Complex> amps_;
};

/// Runs c from |0...0>.
inline StateVector run(const Circuit& c, BackendCounters* counters = nullptr,
                       std::size_t cap = kStateVectorCap) {
  StateVector s(c.num_qubits(), cap);
  for (const auto& g : c) s.apply(g);
  bump(&BackendCounters::statevector_runs, counters);
  return s;
}

/// <s|p|s> for one term (complex in general).
inline Complex expectation_term(const StateVector& s, const PauliTerm& p) {
  if (p.size() != s.num_qubits()) throw DimensionError("expectation: qubit count differs");
  const auto& a = s.amplitudes();
  const std::uint64_t flip = p.word.x_bits();
  Complex acc = 0.0;
  for (std::size_t b = 0; b < a.size(); ++b) {
    if (a[b] == 0.0) continue;
    acc += std::conj(a[b ^ flip]) * i_pow(basis_action_phase(p.word, b)) * a[b];
  }
  return p.coeff * acc;
}

/// <s|h|s> for Hermitian h; the imaginary residue is discarded.
inline double expectation(const StateVector& s, const PauliSum& h) {
  if (h.num_qubits() != s.num_qubits()) throw DimensionError("expectation: qubit count differs");
  if (!h.is_hermitian()) throw ContractError("expectation: operator is not Hermitian");
  Complex acc = 0.0;
  for (const auto& t : h) acc += expectation_term(s, t);
  return acc.real();
}

/// Outcome probabilities |amp|^2, renormalized.
inline std::vector<double> probabilities(const StateVector& s) {
  std::vector<double> p(s.dim());
  double total = 0.0;
  for (std::size_t b = 0; b < p.size(); ++b) total += p[b] = std::norm(s[b]);
  for (auto& v : p) v /= total;
  return p;
}

/// Draws `shots` basis indices from a discrete distribution.
inline std::vector<std::uint64_t> sample_distribution(const std::vector<double>& probs,
                                                      std::size_t shots, Rng& rng) {
  if (shots == 0) throw ContractError("sample: shots must be at least 1");
  std::vector<double> cdf(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cdf.begin());
  const double total = cdf.back();
  std::vector<std::uint64_t> out;
  out.reserve(shots);
  for (std::size_t k = 0; k < shots; ++k) {
    const double u = uniform01(rng) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
    if (idx >= cdf.size()) idx = cdf.size() - 1;
    // Never return a zero-probability outcome at a flat CDF segment.
    while (probs[idx] == 0.0 && idx > 0) --idx;
    out.push_back(idx);
  }
  return out;
}

inline std::vector<std::uint64_t> sample(const StateVector& s, std::size_t shots, Rng& rng) {
  return sample_distribution(probabilities(s), shots, rng);
}

struct GroundState {
  double energy = 0.0;
  std::vector<Complex> vector;
};

namespace detail {

inline void apply_hamiltonian(const PauliSum& h, const Eigen::VectorXcd& in,
                              Eigen::VectorXcd& out) {
  out.setZero(in.size());
  for (const auto& t : h) {
    const std::uint64_t flip = t.word.x_bits();
    for (Eigen::Index b = 0; b < in.size(); ++b) {
      out[static_cast<Eigen::Index>(static_cast<std::uint64_t>(b) ^ flip)] +=
          t.coeff * i_pow(basis_action_phase(t.word, static_cast<std::uint64_t>(b))) * in[b];
    }
  }
}

// Restarted Lanczos with full reorthogonalization, matrix-free.
inline GroundState lanczos_ground(const PauliSum& h, double tol = 1e-12) {
  const Eigen::Index dim = Eigen::Index{1} << h.num_qubits();
  const Eigen::Index max_basis = std::min<Eigen::Index>(dim, 160);
  Rng rng(0x5eed5eedULL);
  Eigen::VectorXcd start(dim);
  for (Eigen::Index i = 0; i < dim; ++i) start[i] = Complex(uniform01(rng) - 0.5, uniform01(rng) - 0.5);
  start.normalize();

  GroundState best;
  Eigen::VectorXcd w(dim);
  for (int restart = 0; restart < 50; ++restart) {
    std::vector<Eigen::VectorXcd> basis;
    std::vector<double> alpha, beta;
    basis.push_back(start);
    double residual = 0.0;
    Eigen::VectorXcd ritz;
    double theta = 0.0;
    for (Eigen::Index m = 0; m < max_basis; ++m) {
      apply_hamiltonian(h, basis.back(), w);
      const double a = basis.back().dot(w).real();
      alpha.push_back(a);
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& v : basis) w -= v * v.dot(w);
      }
      const double b = w.norm();
      const auto k = static_cast<Eigen::Index>(alpha.size());
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
      for (Eigen::Index i = 0; i < k; ++i) {
        t(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
      theta = es.eigenvalues()[0];
      const Eigen::VectorXd y = es.eigenvectors().col(0);
      residual = b * std::abs(y[k - 1]);
      if (residual < tol || b < 1e-14 || m + 1 == max_basis) {
        ritz = Eigen::VectorXcd::Zero(dim);
        for (Eigen::Index i = 0; i < k; ++i) ritz += basis[static_cast<std::size_t>(i)] * y[i];
        ritz.normalize();
        break;
      }
      beta.push_back(b);
      basis.push_back(w / b);
    }
    best.energy = theta;
    best.vector.assign(ritz.data(), ritz.data() + dim);
    if (residual < tol * 10) break;
    start = ritz;
  }
  return best;
}

}  // namespace detail

/**
 * Lowest eigenvalue of h and a ground vector. Dense Hermitian solve up to
 * 8 qubits, Lanczos beyond that.
 */
inline GroundState ground_energy(const PauliSum& h, std::size_t cap = kGroundStateCap) {
  const std::size_t n = h.num_qubits();
  if (n > cap) {
    throw ResourceError("ground_energy: " + std::to_string(n) +
                        " qubits exceeds cap " + std::to_string(cap));
  }
  if (!h.is_hermitian()) throw ContractError("ground_energy: operator is not Hermitian");
  if (n > 8) return detail::lanczos_ground(h);
  const Eigen::MatrixXcd m = dense_matrix(h, cap);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  GroundState g;
  g.energy = es.eigenvalues()[0];
  const Eigen::VectorXcd v = es.eigenvectors().col(0);
  g.vector.assign(v.data(), v.data() + v.size());
  return g;
}

}  // namespace cliffadapt
