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
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cliffadapt/error.hpp"
#include "cliffadapt/pauli.hpp"
#include "cliffadapt/random.hpp"
#include "cliffadapt/statevector.hpp"

namespace cliffadapt {

struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double w = 1.0;
};

/// Weighted undirected graph. Vertex i maps to qubit i.
class MaxCutInstance {
 public:
  MaxCutInstance() = default;
  MaxCutInstance(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    if (n_ > kMaxQubits) throw ResourceError("maxcut: at most 64 vertices");
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (auto& e : edges_) {
      if (e.i >= n_ || e.j >= n_) throw ConfigError("maxcut: edge endpoint out of range");
      if (e.i == e.j) throw ConfigError("maxcut: self loop on vertex " + std::to_string(e.i));
      if (!(e.w > 0.0) || !std::isfinite(e.w)) throw ConfigError("maxcut: edge weights must be positive");
      if (e.i > e.j) std::swap(e.i, e.j);
      if (!seen.emplace(e.i, e.j).second) {
        throw ConfigError("maxcut: duplicate edge " + std::to_string(e.i) + "-" + std::to_string(e.j));
      }
    }
  }

  std::size_t num_vertices() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  double total_weight() const noexcept {
    double s = 0.0;
    for (const auto& e : edges_) s += e.w;
    return s;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
};

/// sum_(ij) (w_ij / 2)(Z_i Z_j - I), with the offset kept as an identity term.
inline PauliSum maxcut_hamiltonian(const MaxCutInstance& m) {
  const std::size_t n = m.num_vertices();
  std::vector<PauliTerm> terms;
  for (const auto& e : m.edges()) {
    PauliString zz(n);
    zz.set(e.i, Pauli::Z);
    zz.set(e.j, Pauli::Z);
    terms.push_back({zz, 0.5 * e.w});
    terms.push_back({PauliString(n), -0.5 * e.w});
  }
  return PauliSum(n, std::move(terms));
}

/// Minus the weight of edges cut by x (bit i = side of vertex i).
inline double maxcut_cost(const MaxCutInstance& m, std::uint64_t x) {
  double c = 0.0;
  for (const auto& e : m.edges()) {
    if (((x >> e.i) ^ (x >> e.j)) & 1U) c -= e.w;
  }
  return c;
}

inline double maxcut_cost(const MaxCutInstance& m, std::string_view bits) {
  if (bits.size() != m.num_vertices()) throw DimensionError("maxcut_cost: bitstring length mismatch");
  return maxcut_cost(m, from_bitstring(bits));
}

struct CutResult {
  std::uint64_t bits = 0;
  double cost = 0.0;
};

inline constexpr std::size_t kBruteForceCap = 22;

/// Exhaustive minimum of maxcut_cost. The last vertex is pinned to side 0
/// since x and its complement cut the same edges.
inline CutResult brute_force_maxcut(const MaxCutInstance& m, std::size_t cap = kBruteForceCap) {
  const std::size_t n = m.num_vertices();
  if (n > cap) throw ResourceError("brute_force_maxcut: " + std::to_string(n) + " vertices exceeds cap");
  if (n == 0) return {};
  CutResult best{0, maxcut_cost(m, std::uint64_t{0})};
  const std::uint64_t half = std::uint64_t{1} << (n - 1);
  for (std::uint64_t x = 1; x < half; ++x) {
    const double c = maxcut_cost(m, x);
    if (c < best.cost) best = {x, c};
  }
  return best;
}

/// Single-flip descent from a random assignment until no flip improves.
inline CutResult greedy_maxcut(const MaxCutInstance& m, Rng& rng) {
  const std::size_t n = m.num_vertices();
  std::uint64_t x = 0;
  for (std::size_t q = 0; q < n; ++q) {
    if (coin(rng)) x |= std::uint64_t{1} << q;
  }
  double cost = maxcut_cost(m, x);
  for (;;) {
    std::size_t pick = n;
    double best = cost;
    for (std::size_t q = 0; q < n; ++q) {
      const double c = maxcut_cost(m, x ^ (std::uint64_t{1} << q));
      if (c < best - 1e-12) {
        best = c;
        pick = q;
      }
    }
    if (pick == n) break;
    x ^= std::uint64_t{1} << pick;
    cost = best;
  }
  return {x, cost};
}

inline constexpr std::string_view kInstanceGenerator = "fc-uniform-v1";

/// Fully connected graph with weights uniform in (0, 1].
inline MaxCutInstance random_maxcut(std::size_t n, Rng& rng) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0 - uniform01(rng)});
  }
  return MaxCutInstance(n, std::move(edges));
}

/// Transverse-field Ising model: sum_(i<j) w_ij Z_i Z_j + sum_i (gx X_i + gz Z_i).
struct TfimInstance {
  std::size_t n = 0;
  std::vector<std::vector<double>> w;  // symmetric, zero diagonal
  double gx = 0.0;
  double gz = 0.0;

  void validate() const {
    if (n > kMaxQubits) throw ResourceError("tfim: at most 64 sites");
    if (w.size() != n) throw ConfigError("tfim: coupling matrix must be n x n");
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i].size() != n) throw ConfigError("tfim: coupling matrix must be n x n");
      if (w[i][i] != 0.0) throw ConfigError("tfim: coupling diagonal must be zero");
      for (std::size_t j = 0; j < n; ++j) {
        if (w[i][j] != w[j][i]) throw ConfigError("tfim: coupling matrix must be symmetric");
      }
    }
    if (!std::isfinite(gx) || !std::isfinite(gz)) throw ConfigError("tfim: fields must be finite");
  }
};

inline TfimInstance ising_chain(std::size_t n, double w, double gx, double gz) {
  if (n < 2) throw ConfigError("ising_chain: need at least 2 sites");
  TfimInstance t{n, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)), gx, gz};
  for (std::size_t i = 0; i + 1 < n; ++i) t.w[i][i + 1] = t.w[i + 1][i] = w;
  return t;
}

/// TFIM whose couplings are the graph's edge weights.
inline TfimInstance tfim_from_graph(const MaxCutInstance& m, double gx, double gz) {
  const std::size_t n = m.num_vertices();
  TfimInstance t{n, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)), gx, gz};
  for (const auto& e : m.edges()) t.w[e.i][e.j] = t.w[e.j][e.i] = e.w;
  return t;
}

inline PauliSum tfim_hamiltonian(const TfimInstance& t) {
  t.validate();
  std::vector<PauliTerm> terms;
  for (std::size_t i = 0; i < t.n; ++i) {
    for (std::size_t j = i + 1; j < t.n; ++j) {
      if (t.w[i][j] == 0.0) continue;
      PauliString zz(t.n);
      zz.set(i, Pauli::Z);
      zz.set(j, Pauli::Z);
      terms.push_back({zz, t.w[i][j]});
    }
  }
  for (std::size_t i = 0; i < t.n; ++i) {
    if (t.gx != 0.0) terms.push_back({PauliString::single(t.n, i, Pauli::X), t.gx});
    if (t.gz != 0.0) terms.push_back({PauliString::single(t.n, i, Pauli::Z), t.gz});
  }
  return PauliSum(t.n, std::move(terms));
}

namespace detail {

inline std::string strip_comment(std::string line) {
  if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
  return line;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/**
 * Parses "i j w" lines (0-indexed, '#' starts a comment). The vertex count is
 * one past the largest index unless `n` is given.
 */
inline MaxCutInstance parse_graph(std::string_view text, std::size_t n = 0) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<Edge> edges;
  std::size_t lineno = 0, top = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(detail::strip_comment(line));
    long long i = 0, j = 0;
    double w = 0.0;
    if (!(ls >> i)) continue;
    std::string rest;
    if (!(ls >> j >> w) || (ls >> rest) || i < 0 || j < 0) {
      throw ConfigError("graph line " + std::to_string(lineno) + ": expected 'i j w'");
    }
    edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), w});
    top = std::max({top, static_cast<std::size_t>(i) + 1, static_cast<std::size_t>(j) + 1});
  }
  if (n != 0 && n < top) throw ConfigError("graph: vertex index exceeds declared size");
  return MaxCutInstance(n == 0 ? top : n, std::move(edges));
}

inline MaxCutInstance load_graph(const std::string& path, std::size_t n = 0) {
  return parse_graph(detail::read_file(path), n);
}

inline std::string format_graph(const MaxCutInstance& m) {
  std::string out;
  for (const auto& e : m.edges()) {
    out += std::to_string(e.i) + " " + std::to_string(e.j) + " " + detail::format_double(e.w) + "\n";
  }
  return out;
}

/// Whitespace-separated n x n coupling matrix, one row per line.
inline std::vector<std::vector<double>> parse_couplings(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::istringstream ls(detail::strip_comment(line));
    std::vector<double> row;
    double v = 0.0;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) throw ConfigError("coupling file: non-numeric entry");
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<std::vector<double>> load_couplings(const std::string& path) {
  return parse_couplings(detail::read_file(path));
}

}  // namespace cliffadapt
