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
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cliffadapt/circuit.hpp"
#include "cliffadapt/counters.hpp"
#include "cliffadapt/error.hpp"
#include "cliffadapt/lowrank.hpp"
#include "cliffadapt/optimizers.hpp"
#include "cliffadapt/parallel.hpp"
#include "cliffadapt/pauli.hpp"
#include "cliffadapt/random.hpp"
#include "cliffadapt/stabilizer.hpp"
#include "cliffadapt/statevector.hpp"

namespace cliffadapt {

// ---------------------------------------------------------------------------
// Operator pools

enum class PoolTag { Qaoa, Single, Multi };

inline std::string_view to_string(PoolTag t) {
  switch (t) {
    case PoolTag::Qaoa: return "qaoa";
    case PoolTag::Single: return "single";
    case PoolTag::Multi: return "multi";
  }
  return "?";
}

inline PoolTag pool_tag_from_string(std::string_view s) {
  if (s == "qaoa") return PoolTag::Qaoa;
  if (s == "single") return PoolTag::Single;
  if (s == "multi") return PoolTag::Multi;
  throw ConfigError("unknown pool tag '" + std::string(s) + "'");
}

struct OperatorPool {
  PoolTag tag = PoolTag::Multi;
  std::vector<PauliSum> ops;

  std::size_t size() const noexcept { return ops.size(); }
};

namespace detail {

inline PauliSum uniform_sum(std::size_t n, Pauli p) {
  std::vector<PauliTerm> t;
  for (std::size_t q = 0; q < n; ++q) t.push_back({PauliString::single(n, q, p), 1.0});
  return PauliSum(n, std::move(t));
}

}  // namespace detail

/**
 * qaoa: {sum X}. single: X_0, Y_0, X_1, Y_1, ..., then sum X, sum Y.
 * multi: the single-qubit words, then B_i C_j for i < j with B, C in
 * {X, Y, Z} in lexicographic order, then the two sums.
 */
inline OperatorPool build_pool(PoolTag tag, std::size_t n) {
  if (n == 0) throw ContractError("build_pool: need at least one qubit");
  if (tag == PoolTag::Multi && n < 2) throw ContractError("build_pool: multi pool needs n >= 2");
  OperatorPool pool{tag, {}};
  if (tag == PoolTag::Qaoa) {
    pool.ops.push_back(detail::uniform_sum(n, Pauli::X));
    return pool;
  }
  for (std::size_t q = 0; q < n; ++q) {
    for (Pauli p : {Pauli::X, Pauli::Y}) {
      pool.ops.push_back(PauliSum(n, {{PauliString::single(n, q, p), 1.0}}));
    }
  }
  if (tag == PoolTag::Multi) {
    const Pauli letters[] = {Pauli::X, Pauli::Y, Pauli::Z};
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        for (Pauli b : letters) {
          for (Pauli c : letters) {
            PauliString w(n);
            w.set(i, b);
            w.set(j, c);
            pool.ops.push_back(PauliSum(n, {{w, 1.0}}));
          }
        }
      }
    }
  }
  pool.ops.push_back(detail::uniform_sum(n, Pauli::X));
  pool.ops.push_back(detail::uniform_sum(n, Pauli::Y));
  return pool;
}

/// Gate family a mixer lowers to: RX/RY/RZ for one-qubit words, RZZ for
/// two-qubit words, PoolSum for multi-term operators.
inline std::string mixer_family(const PauliSum& m) {
  if (m.size() != 1) return "PoolSum";
  const PauliString& w = m.begin()->word;
  if (w.weight() == 2) return "RZZ";
  if (w.weight() == 1) {
    for (std::size_t q = 0; q < w.size(); ++q) {
      switch (w.at(q)) {
        case Pauli::X: return "RX";
        case Pauli::Y: return "RY";
        case Pauli::Z: return "RZ";
        default: break;
      }
    }
  }
  return "PauliWord";
}

inline const std::vector<std::string>& census_families() {
  static const std::vector<std::string> f{"RZZ", "RX", "RY", "RZ", "PoolSum", "PauliWord"};
  return f;
}

// ---------------------------------------------------------------------------
// Gradient and selection

enum class GradientBackend { Exact, Clifford };
enum class SelectionStrategy { MaxAbs, Random };

inline std::string_view to_string(GradientBackend b) {
  return b == GradientBackend::Exact ? "exact" : "clifford";
}
inline GradientBackend gradient_backend_from_string(std::string_view s) {
  if (s == "exact") return GradientBackend::Exact;
  if (s == "clifford") return GradientBackend::Clifford;
  throw ConfigError("unknown gradient backend '" + std::string(s) + "'");
}
inline std::string_view to_string(SelectionStrategy s) {
  return s == SelectionStrategy::MaxAbs ? "max_abs" : "random";
}
inline SelectionStrategy selection_from_string(std::string_view s) {
  if (s == "max_abs") return SelectionStrategy::MaxAbs;
  if (s == "random") return SelectionStrategy::Random;
  throw ConfigError("unknown selection strategy '" + std::string(s) + "'");
}

/// One ADAPT iteration.
struct IterationRecord {
  std::size_t selected = 0;
  std::string op;
  std::string family;
  double gradient_norm = 0.0;  // infinity norm
  std::vector<double> gradient;
  double energy = 0.0;  // best objective value after SPSA
  std::vector<double> params;
  double wall_ms = 0.0;
};

struct AdaptState {
  Ansatz ansatz;
  std::vector<IterationRecord> history;
  double gamma0 = 0.01;
};

/// Commutators [H_C, A_j] for a fixed cost, shared across iterations.
struct GradientContext {
  PauliSum cost;
  std::vector<PauliSum> commutators;

  GradientContext(PauliSum h, const OperatorPool& pool) : cost(std::move(h)) {
    commutators.reserve(pool.size());
    for (const auto& a : pool.ops) commutators.push_back(commutator(cost, a));
  }
};

/// Circuit for e^{-i H_C gamma0} |psi^{k-1}>.
inline Circuit gradient_circuit(const AdaptState& st) {
  Circuit c = build_circuit(st.ansatz);
  append_evolution(c, st.ansatz.cost(), st.gamma0);
  return c;
}

/**
 * Entry j is -i <phi|[H_C, A_j]|phi> with |phi> = e^{-i H_C gamma0}|psi^{k-1}>.
 * The clifford backend evaluates the transpiled (grid-projected) circuit on
 * the tableau simulator and never touches a state vector.
 */
inline std::vector<double> pool_gradient(const AdaptState& st, const GradientContext& ctx,
                                         GradientBackend backend, std::size_t workers = 1,
                                         BackendCounters* counters = nullptr) {
  const Circuit c = gradient_circuit(st);
  std::vector<double> g(ctx.commutators.size(), 0.0);
  auto term_sum = [&](auto&& expect) {
    parallel_for(g.size(), workers, [&](std::size_t j) {
      Complex acc = 0.0;
      for (const auto& t : ctx.commutators[j]) acc += t.coeff * expect(t.word);
      g[j] = (Complex(0.0, -1.0) * acc).real();
    });
  };
  if (backend == GradientBackend::Exact) {
    const StateVector phi = run(c, counters);
    term_sum([&](const PauliString& p) { return expectation_term(phi, {p, 1.0}); });
  } else {
    const StabilizerState phi = run_stabilizer(transpile_to_clifford(c), PhaseTracking::Off, counters);
    term_sum([&](const PauliString& p) { return phi.expectation_phase(p); });
  }
  return g;
}

inline std::vector<double> pool_gradient(const AdaptState& st, const OperatorPool& pool,
                                         GradientBackend backend, std::size_t workers = 1,
                                         BackendCounters* counters = nullptr) {
  return pool_gradient(st, GradientContext(st.ansatz.cost(), pool), backend, workers, counters);
}

/// max_abs: argmax |g_j| with ties to the lowest index. random: uniform.
inline std::size_t select_operator(const std::vector<double>& g, SelectionStrategy s, Rng& rng) {
  if (g.empty()) throw ContractError("select_operator: empty gradient");
  if (s == SelectionStrategy::Random) return uniform_index(rng, g.size());
  std::size_t best = 0;
  for (std::size_t j = 1; j < g.size(); ++j) {
    if (std::abs(g[j]) > std::abs(g[best])) best = j;
  }
  return best;
}

inline double inf_norm(const std::vector<double>& g) {
  double m = 0.0;
  for (double v : g) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------
// Energy evaluation backends

struct EvaluationOptions {
  std::optional<double> delta;  // unset: state vector; set: low-rank branches
  std::size_t shots = 0;        // 0: exact expectation
};

namespace detail {

// Shot estimate: the diagonal part from one shared Z-basis sample set, every
// other term from its own +-1 outcome draws.
inline double shot_energy(const PauliSum& h, const std::vector<double>& probs,
                          const std::function<Complex(const PauliString&)>& expect,
                          std::size_t shots, Rng& rng) {
  const std::vector<std::uint64_t> xs = sample_distribution(probs, shots, rng);
  const double inv = 1.0 / static_cast<double>(shots);
  double e = 0.0;
  for (const auto& t : h) {
    const double c = t.coeff.real();
    if (t.word.is_identity()) {
      e += c;
    } else if (t.word.x_bits() == 0) {
      double s = 0.0;
      for (auto x : xs) s += (std::popcount(x & t.word.z_bits()) & 1) ? -1.0 : 1.0;
      e += c * s * inv;
    } else {
      const double p_plus = std::clamp(0.5 * (1.0 + expect(t.word).real()), 0.0, 1.0);
      std::size_t plus = 0;
      for (std::size_t k = 0; k < shots; ++k) plus += uniform01(rng) < p_plus ? 1 : 0;
      e += c * (2.0 * static_cast<double>(plus) * inv - 1.0);
    }
  }
  return e;
}

}  // namespace detail

/**
 * <psi(params)|H_C|psi(params)> on the configured backend. Low-rank runs
 * merge equivalent branches and skip global-phase tracking, neither of which
 * changes the value.
 */
inline double evaluate_energy(const Ansatz& a, const EvaluationOptions& opt,
                              BackendCounters* counters = nullptr, Rng* sampling = nullptr) {
  const Circuit c = build_circuit(a);
  const PauliSum& h = a.cost();
  if (opt.shots > 0 && sampling == nullptr) throw ContractError("evaluate_energy: shots need an RNG");
  if (!opt.delta) {
    const StateVector s = run(c, counters);
    if (opt.shots == 0) return expectation(s, h);
    return detail::shot_energy(h, probabilities(s),
                               [&](const PauliString& p) { return expectation_term(s, {p, 1.0}); },
                               opt.shots, *sampling);
  }
  EvolveOptions eo;
  eo.merge = true;
  eo.track_phase = opt.shots > 0;
  const BranchSum bs = evolve(c, *opt.delta, eo, counters);
  if (opt.shots == 0) return expectation(bs, h);
  StateVector psi = to_statevector(bs, kGroundStateCap);
  const double nrm = psi.norm();
  for (auto& z : psi.amplitudes()) z /= nrm;
  return detail::shot_energy(h, probabilities(psi),
                             [&](const PauliString& p) { return expectation_term(psi, {p, 1.0}); },
                             opt.shots, *sampling);
}

/// Exact energy of the grid-projected circuit, via the tableau simulator.
inline double clifford_energy(const Ansatz& a, BackendCounters* counters = nullptr) {
  const StabilizerState s =
      run_stabilizer(transpile_to_clifford(build_circuit(a)), PhaseTracking::Off, counters);
  return expectation(s, a.cost());
}

// ---------------------------------------------------------------------------
// ADAPT loop

struct AdaptConfig {
  PoolTag pool = PoolTag::Multi;
  SelectionStrategy selection = SelectionStrategy::MaxAbs;
  GradientBackend gradient = GradientBackend::Exact;
  double gamma0 = 0.01;
  double threshold = 1e-3;
  std::size_t max_iters = 10;
  SpsaOptions spsa;
  PreoptMethod preopt = PreoptMethod::Skip;
  OptimizerBudget preopt_budget;
  PreoptOptions preopt_options;
  EvaluationOptions evaluation;
  std::size_t workers = 1;
  ReferenceState reference = ReferenceState::PlusAll;
};

enum class StopReason { MaxIterations, GradientThreshold, Error };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::GradientThreshold: return "gradient_threshold";
    case StopReason::Error: return "error";
  }
  return "?";
}

struct AdaptResult {
  AdaptState state;
  double initial_energy = 0.0;  // reference state, exact
  double final_energy = 0.0;    // objective value on the evaluation backend
  StopReason stop = StopReason::MaxIterations;
  std::string error;
  CounterSnapshot counters;
  CounterSnapshot selection_counters;  // accumulated over gradient phases only
  std::size_t preopt_evaluations = 0;
  std::vector<double> preopt_point;  // grid angles handed to SPSA, if any
};

/// Raised by adapt_run with the history completed so far.
class AdaptFailure : public std::runtime_error {
 public:
  AdaptFailure(const std::string& what, AdaptResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const AdaptResult& partial() const noexcept { return partial_; }

 private:
  AdaptResult partial_;
};

/**
 * Runs ADAPT-QAOA on cost H_C: each iteration computes the pool gradient at
 * e^{-i H_C gamma0}|psi^{k-1}>, stops if its infinity norm is below the
 * threshold, appends the selected mixer with (gamma0, 0), optionally
 * pre-optimizes the first layer on the Clifford grid, and re-optimizes all
 * parameters with SPSA.
 */
inline AdaptResult adapt_run(const PauliSum& cost, const AdaptConfig& cfg, std::uint64_t seed,
                             BackendCounters* external = nullptr) {
  BackendCounters local;
  BackendCounters* counters = external ? external : &local;
  const CounterSnapshot start = counters->snapshot();
  const std::size_t n = cost.num_qubits();
  const OperatorPool pool = build_pool(cfg.pool, n);
  const GradientContext ctx(cost, pool);

  Rng spsa_rng = make_rng(seed, SeedLane::Spsa);
  Rng discrete_rng = make_rng(seed, SeedLane::Discrete);
  Rng sampling_rng = make_rng(seed, SeedLane::Sampling);
  Rng selection_rng = make_rng(seed, SeedLane::Selection);

  AdaptResult res;
  res.state.ansatz = Ansatz(cost, {}, {}, cfg.reference);
  res.state.gamma0 = cfg.gamma0;
  auto energy = [&](const Ansatz& a) {
    return evaluate_energy(a, cfg.evaluation, counters, &sampling_rng);
  };

  try {
    res.initial_energy = evaluate_energy(res.state.ansatz, EvaluationOptions{});
    res.final_energy = energy(res.state.ansatz);
    for (std::size_t k = 0; k < cfg.max_iters; ++k) {
      const auto t0 = std::chrono::steady_clock::now();
      IterationRecord rec;
      const CounterSnapshot before = counters->snapshot();
      rec.gradient = pool_gradient(res.state, ctx, cfg.gradient, cfg.workers, counters);
      const CounterSnapshot used = counters->snapshot() - before;
      res.selection_counters.statevector_runs += used.statevector_runs;
      res.selection_counters.stabilizer_runs += used.stabilizer_runs;
      res.selection_counters.lowrank_evolutions += used.lowrank_evolutions;
      rec.gradient_norm = inf_norm(rec.gradient);
      if (rec.gradient_norm < cfg.threshold) {
        res.stop = StopReason::GradientThreshold;
        break;
      }
      rec.selected = select_operator(rec.gradient, cfg.selection, selection_rng);
      const PauliSum& op = pool.ops[rec.selected];
      rec.op = op.str();
      rec.family = mixer_family(op);
      res.state.ansatz.append_layer(op, {cfg.gamma0, 0.0});

      std::vector<double> x0 = res.state.ansatz.flat_params();
      if (k == 0 && cfg.preopt != PreoptMethod::Skip) {
        DiscreteProblem dp;
        dp.dim = 2;
        dp.workers = cfg.workers;
        const Ansatz base = res.state.ansatz;
        dp.objective = [&base](const CliffordPointVector& v) {
          return clifford_energy(base.with_flat_params(v.angles()));
        };
        const DiscreteResult d = preoptimize(dp, cfg.preopt, cfg.preopt_budget, discrete_rng,
                                             cfg.preopt_options);
        res.preopt_evaluations = d.evaluations;
        res.preopt_point = d.best.angles();
        x0 = res.preopt_point;
      }

      const Ansatz shape = res.state.ansatz;
      SpsaOptions so = cfg.spsa;
      const ContinuousResult opt = spsa_minimize(
          [&](const std::vector<double>& x) { return energy(shape.with_flat_params(x)); }, x0,
          so, spsa_rng);
      if (opt.aborted || opt.x.empty()) throw std::runtime_error("SPSA aborted: non-finite energy");
      res.state.ansatz.set_flat_params(opt.x);
      rec.energy = opt.value;
      rec.params = opt.x;
      rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      res.final_energy = opt.value;
      res.state.history.push_back(std::move(rec));
    }
  } catch (const std::exception& e) {
    res.stop = StopReason::Error;
    res.error = e.what();
    res.counters = counters->snapshot() - start;
    throw AdaptFailure(e.what(), std::move(res));
  }
  res.counters = counters->snapshot() - start;
  return res;
}

// ---------------------------------------------------------------------------
// Census

using Census = std::map<std::string, std::size_t>;

inline Census empty_census() {
  Census c;
  for (const auto& f : census_families()) c[f] = 0;
  return c;
}

/// Histogram of selected mixer families over a list of histories.
inline Census gate_selection_census(const std::vector<std::vector<std::string>>& families) {
  if (families.empty()) throw ContractError("gate_selection_census: no records");
  Census c = empty_census();
  for (const auto& run : families) {
    for (const auto& f : run) ++c[f];
  }
  return c;
}

inline std::vector<std::string> families_of(const AdaptState& st) {
  std::vector<std::string> out;
  for (const auto& m : st.ansatz.mixers()) out.push_back(mixer_family(m));
  return out;
}

}  // namespace cliffadapt
