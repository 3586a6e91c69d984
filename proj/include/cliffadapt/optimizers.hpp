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
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cliffadapt/circuit.hpp"
#include "cliffadapt/error.hpp"
#include "cliffadapt/parallel.hpp"
#include "cliffadapt/random.hpp"

namespace cliffadapt {

// ---------------------------------------------------------------------------
// SPSA

struct SpsaOptions {
  std::size_t iters = 300;
  double a = 0.2;
  double c = 0.1;
  double A = 30.0;
  double alpha = 0.602;
  double gamma = 0.101;
};

struct ContinuousResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> trace;  // best value after each iteration
  std::size_t evaluations = 0;
  bool aborted = false;  // objective returned a non-finite value
};

using ContinuousObjective = std::function<double(const std::vector<double>&)>;

/**
 * Simultaneous-perturbation stochastic approximation. Each iteration draws a
 * Rademacher direction d, evaluates f(x + c_k d) and f(x - c_k d), and steps
 * x -= a_k (f+ - f-) / (2 c_k) * d. The final iterate is evaluated once more;
 * the best evaluated point is returned.
 */
inline ContinuousResult spsa_minimize(const ContinuousObjective& f, std::vector<double> x,
                                      const SpsaOptions& opt, Rng& rng) {
  if (opt.iters < 1) throw ContractError("spsa_minimize: iters must be at least 1");
  ContinuousResult res;
  res.trace.reserve(opt.iters);
  auto consider = [&](const std::vector<double>& p, double v) {
    ++res.evaluations;
    if (!std::isfinite(v)) {
      res.aborted = true;
      return false;
    }
    if (v < res.value) {
      res.value = v;
      res.x = p;
    }
    return true;
  };
  const std::size_t d = x.size();
  std::vector<double> dir(d), xp(d), xm(d);
  for (std::size_t k = 0; k < opt.iters; ++k) {
    const double kk = static_cast<double>(k);
    const double ak = opt.a / std::pow(opt.A + kk + 1.0, opt.alpha);
    const double ck = opt.c / std::pow(kk + 1.0, opt.gamma);
    for (std::size_t i = 0; i < d; ++i) {
      dir[i] = coin(rng) ? 1.0 : -1.0;
      xp[i] = x[i] + ck * dir[i];
      xm[i] = x[i] - ck * dir[i];
    }
    const double fp = f(xp);
    if (!consider(xp, fp)) return res;
    const double fm = f(xm);
    if (!consider(xm, fm)) return res;
    const double g = (fp - fm) / (2.0 * ck);
    for (std::size_t i = 0; i < d; ++i) x[i] -= ak * g * dir[i];
    res.trace.push_back(res.value);
  }
  const double fx = f(x);
  if (consider(x, fx) && !res.trace.empty()) res.trace.back() = res.value;
  return res;
}

// ---------------------------------------------------------------------------
// Discrete Clifford-point search

/// Objective over grid vectors. Must be safe to call concurrently when
/// `workers` > 1.
struct DiscreteProblem {
  std::size_t dim = 0;
  std::function<double(const CliffordPointVector&)> objective;
  std::size_t workers = 1;
};

struct DiscreteResult {
  CliffordPointVector best;
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> trace;  // best-seen value, starting with the start point
  std::size_t evaluations = 0;
};

/// Moves one uniformly chosen coordinate one grid step up or down (cyclic).
inline CliffordPointVector grid_neighbor(const CliffordPointVector& v, Rng& rng) {
  CliffordPointVector out = v;
  if (v.size() == 0) return out;
  const std::size_t i = uniform_index(rng, v.size());
  out.set_index(i, v.index(i) + (coin(rng) ? 1 : -1));
  return out;
}

namespace detail {

inline void check_start(const DiscreteProblem& p, const CliffordPointVector& start) {
  if (start.size() != p.dim) throw DimensionError("optimizer: start vector has wrong dimension");
  if (!p.objective) throw ContractError("optimizer: objective not set");
}

// Walk with a pluggable acceptance rule; shared by the single-trajectory
// methods.
template <typename Accept>
DiscreteResult walk(const DiscreteProblem& p, const CliffordPointVector& start,
                    std::size_t iters, Rng& rng, Accept&& accept) {
  check_start(p, start);
  DiscreteResult r;
  CliffordPointVector cur = start;
  double fcur = p.objective(cur);
  r.evaluations = 1;
  r.best = cur;
  r.value = fcur;
  r.trace.push_back(fcur);
  for (std::size_t k = 0; k < iters; ++k) {
    CliffordPointVector cand = grid_neighbor(cur, rng);
    const double fc = p.objective(cand);
    ++r.evaluations;
    if (accept(fc, fcur, k)) {
      cur = std::move(cand);
      fcur = fc;
    }
    if (fcur < r.value) {
      r.value = fcur;
      r.best = cur;
    }
    r.trace.push_back(r.value);
  }
  return r;
}

}  // namespace detail

/// Descent: a neighbor replaces the current point only if strictly better.
inline DiscreteResult hill_climb(const DiscreteProblem& p, const CliffordPointVector& start,
                                 std::size_t iters, Rng& rng) {
  return detail::walk(p, start, iters, rng,
                      [](double fc, double fcur, std::size_t) { return fc < fcur; });
}

/// Accepts any neighbor that is not worse.
inline DiscreteResult random_local_search(const DiscreteProblem& p,
                                          const CliffordPointVector& start,
                                          std::size_t iters, Rng& rng) {
  return detail::walk(p, start, iters, rng,
                      [](double fc, double fcur, std::size_t) { return fc <= fcur; });
}

struct AnnealingSchedule {
  double t0 = 1.0;
  double ratio = 0.95;
};

/**
 * Metropolis walk with T_k = t0 * ratio^k. Proposals come from `rng` exactly
 * as in hill_climb; acceptance draws use a second stream seeded from it.
 */
inline DiscreteResult simulated_annealing(const DiscreteProblem& p,
                                          const CliffordPointVector& start, std::size_t iters,
                                          const AnnealingSchedule& sched, Rng& rng) {
  if (!(sched.t0 > 0.0) || !(sched.ratio > 0.0)) {
    throw ContractError("simulated_annealing: schedule must be positive");
  }
  Rng peek = rng;
  Rng accept_rng(splitmix64(peek() ^ 0x243f6a8885a308d3ULL));
  return detail::walk(p, start, iters, rng, [&](double fc, double fcur, std::size_t k) {
    const double delta = fc - fcur;
    if (delta < 0.0) return true;
    const double t = sched.t0 * std::pow(sched.ratio, static_cast<double>(k));
    return uniform01(accept_rng) < std::exp(-delta / t);
  });
}

struct AntColonyOptions {
  std::size_t colony = 8;
  double evaporation = 0.1;
};

/**
 * Pheromone-guided sampling over (coordinate x grid value). Each round every
 * ant draws a vector with per-coordinate probabilities proportional to the
 * pheromone row; after evaporation each ant deposits 1/(1 + f - best) on
 * its choices.
 */
inline DiscreteResult ant_colony(const DiscreteProblem& p, const CliffordPointVector& start,
                                 std::size_t iters, const AntColonyOptions& opt, Rng& rng,
                                 std::vector<std::array<double, 4>>* pheromone_out = nullptr) {
  detail::check_start(p, start);
  if (opt.colony < 1) throw ContractError("ant_colony: colony size must be at least 1");
  if (!(opt.evaporation >= 0.0) || !(opt.evaporation < 1.0)) {
    throw ContractError("ant_colony: evaporation must lie in [0, 1)");
  }
  DiscreteResult r;
  r.best = start;
  r.value = p.objective(start);
  r.evaluations = 1;
  r.trace.push_back(r.value);
  std::vector<std::array<double, 4>> tau(p.dim, {1.0, 1.0, 1.0, 1.0});
  std::vector<CliffordPointVector> ants(opt.colony, CliffordPointVector(p.dim));
  std::vector<double> vals(opt.colony);
  for (std::size_t k = 0; k < iters; ++k) {
    for (auto& a : ants) {
      for (std::size_t i = 0; i < p.dim; ++i) {
        const auto& row = tau[i];
        double u = uniform01(rng) * (row[0] + row[1] + row[2] + row[3]);
        int v = 0;
        while (v < 3 && u >= row[static_cast<std::size_t>(v)]) u -= row[static_cast<std::size_t>(v++)];
        a.set_index(i, v);
      }
    }
    parallel_for(ants.size(), p.workers, [&](std::size_t a) { vals[a] = p.objective(ants[a]); });
    r.evaluations += ants.size();
    for (std::size_t a = 0; a < ants.size(); ++a) {
      if (vals[a] < r.value) {
        r.value = vals[a];
        r.best = ants[a];
      }
    }
    for (auto& row : tau) {
      for (auto& t : row) t *= 1.0 - opt.evaporation;
    }
    for (std::size_t a = 0; a < ants.size(); ++a) {
      const double dep = 1.0 / (1.0 + vals[a] - r.value);
      for (std::size_t i = 0; i < p.dim; ++i) tau[i][static_cast<std::size_t>(ants[a].index(i))] += dep;
    }
    r.trace.push_back(r.value);
  }
  if (pheromone_out) *pheromone_out = std::move(tau);
  return r;
}

struct DifferentialEvolutionOptions {
  std::size_t population = 16;
  double f = 0.8;
  double cr = 0.9;
};

/**
 * DE/rand/1/bin on grid indices: mutant = x_r1 + F (x_r2 - x_r3), rounded to
 * the nearest index and wrapped mod 4. A trial replaces its parent when not
 * worse. `initial` overrides the population (start point first, the rest
 * uniform random by default).
 */
inline DiscreteResult differential_evolution(const DiscreteProblem& p,
                                             const CliffordPointVector& start, std::size_t iters,
                                             const DifferentialEvolutionOptions& opt, Rng& rng,
                                             std::vector<CliffordPointVector> initial = {}) {
  detail::check_start(p, start);
  const std::size_t np = initial.empty() ? opt.population : initial.size();
  if (np < 4) throw ContractError("differential_evolution: population must be at least 4");
  std::vector<CliffordPointVector> pop = std::move(initial);
  if (pop.empty()) {
    pop.push_back(start);
    while (pop.size() < np) {
      CliffordPointVector v(p.dim);
      for (std::size_t i = 0; i < p.dim; ++i) v.set_index(i, static_cast<int>(uniform_index(rng, 4)));
      pop.push_back(std::move(v));
    }
  }
  for (const auto& v : pop) {
    if (v.size() != p.dim) throw DimensionError("differential_evolution: population dimension");
  }
  std::vector<double> fit(np);
  parallel_for(np, p.workers, [&](std::size_t i) { fit[i] = p.objective(pop[i]); });
  DiscreteResult r;
  r.evaluations = np;
  for (std::size_t i = 0; i < np; ++i) {
    if (fit[i] < r.value) {
      r.value = fit[i];
      r.best = pop[i];
    }
  }
  r.trace.push_back(r.value);
  std::vector<CliffordPointVector> trial(np, CliffordPointVector(p.dim));
  std::vector<double> tfit(np);
  for (std::size_t k = 0; k < iters; ++k) {
    for (std::size_t i = 0; i < np; ++i) {
      std::size_t r1, r2, r3;
      do r1 = uniform_index(rng, np); while (r1 == i);
      do r2 = uniform_index(rng, np); while (r2 == i || r2 == r1);
      do r3 = uniform_index(rng, np); while (r3 == i || r3 == r1 || r3 == r2);
      const std::size_t jrand = p.dim ? uniform_index(rng, p.dim) : 0;
      for (std::size_t j = 0; j < p.dim; ++j) {
        if (j == jrand || uniform01(rng) < opt.cr) {
          const double m = pop[r1].index(j) + opt.f * (pop[r2].index(j) - pop[r3].index(j));
          trial[i].set_index(j, static_cast<int>(std::lround(m)));
        } else {
          trial[i].set_index(j, pop[i].index(j));
        }
      }
    }
    parallel_for(np, p.workers, [&](std::size_t i) { tfit[i] = p.objective(trial[i]); });
    r.evaluations += np;
    for (std::size_t i = 0; i < np; ++i) {
      if (tfit[i] <= fit[i]) {
        pop[i] = trial[i];
        fit[i] = tfit[i];
      }
      if (fit[i] < r.value) {
        r.value = fit[i];
        r.best = pop[i];
      }
    }
    r.trace.push_back(r.value);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Pre-optimization driver

enum class PreoptMethod { Skip, HillClimb, SimulatedAnnealing, RandomLocalSearch, AntColony, DifferentialEvolution };

inline std::string_view to_string(PreoptMethod m) {
  switch (m) {
    case PreoptMethod::Skip: return "skip";
    case PreoptMethod::HillClimb: return "hill_climb";
    case PreoptMethod::SimulatedAnnealing: return "simulated_annealing";
    case PreoptMethod::RandomLocalSearch: return "random_local_search";
    case PreoptMethod::AntColony: return "ant_colony";
    case PreoptMethod::DifferentialEvolution: return "differential_evolution";
  }
  return "?";
}

inline PreoptMethod preopt_method_from_string(std::string_view s) {
  for (auto m : {PreoptMethod::Skip, PreoptMethod::HillClimb, PreoptMethod::SimulatedAnnealing,
                 PreoptMethod::RandomLocalSearch, PreoptMethod::AntColony,
                 PreoptMethod::DifferentialEvolution}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown pre-optimization method '" + std::string(s) + "'");
}

struct OptimizerBudget {
  std::size_t outer_iters = 10;
  std::size_t fine_tune_iters = 5;
  std::size_t spsa_iters = 300;
};

struct PreoptOptions {
  AnnealingSchedule annealing;
  AntColonyOptions ants;
  DifferentialEvolutionOptions de;
};

/**
 * Runs `method` for budget.outer_iters from the all-zero grid vector, then
 * budget.fine_tune_iters of hill_climb from its best point. Skip returns the
 * zero vector without evaluating anything.
 */
inline DiscreteResult preoptimize(const DiscreteProblem& p, PreoptMethod method,
                                  const OptimizerBudget& budget, Rng& rng,
                                  const PreoptOptions& opt = {}) {
  const CliffordPointVector zero(p.dim);
  if (method == PreoptMethod::Skip) {
    DiscreteResult r;
    r.best = zero;
    r.value = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  DiscreteResult r;
  const std::size_t it = budget.outer_iters;
  switch (method) {
    case PreoptMethod::HillClimb: r = hill_climb(p, zero, it, rng); break;
    case PreoptMethod::SimulatedAnnealing: r = simulated_annealing(p, zero, it, opt.annealing, rng); break;
    case PreoptMethod::RandomLocalSearch: r = random_local_search(p, zero, it, rng); break;
    case PreoptMethod::AntColony: r = ant_colony(p, zero, it, opt.ants, rng); break;
    case PreoptMethod::DifferentialEvolution: r = differential_evolution(p, zero, it, opt.de, rng); break;
    case PreoptMethod::Skip: break;
  }
  if (budget.fine_tune_iters == 0) return r;
  DiscreteResult fine = hill_climb(p, r.best, budget.fine_tune_iters, rng);
  // The fine-tune start re-evaluates r.best; count it but keep one trace.
  r.evaluations += fine.evaluations;
  for (std::size_t k = 1; k < fine.trace.size(); ++k) r.trace.push_back(std::min(r.value, fine.trace[k]));
  if (fine.value < r.value) {
    r.value = fine.value;
    r.best = fine.best;
  }
  return r;
}

}  // namespace cliffadapt
