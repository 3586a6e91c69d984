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

#include <atomic>
#include <cstdint>

namespace cliffadapt {

/// Plain copy of BackendCounters at one point in time.
struct CounterSnapshot {
  std::uint64_t statevector_runs = 0;
  std::uint64_t stabilizer_runs = 0;
  std::uint64_t lowrank_evolutions = 0;

  friend CounterSnapshot operator-(const CounterSnapshot& a,
                                   const CounterSnapshot& b) {
    return {a.statevector_runs - b.statevector_runs,
            a.stabilizer_runs - b.stabilizer_runs,
            a.lowrank_evolutions - b.lowrank_evolutions};
  }
};

/**
 * Instrumentation for simulator invocations. Simulators bump these when a
 * pointer is passed in; a null pointer disables counting.
 */
struct BackendCounters {
  std::atomic<std::uint64_t> statevector_runs{0};
  std::atomic<std::uint64_t> stabilizer_runs{0};
  std::atomic<std::uint64_t> lowrank_evolutions{0};

  CounterSnapshot snapshot() const noexcept {
    return {statevector_runs.load(), stabilizer_runs.load(),
            lowrank_evolutions.load()};
  }
};

inline void bump(std::atomic<std::uint64_t> BackendCounters::*field,
                 BackendCounters* c) noexcept {
  if (c != nullptr) (c->*field).fetch_add(1, std::memory_order_relaxed);
}

}  // namespace cliffadapt
