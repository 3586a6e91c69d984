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

#include <stdexcept>
#include <string>

namespace cliffadapt {

/** Operand sizes (qubit counts, bitstring lengths) do not agree. */
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/** A simulation or enumeration would exceed its configured size cap. */
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/** A precondition of an operation was violated by the caller. */
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/** Malformed configuration, CLI input or data file. */
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/** A mixer whose exponential does not factor into per-term rotations. */
class NonFactorizableMixerError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/** Pruning left no stabilizer branch to evaluate. */
class DegenerateApproximationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cliffadapt
