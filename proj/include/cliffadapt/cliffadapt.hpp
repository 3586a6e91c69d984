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

#include "cliffadapt/adapt.hpp"
#include "cliffadapt/circuit.hpp"
#include "cliffadapt/counters.hpp"
#include "cliffadapt/error.hpp"
#include "cliffadapt/harness.hpp"
#include "cliffadapt/lowrank.hpp"
#include "cliffadapt/optimizers.hpp"
#include "cliffadapt/parallel.hpp"
#include "cliffadapt/pauli.hpp"
#include "cliffadapt/problems.hpp"
#include "cliffadapt/random.hpp"
#include "cliffadapt/stabilizer.hpp"
#include "cliffadapt/statevector.hpp"
