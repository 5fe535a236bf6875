// Copyright 2026 The memopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>

namespace memopt {

/// Selects between the serial reference loop and the OpenMP kernel.
/// Every parallel kernel in the library keeps its serial twin so tests can
/// check one against the other.
enum class Exec { Serial, Parallel };

/// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
std::size_t hardware_threads() noexcept;

}  // namespace memopt
