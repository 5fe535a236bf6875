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

// Internal loop drivers shared by the enumeration kernels. `make_scratch` is
// called once per thread; `body(i, scratch)` must only touch its scratch and
// data owned by index i.

#pragma once

#include <cstdint>

#include "memopt/parallel.hpp"

namespace memopt::detail {

template <typename MakeScratch, typename Body>
std::uint64_t count_over(std::uint64_t n, Exec exec, MakeScratch make_scratch, Body body) {
  std::uint64_t total = 0;
  const auto count = static_cast<std::int64_t>(n);
  if (exec == Exec::Serial) {
    auto scratch = make_scratch();
    for (std::int64_t i = 0; i < count; ++i) total += body(i, scratch);
    return total;
  }
#pragma omp parallel reduction(+ : total)
  {
    auto scratch = make_scratch();
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) total += body(i, scratch);
  }
  return total;
}

template <typename MakeScratch, typename Body>
void for_each_index(std::uint64_t n, Exec exec, MakeScratch make_scratch, Body body) {
  const auto count = static_cast<std::int64_t>(n);
  if (exec == Exec::Serial) {
    auto scratch = make_scratch();
    for (std::int64_t i = 0; i < count; ++i) body(i, scratch);
    return;
  }
#pragma omp parallel
  {
    auto scratch = make_scratch();
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) body(i, scratch);
  }
}

}  // namespace memopt::detail
