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


// Serial reference against OpenMP for the enumeration kernels and the
// equivalence checker. Each benchmark takes the execution mode as its
// argument: 0 for serial, 1 for parallel.

#include <benchmark/benchmark.h>

#include "memopt/affine.hpp"
#include "memopt/dme.hpp"
#include "memopt/generators.hpp"
#include "memopt/interp.hpp"

namespace {

using namespace memopt;
using affine::IntBox;
using affine::QuasiAffineMap;

Exec mode(const benchmark::State& state) { return state.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

// Row-major flattening of a 64x64x16 box: 65536 points.
QuasiAffineMap flatten() {
  return QuasiAffineMap::affine(IntBox({0, 0, 0}, {64, 64, 16}), {{1024, 16, 1}}, {0});
}

void BM_RoundTrip(benchmark::State& state) {
  const QuasiAffineMap map = flatten();
  const QuasiAffineMap inverse = affine::reverse(map).map();
  for (auto _ : state) benchmark::DoNotOptimize(affine::count_round_trip_failures(map, inverse, mode(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(map.domain().cardinality()));
}

void BM_Composition(benchmark::State& state) {
  const QuasiAffineMap inner = flatten();
  const QuasiAffineMap outer = affine::reverse(inner).map();
  const QuasiAffineMap composed = affine::compose(outer, inner);
  for (auto _ : state) {
    benchmark::DoNotOptimize(affine::count_composition_mismatches(composed, outer, inner, mode(state)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(inner.domain().cardinality()));
}

void BM_EvaluateAll(benchmark::State& state) {
  const QuasiAffineMap map = affine::reverse(flatten()).map();
  for (auto _ : state) benchmark::DoNotOptimize(affine::evaluate_all(map, mode(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(map.domain().cardinality()));
}

void BM_Equivalent(benchmark::State& state) {
  const ir::Program before = gen::wavenet_analog(40, 2, 0);
  const ir::Program after = dme::run_dme(before).program;
  for (auto _ : state) benchmark::DoNotOptimize(interp::equivalent(before, after, 8, 0, mode(state)).equal);
}

}  // namespace

BENCHMARK(BM_RoundTrip)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Composition)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EvaluateAll)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Equivalent)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
