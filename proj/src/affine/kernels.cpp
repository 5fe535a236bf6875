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

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "memopt/affine.hpp"
#include "parallel_impl.hpp"

namespace memopt {

std::size_t hardware_threads() noexcept {
#ifdef _OPENMP
  return static_cast<std::size_t>(omp_get_max_threads());
#else
  return 1;
#endif
}

namespace affine {
namespace {

struct Scratch {
  Point p, y, z, w;
};

}  // namespace

std::uint64_t count_round_trip_failures(const QuasiAffineMap& map, const QuasiAffineMap& inverse,
                                        Exec exec) {
  const IntBox& dom = map.domain();
  const std::size_t n = map.in_rank();
  const std::size_t m = map.out_rank();
  return detail::count_over(
      dom.cardinality(), exec, [&] { return Scratch{Point(n), Point(m), Point(n), {}}; },
      [&](std::int64_t i, Scratch& s) -> std::uint64_t {
        dom.point_at(static_cast<std::uint64_t>(i), s.p);
        if (!map.evaluate_into(s.p, s.y)) return 0;  // outside a tabulated domain
        if (!inverse.evaluate_into(s.y, s.z)) return 1;
        return std::equal(s.p.begin(), s.p.end(), s.z.begin()) ? 0 : 1;
      });
}

std::uint64_t count_composition_mismatches(const QuasiAffineMap& composed, const QuasiAffineMap& outer,
                                           const QuasiAffineMap& inner, Exec exec) {
  const IntBox& dom = inner.domain();
  const std::size_t k = outer.out_rank();
  return detail::count_over(
      dom.cardinality(), exec,
      [&] { return Scratch{Point(inner.in_rank()), Point(inner.out_rank()), Point(k), Point(k)}; },
      [&](std::int64_t i, Scratch& s) -> std::uint64_t {
        dom.point_at(static_cast<std::uint64_t>(i), s.p);
        if (!inner.evaluate_into(s.p, s.y)) return 0;
        if (!outer.evaluate_into(s.y, s.z)) return 1;
        if (!composed.evaluate_into(s.p, s.w)) return 1;
        return std::equal(s.w.begin(), s.w.end(), s.z.begin()) ? 0 : 1;
      });
}

std::vector<Index> evaluate_all(const QuasiAffineMap& map, Exec exec) {
  const IntBox& dom = map.domain();
  const std::size_t m = map.out_rank();
  std::vector<Index> out(static_cast<std::size_t>(dom.cardinality()) * m);
  detail::for_each_index(
      dom.cardinality(), exec, [&] { return Point(map.in_rank()); },
      [&](std::int64_t i, Point& p) {
        dom.point_at(static_cast<std::uint64_t>(i), p);
        map.evaluate_into(p, std::span<Index>(out.data() + static_cast<std::size_t>(i) * m, m));
      });
  return out;
}

}  // namespace affine
}  // namespace memopt
