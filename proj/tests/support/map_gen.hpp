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

// Random quasi-affine maps for property tests. Each generator builds maps of
// one structural family directly from expressions, without going through the
// library's classifier, so tests can check the classifier against intent.

#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "memopt/affine.hpp"

namespace memopt::testing {

using affine::DivKind;
using affine::Index;
using affine::IntBox;
using affine::LinearExpr;
using affine::QuasiAffineExpr;
using affine::QuasiAffineMap;

using Rng = std::mt19937_64;

inline Index uniform(Rng& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

inline IntBox random_box(Rng& rng, std::size_t rank, Index max_extent, bool allow_offset = true) {
  std::vector<Index> lo(rank), hi(rank);
  for (std::size_t d = 0; d < rank; ++d) {
    lo[d] = allow_offset ? uniform(rng, -3, 3) : 0;
    hi[d] = lo[d] + uniform(rng, 1, max_extent);
  }
  return IntBox(lo, hi);
}

inline std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

/// i -> [i_perm(k) + b_k]
inline QuasiAffineMap random_perm_shift(Rng& rng) {
  const auto n = static_cast<std::size_t>(uniform(rng, 1, 3));
  IntBox box = random_box(rng, n, 8);
  const auto perm = random_permutation(rng, n);
  std::vector<QuasiAffineExpr> outs;
  for (std::size_t k = 0; k < n; ++k) outs.push_back(QuasiAffineExpr::var(n, perm[k], 1, uniform(rng, -5, 5)));
  return QuasiAffineMap(box, outs);
}

/// i -> [s_k * i_perm(k) + b_k] with at least one |s_k| != 1, possibly with
/// constant coordinates inserted.
inline QuasiAffineMap random_strided_embed(Rng& rng) {
  const auto n = static_cast<std::size_t>(uniform(rng, 1, 3));
  IntBox box = random_box(rng, n, 8);
  const auto perm = random_permutation(rng, n);
  std::vector<QuasiAffineExpr> outs;
  const std::size_t strided = static_cast<std::size_t>(uniform(rng, 0, static_cast<Index>(n) - 1));
  for (std::size_t k = 0; k < n; ++k) {
    Index s = uniform(rng, -3, 3);
    if (s == 0) s = 2;
    if (k == strided && (s == 1 || s == -1)) s = s * 3;
    outs.push_back(QuasiAffineExpr::var(n, perm[k], s, uniform(rng, -5, 5)));
    if (uniform(rng, 0, 3) == 0) outs.push_back(QuasiAffineExpr::constant(n, uniform(rng, -2, 2)));
  }
  return QuasiAffineMap(box, outs);
}

/// Row-major flatten of a random grouping of the variables, optionally
/// scaled, plus unflatten of a channel into a complete set of digits.
inline QuasiAffineMap random_mixed_radix(Rng& rng) {
  const auto n = static_cast<std::size_t>(uniform(rng, 1, 3));
  IntBox box = random_box(rng, n, 7);
  auto order = random_permutation(rng, n);
  std::vector<QuasiAffineExpr> outs;
  std::size_t pos = 0;
  while (pos < n) {
    const std::size_t take = std::min<std::size_t>(n - pos, static_cast<std::size_t>(uniform(rng, 1, 3)));
    LinearExpr channel = LinearExpr::zero(n);
    Index coeff = uniform(rng, 0, 3) == 0 ? 2 : 1;
    // last variable of the group is the fastest-varying digit
    for (std::size_t t = take; t > 0; --t) {
      const std::size_t v = order[pos + t - 1];
      channel.coeffs[v] = coeff;
      coeff *= box.extent(v);
    }
    channel.constant = uniform(rng, -4, 4);
    pos += take;
    const bool unflatten = uniform(rng, 0, 1) == 1 && channel.coeffs[order[pos - 1]] == 1;
    if (!unflatten) {
      outs.push_back(QuasiAffineExpr::from(channel));
      continue;
    }
    // digits with radices r_1..r_k; top digit unbounded
    const auto levels = static_cast<std::size_t>(uniform(rng, 1, 2));
    Index low = 1;
    for (std::size_t l = 0; l < levels; ++l) {
      const Index radix = uniform(rng, 2, 4);
      const Index high = low * radix;
      QuasiAffineExpr digit;
      if (low == 1) {
        digit = QuasiAffineExpr::div(channel, high, DivKind::Mod);
      } else {
        digit = QuasiAffineExpr::div(channel, low, DivKind::FloorDiv);
        digit += QuasiAffineExpr::div(channel, high, DivKind::FloorDiv, -radix);
      }
      digit.linear.constant += uniform(rng, -2, 2);
      outs.push_back(digit);
      low = high;
    }
    outs.push_back(QuasiAffineExpr::div(channel, low, DivKind::FloorDiv));
  }
  std::shuffle(outs.begin(), outs.end(), rng);
  return QuasiAffineMap(box, outs);
}

/// Arbitrary small coefficients with an occasional div/mod term; may or may
/// not be injective.
inline QuasiAffineMap random_general(Rng& rng) {
  const auto n = static_cast<std::size_t>(uniform(rng, 1, 3));
  const auto m = static_cast<std::size_t>(uniform(rng, 1, 3));
  IntBox box = random_box(rng, n, 6);
  std::vector<QuasiAffineExpr> outs;
  for (std::size_t k = 0; k < m; ++k) {
    QuasiAffineExpr e = QuasiAffineExpr::constant(n, uniform(rng, -3, 3));
    for (std::size_t j = 0; j < n; ++j) e.linear.coeffs[j] = uniform(rng, -2, 2);
    if (uniform(rng, 0, 2) == 0) {
      LinearExpr inner = LinearExpr::zero(n);
      for (std::size_t j = 0; j < n; ++j) inner.coeffs[j] = uniform(rng, -3, 3);
      inner.constant = uniform(rng, -3, 3);
      e += QuasiAffineExpr::div(inner, uniform(rng, 2, 5),
                                uniform(rng, 0, 1) ? DivKind::FloorDiv : DivKind::Mod, uniform(rng, -2, 2));
    }
    outs.push_back(e);
  }
  return QuasiAffineMap(box, outs);
}

/// A random map whose domain is exactly `domain` and output rank is `m`.
inline QuasiAffineMap random_map_on(Rng& rng, const IntBox& domain, std::size_t m) {
  const std::size_t n = domain.rank();
  std::vector<QuasiAffineExpr> outs;
  for (std::size_t k = 0; k < m; ++k) {
    QuasiAffineExpr e = QuasiAffineExpr::constant(n, uniform(rng, -3, 3));
    for (std::size_t j = 0; j < n; ++j) e.linear.coeffs[j] = uniform(rng, -3, 3);
    if (uniform(rng, 0, 1) == 0) {
      LinearExpr inner = LinearExpr::zero(n);
      for (std::size_t j = 0; j < n; ++j) inner.coeffs[j] = uniform(rng, -3, 3);
      e += QuasiAffineExpr::div(inner, uniform(rng, 2, 6),
                                uniform(rng, 0, 1) ? DivKind::FloorDiv : DivKind::Mod, uniform(rng, -2, 2));
    }
    outs.push_back(e);
  }
  return QuasiAffineMap(domain, outs);
}

enum class Family { PermShift, StridedEmbed, MixedRadix, General };

inline QuasiAffineMap random_map(Rng& rng, Family family) {
  switch (family) {
    case Family::PermShift: return random_perm_shift(rng);
    case Family::StridedEmbed: return random_strided_embed(rng);
    case Family::MixedRadix: return random_mixed_radix(rng);
    case Family::General: return random_general(rng);
  }
  return random_general(rng);
}

}  // namespace memopt::testing
