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

#include <sstream>

#include "memopt/affine.hpp"

namespace memopt::affine {
namespace {

// Substitutes `inner` outputs for the variables of `e`.
QuasiAffineExpr substitute_linear(const LinearExpr& e, const std::vector<QuasiAffineExpr>& inner,
                                  std::size_t vars) {
  QuasiAffineExpr acc = QuasiAffineExpr::constant(vars, e.constant);
  for (std::size_t k = 0; k < e.coeffs.size(); ++k) {
    if (e.coeffs[k] == 0) continue;
    QuasiAffineExpr scaled = inner[k];
    scaled *= e.coeffs[k];
    acc += scaled;
  }
  return acc;
}

// Rewrites weight * (arg op divisor) where `arg` already carries div terms
// into an expression of nesting depth one, when an exact identity applies:
//   (X + d*k*T) floordiv d = k*T + X floordiv d
//   (T + c) floordiv d, T = L floordiv a      = (L + a*c) floordiv (a*d)
//   (X + w*T) mod d with d | w                = X mod d
//   (X + w*(L mod a)) mod d with d | a        = (X + w*L) mod d
std::optional<QuasiAffineExpr> flatten_nested(QuasiAffineExpr arg, const DivTerm& outer,
                                              const IntBox& domain) {
  const std::size_t n = domain.rank();
  const Index d = outer.divisor;
  arg = normalize(std::move(arg), domain);
  QuasiAffineExpr result = QuasiAffineExpr::constant(n, 0);

  if (outer.kind == DivKind::Mod) {
    std::vector<DivTerm> rest;
    for (auto& t : arg.terms) {
      if (t.weight % d == 0) continue;
      if (t.kind == DivKind::Mod && t.divisor % d == 0) {
        LinearExpr l = t.inner;
        l *= t.weight;
        arg.linear += l;
        continue;
      }
      rest.push_back(t);
    }
    if (!rest.empty()) return std::nullopt;
    result.terms.push_back({outer.weight, arg.linear, d, DivKind::Mod});
    return result;
  }

  std::vector<DivTerm> rest;
  for (auto& t : arg.terms) {
    if (t.weight % d == 0) {
      DivTerm pulled = t;
      pulled.weight = outer.weight * (t.weight / d);
      result.terms.push_back(std::move(pulled));
    } else {
      rest.push_back(t);
    }
  }
  if (rest.empty()) {
    result.terms.push_back({outer.weight, arg.linear, d, DivKind::FloorDiv});
    return result;
  }
  if (rest.size() == 1 && rest.front().kind == DivKind::FloorDiv && rest.front().weight == 1 &&
      arg.linear.is_constant()) {
    const DivTerm& t = rest.front();
    LinearExpr l = t.inner;
    l.constant += t.divisor * arg.linear.constant;
    result.terms.push_back({outer.weight, l, t.divisor * d, DivKind::FloorDiv});
    return result;
  }
  return std::nullopt;
}

std::optional<std::vector<QuasiAffineExpr>> substitute(const QuasiAffineMap& outer,
                                                       const QuasiAffineMap& inner) {
  const std::size_t n = inner.in_rank();
  std::vector<QuasiAffineExpr> result;
  result.reserve(outer.out_rank());
  for (const auto& e : outer.outputs()) {
    QuasiAffineExpr acc = substitute_linear(e.linear, inner.outputs(), n);
    for (const auto& t : e.terms) {
      QuasiAffineExpr arg = substitute_linear(t.inner, inner.outputs(), n);
      if (arg.is_linear()) {
        acc.terms.push_back({t.weight, arg.linear, t.divisor, t.kind});
        continue;
      }
      auto flat = flatten_nested(std::move(arg), t, inner.domain());
      if (!flat) return std::nullopt;
      acc += *flat;
    }
    result.push_back(std::move(acc));
  }
  return result;
}

QuasiAffineMap tabulate_composition(const QuasiAffineMap& outer, const QuasiAffineMap& inner,
                                    const Limits& limits) {
  const IntBox& dom = inner.domain();
  if (dom.cardinality() > limits.enumeration) {
    throw AffineError(ErrorKind::DomainTooLarge,
                      "composition needs tabulation beyond the configured enumeration limit");
  }
  PointTable table;
  table.in_rank = dom.rank();
  table.out_rank = outer.out_rank();
  Point mid(inner.out_rank());
  Point out(outer.out_rank());
  dom.for_each([&](std::span<const Index> p) {
    if (!inner.evaluate_into(p, mid)) return;
    if (!outer.domain().contains(mid) || !outer.evaluate_into(mid, out)) {
      throw AffineError(ErrorKind::ImageEscapesDomain, "inner image leaves the outer domain");
    }
    table.keys.insert(table.keys.end(), p.begin(), p.end());
    table.values.insert(table.values.end(), out.begin(), out.end());
    ++table.rows;
  });
  return QuasiAffineMap::tabulated(dom, std::move(table));
}

void check_image_inside(const QuasiAffineMap& outer, const QuasiAffineMap& inner, const Limits& limits) {
  const IntBox& dom = inner.domain();
  if (dom.empty()) return;
  std::vector<Index> lo(inner.out_rank()), hi(inner.out_rank());
  for (std::size_t k = 0; k < inner.out_rank(); ++k) {
    const Interval b = bounds(inner.outputs()[k], dom);
    lo[k] = b.lo;
    hi[k] = b.hi + 1;
  }
  if (outer.domain().contains(IntBox(lo, hi))) return;
  // Interval bounds are loose for div terms; fall back to the exact image.
  const ImageSet img = image(inner, limits);
  if (!outer.domain().contains(img.bounding_box())) {
    throw AffineError(ErrorKind::ImageEscapesDomain, "inner image leaves the outer domain");
  }
}

}  // namespace

QuasiAffineMap compose(const QuasiAffineMap& outer, const QuasiAffineMap& inner, const Limits& limits) {
  if (inner.out_rank() != outer.in_rank()) {
    std::ostringstream os;
    os << "inner produces " << inner.out_rank() << " coordinates, outer expects " << outer.in_rank();
    throw AffineError(ErrorKind::ArityMismatch, os.str());
  }
  if (outer.is_tabulated() || inner.is_tabulated()) return tabulate_composition(outer, inner, limits);
  check_image_inside(outer, inner, limits);
  if (auto exprs = substitute(outer, inner)) return QuasiAffineMap(inner.domain(), std::move(*exprs));
  return tabulate_composition(outer, inner, limits);
}

}  // namespace memopt::affine
