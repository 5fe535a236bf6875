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
#include <sstream>
#include <tuple>

#include "affine/structure.hpp"
#include "memopt/affine.hpp"

namespace memopt::affine {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::PointOutsideDomain: return "PointOutsideDomain";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::ImageEscapesDomain: return "ImageEscapesDomain";
    case ErrorKind::DomainTooLarge: return "DomainTooLarge";
    case ErrorKind::InvalidBox: return "InvalidBox";
    case ErrorKind::InvalidExpr: return "InvalidExpr";
  }
  return "?";
}

const char* to_string(MapClass cls) noexcept {
  switch (cls) {
    case MapClass::PermShift: return "PermShift";
    case MapClass::StridedEmbed: return "StridedEmbed";
    case MapClass::MixedRadix: return "MixedRadix";
    case MapClass::General: return "General";
  }
  return "?";
}

Index floor_div(Index value, Index divisor) noexcept {
  Index q = value / divisor;
  if ((value % divisor != 0) && (value < 0)) --q;
  return q;
}

Index floor_mod(Index value, Index divisor) noexcept {
  return value - divisor * floor_div(value, divisor);
}

// ---------------------------------------------------------------------------
// IntBox

IntBox::IntBox(std::vector<Index> lo, std::vector<Index> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size()) {
    throw AffineError(ErrorKind::InvalidBox, "lower and upper bounds differ in rank");
  }
  std::uint64_t card = 1;
  bool overflow = false;
  for (std::size_t d = 0; d < lo_.size(); ++d) {
    if (lo_[d] > hi_[d]) {
      std::ostringstream os;
      os << "dimension " << d << " has lo " << lo_[d] << " > hi " << hi_[d];
      throw AffineError(ErrorKind::InvalidBox, os.str());
    }
    const auto ext = static_cast<std::uint64_t>(hi_[d] - lo_[d]);
    if (ext == 0) {
      card = 0;
      overflow = false;
      break;
    }
    if (overflow || card > Limits::kHardCap / ext) overflow = true;
    else card *= ext;
  }
  if (overflow || card > Limits::kHardCap) {
    throw AffineError(ErrorKind::DomainTooLarge, "box exceeds 2^40 points");
  }
  cardinality_ = card;
}

IntBox IntBox::from_extents(std::span<const Index> extents) {
  return IntBox(std::vector<Index>(extents.size(), 0), std::vector<Index>(extents.begin(), extents.end()));
}

bool IntBox::contains(std::span<const Index> point) const noexcept {
  if (point.size() != rank()) return false;
  for (std::size_t d = 0; d < rank(); ++d) {
    if (point[d] < lo_[d] || point[d] >= hi_[d]) return false;
  }
  return true;
}

bool IntBox::contains(const IntBox& other) const noexcept {
  if (other.rank() != rank()) return false;
  if (other.empty()) return true;
  for (std::size_t d = 0; d < rank(); ++d) {
    if (other.lo_[d] < lo_[d] || other.hi_[d] > hi_[d]) return false;
  }
  return true;
}

std::uint64_t IntBox::linear_index(std::span<const Index> point) const noexcept {
  std::uint64_t idx = 0;
  for (std::size_t d = 0; d < rank(); ++d) {
    idx = idx * static_cast<std::uint64_t>(extent(d)) + static_cast<std::uint64_t>(point[d] - lo_[d]);
  }
  return idx;
}

void IntBox::point_at(std::uint64_t index, std::span<Index> out) const noexcept {
  for (std::size_t d = rank(); d > 0; --d) {
    const auto ext = static_cast<std::uint64_t>(hi_[d - 1] - lo_[d - 1]);
    out[d - 1] = lo_[d - 1] + static_cast<Index>(index % ext);
    index /= ext;
  }
}

Point IntBox::point_at(std::uint64_t index) const {
  Point p(rank());
  point_at(index, p);
  return p;
}

// ---------------------------------------------------------------------------
// Expressions

LinearExpr LinearExpr::var(std::size_t vars, std::size_t which, Index coeff) {
  LinearExpr e = zero(vars);
  e.coeffs.at(which) = coeff;
  return e;
}

Index LinearExpr::eval(std::span<const Index> point) const noexcept {
  Index v = constant;
  for (std::size_t j = 0; j < coeffs.size(); ++j) v += coeffs[j] * point[j];
  return v;
}

bool LinearExpr::is_constant() const noexcept {
  return std::all_of(coeffs.begin(), coeffs.end(), [](Index c) { return c == 0; });
}

std::optional<std::size_t> LinearExpr::single_var() const noexcept {
  std::optional<std::size_t> found;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    if (coeffs[j] == 0) continue;
    if (found) return std::nullopt;
    found = j;
  }
  return found;
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& rhs) {
  if (coeffs.size() < rhs.coeffs.size()) coeffs.resize(rhs.coeffs.size(), 0);
  for (std::size_t j = 0; j < rhs.coeffs.size(); ++j) coeffs[j] += rhs.coeffs[j];
  constant += rhs.constant;
  return *this;
}

LinearExpr& LinearExpr::operator*=(Index k) {
  for (auto& c : coeffs) c *= k;
  constant *= k;
  return *this;
}

Index DivTerm::eval(std::span<const Index> point) const noexcept {
  const Index x = inner.eval(point);
  return weight * (kind == DivKind::FloorDiv ? floor_div(x, divisor) : floor_mod(x, divisor));
}

QuasiAffineExpr QuasiAffineExpr::constant(std::size_t vars, Index value) {
  return {LinearExpr{std::vector<Index>(vars, 0), value}, {}};
}

QuasiAffineExpr QuasiAffineExpr::var(std::size_t vars, std::size_t which, Index coeff, Index offset) {
  QuasiAffineExpr e = constant(vars, offset);
  e.linear.coeffs.at(which) = coeff;
  return e;
}

QuasiAffineExpr QuasiAffineExpr::div(LinearExpr inner, Index divisor, DivKind kind, Index weight) {
  const std::size_t vars = inner.vars();
  QuasiAffineExpr e = constant(vars, 0);
  e.terms.push_back({weight, std::move(inner), divisor, kind});
  return e;
}

Index QuasiAffineExpr::eval(std::span<const Index> point) const noexcept {
  Index v = linear.eval(point);
  for (const auto& t : terms) v += t.eval(point);
  return v;
}

QuasiAffineExpr& QuasiAffineExpr::operator+=(const QuasiAffineExpr& rhs) {
  linear += rhs.linear;
  terms.insert(terms.end(), rhs.terms.begin(), rhs.terms.end());
  return *this;
}

QuasiAffineExpr& QuasiAffineExpr::operator*=(Index k) {
  linear *= k;
  for (auto& t : terms) t.weight *= k;
  return *this;
}

Interval bounds(const LinearExpr& expr, const IntBox& box) {
  Interval r{expr.constant, expr.constant};
  for (std::size_t j = 0; j < expr.coeffs.size(); ++j) {
    const Index c = expr.coeffs[j];
    if (c == 0) continue;
    const Index a = c * box.lo(j);
    const Index b = c * (box.hi(j) - 1);
    r.lo += std::min(a, b);
    r.hi += std::max(a, b);
  }
  return r;
}

Interval bounds(const QuasiAffineExpr& expr, const IntBox& box) {
  Interval r = bounds(expr.linear, box);
  for (const auto& t : expr.terms) {
    const Interval in = bounds(t.inner, box);
    Interval v;
    if (t.kind == DivKind::FloorDiv) {
      v = {floor_div(in.lo, t.divisor), floor_div(in.hi, t.divisor)};
    } else if (floor_div(in.lo, t.divisor) == floor_div(in.hi, t.divisor)) {
      v = {floor_mod(in.lo, t.divisor), floor_mod(in.hi, t.divisor)};
    } else {
      v = {0, t.divisor - 1};
    }
    const Index a = t.weight * v.lo;
    const Index b = t.weight * v.hi;
    r.lo += std::min(a, b);
    r.hi += std::max(a, b);
  }
  return r;
}

namespace {

bool same_term_key(const DivTerm& a, const DivTerm& b) {
  return a.kind == b.kind && a.divisor == b.divisor && a.inner == b.inner;
}

bool term_key_less(const DivTerm& a, const DivTerm& b) {
  return std::tie(a.kind, a.divisor, a.inner) < std::tie(b.kind, b.divisor, b.inner);
}

}  // namespace

QuasiAffineExpr normalize(QuasiAffineExpr expr, const IntBox& domain) {
  const std::size_t n = domain.rank();
  if (expr.linear.coeffs.size() != n) {
    throw AffineError(ErrorKind::InvalidExpr, "expression arity does not match domain rank");
  }
  QuasiAffineExpr out = QuasiAffineExpr::from(expr.linear);
  std::vector<DivTerm> kept;
  for (auto& t : expr.terms) {
    if (t.inner.coeffs.size() != n) {
      throw AffineError(ErrorKind::InvalidExpr, "div term arity does not match domain rank");
    }
    if (t.divisor <= 0) {
      throw AffineError(ErrorKind::InvalidExpr, "divisor must be positive");
    }
    if (t.weight == 0) continue;
    const Index d = t.divisor;
    // inner = d*q + r with every coefficient of r in [0, d). The split is
    // applied only when r stays inside one bucket, so the term folds away;
    // otherwise the term is kept verbatim to preserve shared inner forms.
    LinearExpr q = LinearExpr::zero(n);
    LinearExpr r = t.inner;
    for (std::size_t j = 0; j < n; ++j) {
      q.coeffs[j] = floor_div(r.coeffs[j], d);
      r.coeffs[j] -= d * q.coeffs[j];
    }
    const bool constant_r = r.is_constant();
    if (constant_r || !domain.empty()) {
      const Interval in = constant_r ? Interval{r.constant, r.constant} : bounds(r, domain);
      const Index bucket = floor_div(in.lo, d);
      if (bucket == floor_div(in.hi, d)) {
        if (t.kind == DivKind::FloorDiv) {
          q.constant = bucket;
          q *= t.weight;
          out.linear += q;
        } else {
          r.constant -= bucket * d;
          r *= t.weight;
          out.linear += r;
        }
        continue;
      }
    }
    kept.push_back(std::move(t));
  }
  std::sort(kept.begin(), kept.end(), term_key_less);
  for (auto& t : kept) {
    if (!out.terms.empty() && same_term_key(out.terms.back(), t)) {
      out.terms.back().weight += t.weight;
    } else {
      out.terms.push_back(std::move(t));
    }
  }
  std::erase_if(out.terms, [](const DivTerm& t) { return t.weight == 0; });
  return out;
}

// ---------------------------------------------------------------------------
// PointTable and QuasiAffineMap

std::optional<std::size_t> PointTable::find(std::span<const Index> k) const noexcept {
  std::size_t lo = 0;
  std::size_t hi = rows;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const auto row = key(mid);
    if (std::lexicographical_compare(row.begin(), row.end(), k.begin(), k.end())) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < rows && std::equal(k.begin(), k.end(), key(lo).begin(), key(lo).end())) return lo;
  return std::nullopt;
}

QuasiAffineMap::QuasiAffineMap() = default;

QuasiAffineMap::QuasiAffineMap(IntBox domain, std::vector<QuasiAffineExpr> outputs)
    : domain_(std::move(domain)), out_rank_(outputs.size()) {
  outputs_.reserve(outputs.size());
  for (auto& e : outputs) outputs_.push_back(normalize(std::move(e), domain_));
  class_ = detail::classify_symbolic(*this);
}

QuasiAffineMap QuasiAffineMap::identity(IntBox domain) {
  const std::size_t n = domain.rank();
  std::vector<QuasiAffineExpr> outs;
  for (std::size_t j = 0; j < n; ++j) outs.push_back(QuasiAffineExpr::var(n, j));
  return QuasiAffineMap(std::move(domain), std::move(outs));
}

QuasiAffineMap QuasiAffineMap::affine(IntBox domain, const std::vector<std::vector<Index>>& matrix,
                                      const std::vector<Index>& offset) {
  if (matrix.size() != offset.size()) {
    throw AffineError(ErrorKind::ArityMismatch, "matrix rows and offset length differ");
  }
  std::vector<QuasiAffineExpr> outs;
  for (std::size_t k = 0; k < matrix.size(); ++k) {
    if (matrix[k].size() != domain.rank()) {
      throw AffineError(ErrorKind::ArityMismatch, "matrix row width differs from domain rank");
    }
    outs.push_back(QuasiAffineExpr::from(LinearExpr{matrix[k], offset[k]}));
  }
  return QuasiAffineMap(std::move(domain), std::move(outs));
}

QuasiAffineMap QuasiAffineMap::tabulated(IntBox domain, PointTable table) {
  if (table.in_rank != domain.rank()) {
    throw AffineError(ErrorKind::ArityMismatch, "table key rank differs from domain rank");
  }
  for (std::size_t r = 0; r < table.rows; ++r) {
    if (!domain.contains(table.key(r))) {
      throw AffineError(ErrorKind::PointOutsideDomain, "table key outside domain box");
    }
  }
  QuasiAffineMap m;
  m.domain_ = std::move(domain);
  m.out_rank_ = table.out_rank;
  m.table_ = std::make_shared<const PointTable>(std::move(table));
  m.class_ = MapClass::General;
  return m;
}

bool QuasiAffineMap::defined_at(std::span<const Index> point) const noexcept {
  if (!domain_.contains(point)) return false;
  return !table_ || table_->find(point).has_value();
}

bool QuasiAffineMap::is_pure_affine() const noexcept {
  if (table_) return false;
  return std::all_of(outputs_.begin(), outputs_.end(), [](const QuasiAffineExpr& e) { return e.is_linear(); });
}

bool QuasiAffineMap::is_identity() const noexcept {
  if (table_ || out_rank_ != in_rank()) return false;
  for (std::size_t k = 0; k < out_rank_; ++k) {
    const auto& e = outputs_[k];
    if (!e.is_linear() || e.linear.constant != 0) return false;
    for (std::size_t j = 0; j < in_rank(); ++j) {
      if (e.linear.coeffs[j] != (j == k ? 1 : 0)) return false;
    }
  }
  return true;
}

Point QuasiAffineMap::evaluate(std::span<const Index> point) const {
  if (!domain_.contains(point)) {
    throw AffineError(ErrorKind::PointOutsideDomain, "point not in map domain");
  }
  Point out(out_rank_);
  if (!evaluate_into(point, out)) {
    throw AffineError(ErrorKind::PointOutsideDomain, "point not in tabulated map domain");
  }
  return out;
}

bool QuasiAffineMap::evaluate_into(std::span<const Index> point, std::span<Index> out) const noexcept {
  if (table_) {
    const auto row = table_->find(point);
    if (!row) return false;
    const auto v = table_->value(*row);
    std::copy(v.begin(), v.end(), out.begin());
    return true;
  }
  for (std::size_t k = 0; k < out_rank_; ++k) out[k] = outputs_[k].eval(point);
  return true;
}

bool QuasiAffineMap::operator==(const QuasiAffineMap& other) const {
  if (!(domain_ == other.domain_) || out_rank_ != other.out_rank_) return false;
  if ((table_ == nullptr) != (other.table_ == nullptr)) return false;
  if (table_) return *table_ == *other.table_;
  return outputs_ == other.outputs_;
}

Point evaluate(const QuasiAffineMap& map, std::span<const Index> point) { return map.evaluate(point); }

}  // namespace memopt::affine
