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

// Exact integer quasi-affine maps over rectangular integer domains.
//
// A map sends a point of an n-dimensional box to an m-vector where every
// coordinate is an affine expression of the point plus weighted floordiv/mod
// terms whose inner expression is itself affine (nesting depth one). This is
// enough to express transpose, strided slice, split, repeat, tile and
// row-major flatten/unflatten, and to invert them symbolically.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "memopt/parallel.hpp"

namespace memopt::affine {

using Index = std::int64_t;
using Point = std::vector<Index>;

enum class ErrorKind {
  PointOutsideDomain,
  ArityMismatch,
  ImageEscapesDomain,
  DomainTooLarge,
  InvalidBox,
  InvalidExpr,
};

const char* to_string(ErrorKind kind) noexcept;

class AffineError : public std::runtime_error {
 public:
  AffineError(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Enumeration budgets. `enumeration` bounds every operation that falls back
/// to visiting points; boxes above `kHardCap` points are rejected outright.
struct Limits {
  static constexpr std::uint64_t kHardCap = std::uint64_t{1} << 40;
  std::uint64_t enumeration = std::uint64_t{1} << 20;
};

/// floordiv rounding toward negative infinity; `divisor` must be positive.
Index floor_div(Index value, Index divisor) noexcept;
/// Always in [0, divisor).
Index floor_mod(Index value, Index divisor) noexcept;

/// Half-open integer box lo_j <= x_j < hi_j.
class IntBox {
 public:
  IntBox() = default;
  IntBox(std::vector<Index> lo, std::vector<Index> hi);
  static IntBox from_extents(std::span<const Index> extents);

  std::size_t rank() const noexcept { return lo_.size(); }
  Index lo(std::size_t dim) const { return lo_.at(dim); }
  Index hi(std::size_t dim) const { return hi_.at(dim); }
  Index extent(std::size_t dim) const { return hi_.at(dim) - lo_.at(dim); }
  const std::vector<Index>& lower() const noexcept { return lo_; }
  const std::vector<Index>& upper() const noexcept { return hi_; }

  std::uint64_t cardinality() const noexcept { return cardinality_; }
  bool empty() const noexcept { return cardinality_ == 0; }
  bool contains(std::span<const Index> point) const noexcept;
  bool contains(const IntBox& other) const noexcept;

  /// Lexicographic rank of `point`; `point` must be inside the box.
  std::uint64_t linear_index(std::span<const Index> point) const noexcept;
  /// Inverse of linear_index.
  void point_at(std::uint64_t index, std::span<Index> out) const noexcept;
  Point point_at(std::uint64_t index) const;

  /// Visits every point in lexicographic order (last dimension fastest).
  template <typename Fn>
  void for_each(Fn&& fn) const {
    if (empty()) return;
    Point p = lo_;
    const std::size_t n = rank();
    while (true) {
      fn(std::span<const Index>(p));
      std::size_t d = n;
      while (d > 0) {
        --d;
        if (++p[d] < hi_[d]) break;
        p[d] = lo_[d];
        if (d == 0) return;
      }
      if (n == 0) return;
    }
  }

  bool operator==(const IntBox&) const = default;

 private:
  std::vector<Index> lo_;
  std::vector<Index> hi_;
  std::uint64_t cardinality_ = 1;
};

/// c . x + b over a fixed number of variables.
struct LinearExpr {
  std::vector<Index> coeffs;
  Index constant = 0;

  static LinearExpr zero(std::size_t vars) { return {std::vector<Index>(vars, 0), 0}; }
  static LinearExpr var(std::size_t vars, std::size_t which, Index coeff = 1);

  Index eval(std::span<const Index> point) const noexcept;
  bool is_constant() const noexcept;
  /// The only variable with a nonzero coefficient, if there is exactly one.
  std::optional<std::size_t> single_var() const noexcept;
  std::size_t vars() const noexcept { return coeffs.size(); }

  LinearExpr& operator+=(const LinearExpr& rhs);
  LinearExpr& operator*=(Index k);
  bool operator==(const LinearExpr&) const = default;
  auto operator<=>(const LinearExpr&) const = default;
};

enum class DivKind { FloorDiv, Mod };

/// weight * (inner floordiv divisor) or weight * (inner mod divisor).
struct DivTerm {
  Index weight = 1;
  LinearExpr inner;
  Index divisor = 1;
  DivKind kind = DivKind::FloorDiv;

  Index eval(std::span<const Index> point) const noexcept;
  bool operator==(const DivTerm&) const = default;
  auto operator<=>(const DivTerm&) const = default;
};

/// linear + sum of div terms.
struct QuasiAffineExpr {
  LinearExpr linear;
  std::vector<DivTerm> terms;

  static QuasiAffineExpr from(LinearExpr linear) { return {std::move(linear), {}}; }
  static QuasiAffineExpr constant(std::size_t vars, Index value);
  static QuasiAffineExpr var(std::size_t vars, std::size_t which, Index coeff = 1,
                             Index offset = 0);
  static QuasiAffineExpr div(LinearExpr inner, Index divisor, DivKind kind,
                             Index weight = 1);

  Index eval(std::span<const Index> point) const noexcept;
  bool is_linear() const noexcept { return terms.empty(); }
  std::size_t vars() const noexcept { return linear.vars(); }

  QuasiAffineExpr& operator+=(const QuasiAffineExpr& rhs);
  QuasiAffineExpr& operator*=(Index k);
  bool operator==(const QuasiAffineExpr&) const = default;
};

struct Interval {
  Index lo = 0;
  Index hi = 0;  // inclusive
};

/// Sound bounds of `expr` over a nonempty box; exact for linear expressions.
Interval bounds(const QuasiAffineExpr& expr, const IntBox& box);
Interval bounds(const LinearExpr& expr, const IntBox& box);

enum class MapClass { PermShift, StridedEmbed, MixedRadix, General };
const char* to_string(MapClass cls) noexcept;

/// Sorted point-to-point table backing tabulated maps.
struct PointTable {
  std::size_t in_rank = 0;
  std::size_t out_rank = 0;
  std::size_t rows = 0;
  std::vector<Index> keys;    // row-major, sorted lexicographically, unique
  std::vector<Index> values;  // row-major, aligned with keys

  std::span<const Index> key(std::size_t row) const noexcept {
    return {keys.data() + row * in_rank, in_rank};
  }
  std::span<const Index> value(std::size_t row) const noexcept {
    return {values.data() + row * out_rank, out_rank};
  }
  /// Row of `key`, if present.
  std::optional<std::size_t> find(std::span<const Index> key) const noexcept;
  bool operator==(const PointTable&) const = default;
};

/// A map from the points of `domain` to m-vectors. Either symbolic (a list
/// of quasi-affine output expressions, normalized on construction against
/// the domain) or tabulated (an explicit point table whose keys are a subset
/// of the domain box).
class QuasiAffineMap {
 public:
  /// Identity on the zero-dimensional box.
  QuasiAffineMap();
  QuasiAffineMap(IntBox domain, std::vector<QuasiAffineExpr> outputs);

  static QuasiAffineMap identity(IntBox domain);
  /// outputs = matrix * i + offset.
  static QuasiAffineMap affine(IntBox domain,
                               const std::vector<std::vector<Index>>& matrix,
                               const std::vector<Index>& offset);
  static QuasiAffineMap tabulated(IntBox domain, PointTable table);

  const IntBox& domain() const noexcept { return domain_; }
  std::size_t in_rank() const noexcept { return domain_.rank(); }
  std::size_t out_rank() const noexcept { return out_rank_; }
  /// Empty for tabulated maps.
  const std::vector<QuasiAffineExpr>& outputs() const noexcept { return outputs_; }
  bool is_tabulated() const noexcept { return table_ != nullptr; }
  const PointTable* table() const noexcept { return table_.get(); }
  bool defined_at(std::span<const Index> point) const noexcept;

  MapClass structural_class() const noexcept { return class_; }
  /// True iff symbolic with no div/mod terms (representable as C i + b).
  bool is_pure_affine() const noexcept;
  bool is_identity() const noexcept;

  /// Throws AffineError(PointOutsideDomain) when `point` is not in the domain.
  Point evaluate(std::span<const Index> point) const;
  /// No domain check. For symbolic maps any integer point is accepted; for
  /// tabulated maps returns false when the key is absent.
  bool evaluate_into(std::span<const Index> point, std::span<Index> out) const noexcept;

  bool operator==(const QuasiAffineMap& other) const;

 private:
  IntBox domain_;
  std::vector<QuasiAffineExpr> outputs_;
  std::size_t out_rank_ = 0;
  std::shared_ptr<const PointTable> table_;
  MapClass class_ = MapClass::PermShift;
};

/// Rewrites an expression into canonical form against `domain`: coefficient
/// multiples of a divisor are pulled out of div terms, div terms whose inner
/// range stays inside one divisor bucket are folded into the linear part,
/// equal terms are merged and the term list is sorted. Idempotent.
QuasiAffineExpr normalize(QuasiAffineExpr expr, const IntBox& domain);

Point evaluate(const QuasiAffineMap& map, std::span<const Index> point);

/// Re-derives the structural class from the output expressions.
MapClass classify(const QuasiAffineMap& map);

/// The set {f(p) : p in domain}: a box with per-axis strides when the
/// structure allows it, otherwise an enumerated sorted point list.
class ImageSet {
 public:
  ImageSet() = default;
  /// Points p with lo_j <= p_j < hi_j and (p_j - lo_j) % stride_j == 0.
  static ImageSet lattice(IntBox box, std::vector<Index> strides);
  static ImageSet enumerated(std::size_t rank, std::vector<Point> sorted_points);

  bool is_symbolic() const noexcept { return symbolic_; }
  std::size_t rank() const noexcept { return rank_; }
  const IntBox& bounding_box() const noexcept { return box_; }
  const std::vector<Index>& strides() const noexcept { return strides_; }
  std::uint64_t cardinality() const noexcept;
  bool contains(std::span<const Index> point) const;
  /// Set equality with every point of `box`.
  bool equals_box(const IntBox& box) const;
  /// Materializes the points (enumerated order; lattice in lexicographic order).
  std::vector<Point> points() const;

 private:
  bool symbolic_ = true;
  std::size_t rank_ = 0;
  IntBox box_;
  std::vector<Index> strides_;
  std::vector<Point> points_;
};

ImageSet image(const QuasiAffineMap& map, const Limits& limits = {});

/// Composition outer . inner: evaluate(result, p) = outer(inner(p)) for every
/// p in inner's domain. Symbolic when substitution stays at div nesting depth
/// one (after simplification), otherwise a tabulated map.
QuasiAffineMap compose(const QuasiAffineMap& outer, const QuasiAffineMap& inner,
                       const Limits& limits = {});

class InverseResult {
 public:
  enum class Kind { Symbolic, Tabulated, NotInvertible };

  static InverseResult symbolic(QuasiAffineMap map, ImageSet image);
  static InverseResult tabulated(QuasiAffineMap map, ImageSet image);
  static InverseResult not_invertible(std::string reason,
                                      std::optional<std::pair<Point, Point>> witness = {});

  Kind kind() const noexcept { return kind_; }
  bool invertible() const noexcept { return kind_ != Kind::NotInvertible; }
  /// The inverse. Its domain box is the bounding box of image(); it is only
  /// meaningful on image points. Throws std::logic_error if not invertible.
  const QuasiAffineMap& map() const;
  const ImageSet& image() const noexcept { return image_; }
  const std::string& reason() const noexcept { return reason_; }
  /// Two distinct domain points with the same value, when one was found.
  const std::optional<std::pair<Point, Point>>& witness() const noexcept { return witness_; }

 private:
  Kind kind_ = Kind::NotInvertible;
  std::optional<QuasiAffineMap> map_;
  ImageSet image_;
  std::string reason_;
  std::optional<std::pair<Point, Point>> witness_;
};

const char* to_string(InverseResult::Kind kind) noexcept;

/// Symbolic inverse for PermShift/StridedEmbed/MixedRadix maps, a point table
/// for General maps within the enumeration budget, NotInvertible otherwise.
InverseResult reverse(const QuasiAffineMap& map, const Limits& limits = {});

/// True iff `map` is injective on its domain.
bool is_injective(const QuasiAffineMap& map, const Limits& limits = {});

// ---------------------------------------------------------------------------
// Enumeration kernels. Each has a serial reference and an OpenMP variant.

/// Number of domain points p with inverse(map(p)) != p.
std::uint64_t count_round_trip_failures(const QuasiAffineMap& map,
                                        const QuasiAffineMap& inverse,
                                        Exec exec = Exec::Parallel);

/// Number of domain points of `inner` where `composed` disagrees with
/// outer(inner(p)).
std::uint64_t count_composition_mismatches(const QuasiAffineMap& composed,
                                           const QuasiAffineMap& outer,
                                           const QuasiAffineMap& inner,
                                           Exec exec = Exec::Parallel);

/// map(p) for every domain point, row-major in lexicographic domain order.
std::vector<Index> evaluate_all(const QuasiAffineMap& map, Exec exec = Exec::Parallel);

}  // namespace memopt::affine
