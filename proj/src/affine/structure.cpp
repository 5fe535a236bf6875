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

#include "affine/structure.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace memopt::affine {
namespace detail {
namespace {

bool live(const IntBox& dom, std::size_t j) { return dom.extent(j) > 1; }

struct ValueLattice {
  Index min = 0;
  Index step = 1;
  std::uint64_t count = 0;
};

ValueLattice channel_values(const Channel& ch, const IntBox& dom) {
  const Index base = ch.value.eval(dom.lower());
  ValueLattice v;
  if (ch.vars.size() == 1) {
    const std::size_t j = ch.vars.front();
    const Index s = ch.value.coeffs[j];
    v.count = static_cast<std::uint64_t>(dom.extent(j));
    v.step = s > 0 ? s : -s;
    v.min = s > 0 ? base : base + s * (dom.extent(j) - 1);
    return v;
  }
  v.min = base;
  v.step = ch.value.coeffs[ch.vars.front()];
  v.count = 1;
  for (std::size_t j : ch.vars) v.count *= static_cast<std::uint64_t>(dom.extent(j));
  return v;
}

// Matches one output expression against the digit shapes produced by
// unflatten patterns and by this module's own inverses.
std::optional<std::pair<LinearExpr, Digit>> match_digit(const QuasiAffineExpr& e, std::size_t k) {
  const bool lin_zero = e.linear.is_constant();
  if (e.terms.size() == 1) {
    const DivTerm& t = e.terms.front();
    if (lin_zero && t.weight == 1) {
      Digit d{k, t.kind == DivKind::FloorDiv ? t.divisor : 1,
              t.kind == DivKind::FloorDiv ? 0 : t.divisor, e.linear.constant};
      return std::make_pair(t.inner, d);
    }
    // inner - d * (inner floordiv d) == inner mod d
    if (t.kind == DivKind::FloorDiv && t.weight == -t.divisor && e.linear.coeffs == t.inner.coeffs) {
      return std::make_pair(t.inner, Digit{k, 1, t.divisor, e.linear.constant - t.inner.constant});
    }
    return std::nullopt;
  }
  if (e.terms.size() == 2 && lin_zero) {
    const DivTerm& a = e.terms[0];
    const DivTerm& b = e.terms[1];
    if (a.kind == DivKind::FloorDiv && b.kind == DivKind::FloorDiv && a.inner == b.inner &&
        a.weight == 1 && b.divisor % a.divisor == 0 && b.weight == -(b.divisor / a.divisor)) {
      return std::make_pair(a.inner, Digit{k, a.divisor, b.divisor, e.linear.constant});
    }
  }
  return std::nullopt;
}

// Normalization folds `L floordiv d` into a linear form wherever the digit
// boundary d lines up with a variable boundary. Expresses `p` (linear,
// nonconstant) back as const + w * (L op d) for some candidate d, when that
// identity holds on the whole domain.
std::optional<QuasiAffineExpr> as_digit_of(const LinearExpr& p, const LinearExpr& inner,
                                           const std::vector<Index>& candidates, const IntBox& dom) {
  const std::size_t n = dom.rank();
  auto proportional = [&](const LinearExpr& base) -> std::optional<Index> {
    std::optional<Index> w;
    for (std::size_t j = 0; j < n; ++j) {
      if (base.coeffs[j] == 0 && p.coeffs[j] == 0) continue;
      if (base.coeffs[j] == 0 || p.coeffs[j] % base.coeffs[j] != 0) return std::nullopt;
      const Index ratio = p.coeffs[j] / base.coeffs[j];
      if (w && *w != ratio) return std::nullopt;
      w = ratio;
    }
    return w;
  };
  for (Index d : candidates) {
    LinearExpr q = LinearExpr::zero(n);
    LinearExpr r = inner;
    for (std::size_t j = 0; j < n; ++j) {
      q.coeffs[j] = floor_div(r.coeffs[j], d);
      r.coeffs[j] -= d * q.coeffs[j];
    }
    const Interval in = bounds(r, dom);
    const Index bucket = floor_div(in.lo, d);
    if (bucket != floor_div(in.hi, d)) continue;
    // on the domain: L floordiv d == q + bucket, L mod d == r - bucket * d
    if (!q.is_constant()) {
      if (auto w = proportional(q)) {
        QuasiAffineExpr e = QuasiAffineExpr::div(inner, d, DivKind::FloorDiv, *w);
        e.linear.constant = p.constant - *w * bucket;
        return e;
      }
    }
    if (!r.is_constant()) {
      if (auto w = proportional(r)) {
        QuasiAffineExpr e = QuasiAffineExpr::div(inner, d, DivKind::Mod, *w);
        e.linear.constant = p.constant - *w * (r.constant - bucket * d);
        return e;
      }
    }
  }
  return std::nullopt;
}

void merge_terms(QuasiAffineExpr& e) {
  std::sort(e.terms.begin(), e.terms.end(), [](const DivTerm& a, const DivTerm& b) {
    return std::tie(a.kind, a.divisor, a.inner) < std::tie(b.kind, b.divisor, b.inner);
  });
  std::vector<DivTerm> merged;
  for (auto& t : e.terms) {
    if (!merged.empty() && merged.back().kind == t.kind && merged.back().divisor == t.divisor &&
        merged.back().inner == t.inner) {
      merged.back().weight += t.weight;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const DivTerm& t) { return t.weight == 0; });
  e.terms = std::move(merged);
}

// Re-expands linear remainders of digit groups (see as_digit_of).
std::vector<QuasiAffineExpr> expand_folded_digits(const QuasiAffineMap& map) {
  const IntBox& dom = map.domain();
  const std::size_t n = map.in_rank();
  std::vector<QuasiAffineExpr> exprs = map.outputs();
  std::vector<std::pair<LinearExpr, std::vector<Index>>> inners;
  auto add_candidate = [&](const LinearExpr& inner, Index d) {
    if (d <= 1) return;
    auto it = std::find_if(inners.begin(), inners.end(), [&](const auto& g) { return g.first == inner; });
    if (it == inners.end()) {
      inners.emplace_back(inner, std::vector<Index>{});
      it = std::prev(inners.end());
    }
    it->second.push_back(d);
  };
  for (const auto& e : exprs) {
    for (const auto& t : e.terms) {
      add_candidate(t.inner, t.divisor);
      const Index w = std::abs(t.weight);
      if (t.kind == DivKind::FloorDiv && w > 1 && t.divisor % w == 0) add_candidate(t.inner, t.divisor / w);
    }
  }
  if (inners.empty() || dom.empty()) return exprs;
  for (auto& [inner, cands] : inners) {
    for (std::size_t j = 0; j < n; ++j) add_candidate(inner, std::abs(inner.coeffs[j]));
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  }
  auto live_subset = [&](const LinearExpr& p, const LinearExpr& inner) {
    for (std::size_t j = 0; j < n; ++j) {
      if (p.coeffs[j] != 0 && live(dom, j) && inner.coeffs[j] == 0) return false;
    }
    return true;
  };
  for (auto& e : exprs) {
    if (e.linear.is_constant()) continue;
    const LinearExpr p = e.linear;
    for (const auto& [inner, cands] : inners) {
      if (!e.terms.empty() && !(e.terms.front().inner == inner)) continue;
      if (!live_subset(p, inner)) continue;
      if (auto digit = as_digit_of(p, inner, cands, dom)) {
        QuasiAffineExpr rewritten = *digit;
        rewritten.terms.insert(rewritten.terms.end(), e.terms.begin(), e.terms.end());
        merge_terms(rewritten);
        e = std::move(rewritten);
        break;
      }
    }
  }
  return exprs;
}

}  // namespace

std::optional<Decomposition> decompose(const QuasiAffineMap& map) {
  if (map.is_tabulated()) return std::nullopt;
  const IntBox& dom = map.domain();
  const std::size_t n = map.in_rank();
  const std::size_t m = map.out_rank();
  Decomposition dec;
  std::vector<std::pair<LinearExpr, std::vector<Digit>>> groups;
  const std::vector<QuasiAffineExpr> exprs = expand_folded_digits(map);

  for (std::size_t k = 0; k < m; ++k) {
    const QuasiAffineExpr& e = exprs[k];
    if (e.is_linear()) {
      bool any_live = false;
      for (std::size_t j = 0; j < n; ++j) any_live |= (e.linear.coeffs[j] != 0 && live(dom, j));
      if (!any_live) {
        dec.constant_outputs.push_back(k);
        continue;
      }
      Channel ch;
      ch.value = e.linear;
      ch.recovery = LinearExpr::var(m, k);
      ch.verbatim_output = k;
      dec.channels.push_back(std::move(ch));
      continue;
    }
    auto matched = match_digit(e, k);
    if (!matched) return std::nullopt;
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.first == matched->first; });
    if (it == groups.end()) {
      groups.emplace_back(matched->first, std::vector<Digit>{matched->second});
    } else {
      it->second.push_back(matched->second);
    }
  }

  for (auto& [inner, digits] : groups) {
    std::sort(digits.begin(), digits.end(), [](const Digit& a, const Digit& b) { return a.low < b.low; });
    if (digits.front().low != 1 || digits.back().high != 0) return std::nullopt;
    for (std::size_t i = 0; i + 1 < digits.size(); ++i) {
      if (digits[i].high != digits[i + 1].low || digits[i].high <= digits[i].low) return std::nullopt;
    }
    Channel ch;
    ch.value = inner;
    ch.recovery = LinearExpr::zero(m);
    for (const Digit& d : digits) {
      ch.recovery.coeffs[d.output] += d.low;
      ch.recovery.constant -= d.low * d.offset;
    }
    ch.digits = digits;
    dec.has_digits = true;
    dec.channels.push_back(std::move(ch));
  }

  std::vector<int> used(n, 0);
  for (auto& ch : dec.channels) {
    for (std::size_t j = 0; j < n; ++j) {
      if (ch.value.coeffs[j] != 0 && live(dom, j)) {
        ch.vars.push_back(j);
        ++used[j];
      }
    }
    if (ch.vars.empty()) return std::nullopt;
    std::sort(ch.vars.begin(), ch.vars.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(ch.value.coeffs[a]) < std::abs(ch.value.coeffs[b]);
    });
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (live(dom, j) && used[j] != 1) return std::nullopt;
  }
  for (const auto& ch : dec.channels) {
    if (ch.vars.size() == 1) {
      dec.all_unit &= (ch.value.coeffs[ch.vars.front()] == 1);
      continue;
    }
    dec.all_single_var = false;
    Index expected = ch.value.coeffs[ch.vars.front()];
    if (expected < 1) return std::nullopt;
    for (std::size_t j : ch.vars) {
      if (ch.value.coeffs[j] != expected) return std::nullopt;
      expected *= dom.extent(j);
    }
  }
  return dec;
}

MapClass classify_symbolic(const QuasiAffineMap& map) {
  if (map.is_tabulated()) return MapClass::General;
  const auto dec = decompose(map);
  if (!dec) return MapClass::General;
  if (!dec->has_digits && dec->all_single_var) {
    return dec->all_unit ? MapClass::PermShift : MapClass::StridedEmbed;
  }
  return MapClass::MixedRadix;
}

namespace {

std::optional<ImageSet> symbolic_image(const QuasiAffineMap& map, const Decomposition& dec) {
  const std::size_t m = map.out_rank();
  const IntBox& dom = map.domain();
  if (dom.empty()) {
    return ImageSet::lattice(IntBox(std::vector<Index>(m, 0), std::vector<Index>(m, 0)),
                             std::vector<Index>(m, 1));
  }
  std::vector<Index> lo(m), hi(m), stride(m, 1);
  for (std::size_t k : dec.constant_outputs) {
    lo[k] = map.outputs()[k].eval(dom.lower());
    hi[k] = lo[k] + 1;
  }
  for (const auto& ch : dec.channels) {
    const ValueLattice v = channel_values(ch, dom);
    if (ch.digits.empty()) {
      const std::size_t k = ch.verbatim_output;
      lo[k] = v.min;
      hi[k] = v.min + v.step * static_cast<Index>(v.count - 1) + 1;
      stride[k] = v.step;
      continue;
    }
    const Index top = ch.digits.back().low;
    if (v.step != 1 || floor_mod(v.min, top) != 0 || v.count % static_cast<std::uint64_t>(top) != 0) {
      return std::nullopt;
    }
    for (const Digit& d : ch.digits) {
      if (d.high == 0) {
        lo[d.output] = d.offset + v.min / top;
        hi[d.output] = d.offset + (v.min + static_cast<Index>(v.count)) / top;
      } else {
        lo[d.output] = d.offset;
        hi[d.output] = d.offset + d.high / d.low;
      }
    }
  }
  return ImageSet::lattice(IntBox(std::move(lo), std::move(hi)), std::move(stride));
}

std::vector<Point> sorted_unique_rows(std::vector<Index> flat, std::size_t rank, std::size_t rows) {
  std::vector<Point> pts;
  pts.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    pts.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(r * rank),
                     flat.begin() + static_cast<std::ptrdiff_t>((r + 1) * rank));
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

ImageSet enumerate_image(const QuasiAffineMap& map) {
  if (const PointTable* t = map.table()) {
    return ImageSet::enumerated(map.out_rank(), sorted_unique_rows(t->values, t->out_rank, t->rows));
  }
  return ImageSet::enumerated(map.out_rank(),
                              sorted_unique_rows(evaluate_all(map), map.out_rank(),
                                                 static_cast<std::size_t>(map.domain().cardinality())));
}

QuasiAffineMap build_symbolic_inverse(const QuasiAffineMap& map, const Decomposition& dec,
                                      const IntBox& image_box) {
  const IntBox& dom = map.domain();
  const std::size_t n = map.in_rank();
  const std::size_t m = map.out_rank();
  std::vector<QuasiAffineExpr> exprs(n);
  for (std::size_t j = 0; j < n; ++j) exprs[j] = QuasiAffineExpr::constant(m, dom.lo(j));

  for (const auto& ch : dec.channels) {
    // u = sum over live vars of c_v * (i_v - lo_v)
    LinearExpr u = ch.recovery;
    u.constant -= ch.value.eval(dom.lower());
    if (ch.vars.size() == 1) {
      const std::size_t j = ch.vars.front();
      const Index s = ch.value.coeffs[j];
      LinearExpr signed_u = u;
      if (s < 0) signed_u *= -1;
      const Index mag = s < 0 ? -s : s;
      QuasiAffineExpr e = mag == 1 ? QuasiAffineExpr::from(signed_u)
                                   : QuasiAffineExpr::div(signed_u, mag, DivKind::FloorDiv);
      e.linear.constant += dom.lo(j);
      exprs[j] = std::move(e);
      continue;
    }
    const std::size_t r = ch.vars.size();
    for (std::size_t t = 0; t < r; ++t) {
      const std::size_t j = ch.vars[t];
      const Index c = ch.value.coeffs[j];
      QuasiAffineExpr e;
      if (t == r - 1) {
        e = c == 1 ? QuasiAffineExpr::from(u) : QuasiAffineExpr::div(u, c, DivKind::FloorDiv);
      } else {
        const Index next = ch.value.coeffs[ch.vars[t + 1]];
        if (c == 1) {
          e = QuasiAffineExpr::div(u, next, DivKind::Mod);
        } else {
          e = QuasiAffineExpr::div(u, c, DivKind::FloorDiv);
          e += QuasiAffineExpr::div(u, next, DivKind::FloorDiv, -(next / c));
        }
      }
      e.linear.constant += dom.lo(j);
      exprs[j] = std::move(e);
    }
  }
  return QuasiAffineMap(image_box, std::move(exprs));
}

// Sorts domain indices by value; reports the first collision.
InverseResult invert_by_table(const QuasiAffineMap& map, std::vector<Index> values, std::vector<Index> keys,
                              std::size_t rows) {
  const std::size_t n = map.in_rank();
  const std::size_t m = map.out_rank();
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto row = [&](std::size_t r) {
    return std::span<const Index>(values.data() + r * m, m);
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = row(a);
    const auto rb = row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  for (std::size_t i = 0; i + 1 < rows; ++i) {
    const auto a = row(order[i]);
    const auto b = row(order[i + 1]);
    if (std::equal(a.begin(), a.end(), b.begin(), b.end())) {
      Point p(keys.begin() + static_cast<std::ptrdiff_t>(order[i] * n),
              keys.begin() + static_cast<std::ptrdiff_t>((order[i] + 1) * n));
      Point q(keys.begin() + static_cast<std::ptrdiff_t>(order[i + 1] * n),
              keys.begin() + static_cast<std::ptrdiff_t>((order[i + 1] + 1) * n));
      std::ostringstream os;
      os << "not injective: two domain points share an image point";
      return InverseResult::not_invertible(os.str(), std::make_pair(std::move(p), std::move(q)));
    }
  }
  PointTable table;
  table.in_rank = m;
  table.out_rank = n;
  table.rows = rows;
  table.keys.reserve(rows * m);
  table.values.reserve(rows * n);
  std::vector<Point> image_points;
  image_points.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto v = row(order[i]);
    table.keys.insert(table.keys.end(), v.begin(), v.end());
    table.values.insert(table.values.end(), keys.begin() + static_cast<std::ptrdiff_t>(order[i] * n),
                        keys.begin() + static_cast<std::ptrdiff_t>((order[i] + 1) * n));
    image_points.emplace_back(v.begin(), v.end());
  }
  ImageSet img = ImageSet::enumerated(m, std::move(image_points));
  QuasiAffineMap inverse = QuasiAffineMap::tabulated(img.bounding_box(), std::move(table));
  return InverseResult::tabulated(std::move(inverse), std::move(img));
}

std::vector<Index> domain_keys(const IntBox& dom) {
  const auto rows = static_cast<std::size_t>(dom.cardinality());
  std::vector<Index> keys(rows * dom.rank());
  for (std::size_t r = 0; r < rows; ++r) {
    dom.point_at(r, std::span<Index>(keys.data() + r * dom.rank(), dom.rank()));
  }
  return keys;
}

}  // namespace
}  // namespace detail

MapClass classify(const QuasiAffineMap& map) { return detail::classify_symbolic(map); }

// ---------------------------------------------------------------------------
// ImageSet

ImageSet ImageSet::lattice(IntBox box, std::vector<Index> strides) {
  if (strides.size() != box.rank()) {
    throw AffineError(ErrorKind::ArityMismatch, "stride count differs from box rank");
  }
  ImageSet s;
  s.symbolic_ = true;
  s.rank_ = box.rank();
  s.box_ = std::move(box);
  s.strides_ = std::move(strides);
  for (Index st : s.strides_) {
    if (st < 1) throw AffineError(ErrorKind::InvalidBox, "lattice stride must be positive");
  }
  return s;
}

ImageSet ImageSet::enumerated(std::size_t rank, std::vector<Point> sorted_points) {
  ImageSet s;
  s.symbolic_ = false;
  s.rank_ = rank;
  std::vector<Index> lo(rank, 0), hi(rank, 0);
  if (!sorted_points.empty()) {
    lo = sorted_points.front();
    hi = sorted_points.front();
    for (const auto& p : sorted_points) {
      for (std::size_t d = 0; d < rank; ++d) {
        lo[d] = std::min(lo[d], p[d]);
        hi[d] = std::max(hi[d], p[d]);
      }
    }
    for (auto& h : hi) ++h;
  }
  s.box_ = IntBox(std::move(lo), std::move(hi));
  s.strides_.assign(rank, 1);
  s.points_ = std::move(sorted_points);
  return s;
}

std::uint64_t ImageSet::cardinality() const noexcept {
  if (!symbolic_) return points_.size();
  if (box_.empty()) return 0;
  std::uint64_t c = 1;
  for (std::size_t d = 0; d < rank_; ++d) {
    c *= static_cast<std::uint64_t>((box_.extent(d) - 1) / strides_[d] + 1);
  }
  return c;
}

bool ImageSet::contains(std::span<const Index> point) const {
  if (!box_.contains(point)) return false;
  if (!symbolic_) return std::binary_search(points_.begin(), points_.end(), Point(point.begin(), point.end()));
  for (std::size_t d = 0; d < rank_; ++d) {
    if ((point[d] - box_.lo(d)) % strides_[d] != 0) return false;
  }
  return true;
}

bool ImageSet::equals_box(const IntBox& box) const {
  if (box.rank() != rank_) return false;
  if (box.empty() || cardinality() == 0) return box.empty() && cardinality() == 0;
  return box_ == box && cardinality() == box.cardinality();
}

std::vector<Point> ImageSet::points() const {
  if (!symbolic_) return points_;
  std::vector<Point> out;
  box_.for_each([&](std::span<const Index> p) {
    for (std::size_t d = 0; d < rank_; ++d) {
      if ((p[d] - box_.lo(d)) % strides_[d] != 0) return;
    }
    out.emplace_back(p.begin(), p.end());
  });
  return out;
}

ImageSet image(const QuasiAffineMap& map, const Limits& limits) {
  if (!map.is_tabulated()) {
    if (auto dec = detail::decompose(map)) {
      if (auto img = detail::symbolic_image(map, *dec)) return *img;
    }
    if (map.domain().cardinality() > limits.enumeration) {
      throw AffineError(ErrorKind::DomainTooLarge, "image needs enumeration beyond the configured limit");
    }
  }
  return detail::enumerate_image(map);
}

// ---------------------------------------------------------------------------
// InverseResult / reverse

InverseResult InverseResult::symbolic(QuasiAffineMap map, ImageSet image) {
  InverseResult r;
  r.kind_ = Kind::Symbolic;
  r.map_ = std::move(map);
  r.image_ = std::move(image);
  return r;
}

InverseResult InverseResult::tabulated(QuasiAffineMap map, ImageSet image) {
  InverseResult r;
  r.kind_ = Kind::Tabulated;
  r.map_ = std::move(map);
  r.image_ = std::move(image);
  return r;
}

InverseResult InverseResult::not_invertible(std::string reason, std::optional<std::pair<Point, Point>> witness) {
  InverseResult r;
  r.kind_ = Kind::NotInvertible;
  r.reason_ = std::move(reason);
  r.witness_ = std::move(witness);
  return r;
}

const QuasiAffineMap& InverseResult::map() const {
  if (!map_) throw std::logic_error("InverseResult: map not invertible: " + reason_);
  return *map_;
}

const char* to_string(InverseResult::Kind kind) noexcept {
  switch (kind) {
    case InverseResult::Kind::Symbolic: return "Symbolic";
    case InverseResult::Kind::Tabulated: return "Tabulated";
    case InverseResult::Kind::NotInvertible: return "NotInvertible";
  }
  return "?";
}

InverseResult reverse(const QuasiAffineMap& map, const Limits& limits) {
  if (const PointTable* t = map.table()) {
    return detail::invert_by_table(map, t->values, t->keys, t->rows);
  }
  if (auto dec = detail::decompose(map)) {
    std::optional<ImageSet> img = detail::symbolic_image(map, *dec);
    if (!img) {
      if (map.domain().cardinality() > limits.enumeration) {
        return InverseResult::not_invertible("injective, but its image needs enumeration beyond the limit");
      }
      img = detail::enumerate_image(map);
    }
    QuasiAffineMap inverse = detail::build_symbolic_inverse(map, *dec, img->bounding_box());
    return InverseResult::symbolic(std::move(inverse), std::move(*img));
  }
  const std::uint64_t card = map.domain().cardinality();
  if (card > limits.enumeration) {
    std::ostringstream os;
    os << "no structural inverse and domain of " << card << " points exceeds the tabulation limit of "
       << limits.enumeration;
    return InverseResult::not_invertible(os.str());
  }
  return detail::invert_by_table(map, evaluate_all(map), detail::domain_keys(map.domain()),
                                 static_cast<std::size_t>(card));
}

bool is_injective(const QuasiAffineMap& map, const Limits& limits) {
  if (!map.is_tabulated() && detail::decompose(map)) return true;
  if (!map.is_tabulated() && map.domain().cardinality() > limits.enumeration) {
    throw AffineError(ErrorKind::DomainTooLarge, "injectivity check needs enumeration beyond the limit");
  }
  return reverse(map, limits).invertible();
}

}  // namespace memopt::affine
