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

#include "memopt/generators.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace memopt::gen {

namespace {

using affine::DivKind;
using affine::Index;
using affine::IntBox;
using affine::LinearExpr;
using affine::QuasiAffineExpr;
using affine::QuasiAffineMap;
using Shape = std::vector<Index>;
using Exprs = std::vector<QuasiAffineExpr>;

// Draws through explicit modular arithmetic on the raw engine output so the
// sequence does not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  bool coin() { return below(2) == 1; }
  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[below(i)]);
    return p;
  }

 private:
  std::mt19937_64 engine_;
};

Index elements(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), Index{1}, std::multiplies<>());
}

class Builder {
 public:
  ir::Program program;

  std::string tensor(const Shape& shape, ir::Location loc, ir::Origin origin, const std::string& name = "") {
    std::string n = name.empty() ? "t" + std::to_string(++tensors_) : name;
    program.tensors.push_back({n, 4, shape, loc, std::nullopt, origin});
    return n;
  }
  std::string intermediate(const Shape& shape) {
    return tensor(shape, ir::Location::OnChip, ir::Origin::Intermediate);
  }

  // dst[store(i)] = src[load(i)] over `box`.
  void copy(ir::OpKind kind, const IntBox& box, const std::string& src, Exprs load, const std::string& dst,
            Exprs store) {
    add(kind, box,
        {ir::Load{"v", src, QuasiAffineMap(box, std::move(load))},
         ir::Store{dst, QuasiAffineMap(box, std::move(store)), "v"}});
  }

  // dst = op(srcs...) elementwise over dst's shape.
  void compute(ir::OpKind kind, ir::Opcode op, const std::vector<std::string>& srcs, const std::string& dst) {
    const IntBox box = program.find_tensor(dst)->box();
    std::vector<ir::Statement> body;
    std::vector<std::string> operands;
    for (std::size_t k = 0; k < srcs.size(); ++k) {
      operands.push_back("a" + std::to_string(k));
      body.push_back(ir::Load{operands.back(), srcs[k], QuasiAffineMap::identity(box)});
    }
    body.push_back(ir::Compute{"r", op, operands});
    body.push_back(ir::Store{dst, QuasiAffineMap::identity(box), "r"});
    add(kind, box, std::move(body));
  }

  void add(ir::OpKind kind, const IntBox& box, std::vector<ir::Statement> body) {
    std::string name = std::string(ir::to_string(kind)) + "_" + std::to_string(++nests_);
    program.nests.push_back({std::move(name), kind, box, std::move(body)});
  }

 private:
  std::size_t tensors_ = 0;
  std::size_t nests_ = 0;
};

Exprs identity_exprs(std::size_t n, std::size_t offset = 0) {
  Exprs e;
  for (std::size_t k = 0; k < n; ++k) e.push_back(QuasiAffineExpr::var(n + offset, k + offset));
  return e;
}

// ---------------------------------------------------------------------------
// WaveNet analog

enum class CopyShape {
  Transpose,
  StridedSlice,
  Split,
  Unflatten,
  Flatten,  // store inverse has floordiv/mod
  Repeat,   // store inverse has floordiv/mod
};

// A copy whose store inverse needs floordiv/mod must read a tensor whose
// accesses stay linear after earlier eliminations; otherwise the rewritten
// load would nest one division inside another. Copies with a linear store
// inverse can follow anything.
bool needs_linear_source(CopyShape c) { return c == CopyShape::Flatten || c == CopyShape::Repeat; }

std::vector<CopyShape> candidates(const Shape& s) {
  const Index n = elements(s);
  std::vector<CopyShape> out;
  const bool can_shrink = std::any_of(s.begin(), s.end(), [](Index e) { return e >= 4; });
  if (s.size() >= 2) out.push_back(CopyShape::Transpose);
  if (can_shrink && n > 16) {
    out.push_back(CopyShape::StridedSlice);
    out.push_back(CopyShape::Split);
  }
  if (s.size() < 3 && std::any_of(s.begin(), s.end(), [](Index e) { return e >= 4 && e % 2 == 0; })) {
    out.push_back(CopyShape::Unflatten);
  }
  if (s.size() >= 2) out.push_back(CopyShape::Flatten);
  if (n <= 128) out.push_back(CopyShape::Repeat);
  return out;
}

// Emits one copy nest from `src` of shape `s`; returns the new tensor and
// updates `s`.
std::string emit_copy(Builder& b, Rng& rng, CopyShape c, const std::string& src, Shape& s) {
  const std::size_t r = s.size();
  std::string dst;
  switch (c) {
    case CopyShape::Transpose: {
      std::vector<std::size_t> perm;
      do {
        perm = rng.permutation(r);
      } while (std::is_sorted(perm.begin(), perm.end()));
      Shape out(r);
      Exprs store;
      for (std::size_t k = 0; k < r; ++k) {
        out[k] = s[perm[k]];
        store.push_back(QuasiAffineExpr::var(r, perm[k]));
      }
      dst = b.intermediate(out);
      b.copy(ir::OpKind::Transpose, IntBox::from_extents(s), src, identity_exprs(r), dst, store);
      s = out;
      break;
    }
    case CopyShape::StridedSlice:
    case CopyShape::Split: {
      std::vector<std::size_t> axes;
      for (std::size_t k = 0; k < r; ++k) {
        if (s[k] >= 4) axes.push_back(k);
      }
      const std::size_t a = axes[rng.below(axes.size())];
      Index stride = 1, offset = 0, extent = s[a] / 2;
      if (c == CopyShape::StridedSlice) {
        stride = rng.coin() ? 2 : 1;
        offset = static_cast<Index>(rng.below(static_cast<std::size_t>(s[a] - 2 * stride) + 1));
        extent = (s[a] - offset + stride - 1) / stride;
      } else if (rng.coin()) {
        offset = s[a] - extent;
      }
      Shape out = s;
      out[a] = extent;
      Exprs load = identity_exprs(r);
      load[a] = QuasiAffineExpr::var(r, a, stride, offset);
      dst = b.intermediate(out);
      b.copy(c == CopyShape::Split ? ir::OpKind::Split : ir::OpKind::StridedSlice, IntBox::from_extents(out), src,
             load, dst, identity_exprs(r));
      s = out;
      break;
    }
    case CopyShape::Unflatten: {
      std::vector<std::size_t> axes;
      for (std::size_t k = 0; k < r; ++k) {
        if (s[k] >= 4 && s[k] % 2 == 0) axes.push_back(k);
      }
      const std::size_t a = axes[rng.below(axes.size())];
      std::vector<Index> divisors;
      for (Index d = 2; d * 2 <= s[a]; ++d) {
        if (s[a] % d == 0) divisors.push_back(d);
      }
      const Index w = divisors[rng.below(divisors.size())];
      Shape out;
      Exprs store;
      for (std::size_t k = 0; k < r; ++k) {
        if (k == a) {
          out.push_back(s[k] / w);
          out.push_back(w);
          store.push_back(QuasiAffineExpr::div(LinearExpr::var(r, k), w, DivKind::FloorDiv));
          store.push_back(QuasiAffineExpr::div(LinearExpr::var(r, k), w, DivKind::Mod));
        } else {
          out.push_back(s[k]);
          store.push_back(QuasiAffineExpr::var(r, k));
        }
      }
      dst = b.intermediate(out);
      b.copy(ir::OpKind::Reshape, IntBox::from_extents(s), src, identity_exprs(r), dst, store);
      s = out;
      break;
    }
    case CopyShape::Flatten: {
      const std::size_t a = rng.below(r - 1);
      Shape out;
      Exprs store;
      for (std::size_t k = 0; k < r; ++k) {
        if (k == a) {
          out.push_back(s[k] * s[k + 1]);
          QuasiAffineExpr e = QuasiAffineExpr::var(r, k, s[k + 1]);
          e += QuasiAffineExpr::var(r, k + 1);
          store.push_back(e);
          ++k;
        } else {
          out.push_back(s[k]);
          store.push_back(QuasiAffineExpr::var(r, k));
        }
      }
      dst = b.intermediate(out);
      b.copy(ir::OpKind::Reshape, IntBox::from_extents(s), src, identity_exprs(r), dst, store);
      s = out;
      break;
    }
    case CopyShape::Repeat: {
      // Loop j over the copies, then the source axes: dst[.., e*j + i_a, ..] = src[i].
      const std::size_t a = rng.below(r);
      const Index times = rng.coin() ? 3 : 2;
      Shape box{times};
      box.insert(box.end(), s.begin(), s.end());
      Exprs store;
      for (std::size_t k = 0; k < r; ++k) {
        QuasiAffineExpr e = QuasiAffineExpr::var(r + 1, k + 1);
        if (k == a) e += QuasiAffineExpr::var(r + 1, 0, s[a]);
        store.push_back(e);
      }
      Shape out = s;
      out[a] *= times;
      dst = b.intermediate(out);
      b.copy(ir::OpKind::Repeat, IntBox::from_extents(box), src, identity_exprs(r, 1), dst, store);
      s = out;
      break;
    }
  }
  return dst;
}

// dst[(i0 + i1) mod e0, rest] = src[(i0 + i1) mod e0, rest] over i0 < 2,
// i1 < e0: every element of dst is written twice, so the store cannot be
// inverted.
std::string emit_collision(Builder& b, const std::string& src, const Shape& s) {
  const std::size_t r = s.size();
  Shape box{2, s[0]};
  box.insert(box.end(), s.begin() + 1, s.end());
  LinearExpr lead = LinearExpr::var(r + 1, 0);
  lead += LinearExpr::var(r + 1, 1);
  Exprs access{QuasiAffineExpr::div(lead, s[0], DivKind::Mod)};
  for (std::size_t k = 1; k < r; ++k) access.push_back(QuasiAffineExpr::var(r + 1, k + 1));
  const std::string dst = b.intermediate(s);
  b.copy(ir::OpKind::Copy, IntBox::from_extents(box), src, access, dst, access);
  return dst;
}

}  // namespace

ir::Program wavenet_analog(std::size_t copy_pairs, std::size_t non_invertible, std::uint64_t seed) {
  if (non_invertible > copy_pairs) {
    throw std::invalid_argument("non_invertible (" + std::to_string(non_invertible) + ") exceeds copy_pairs (" +
                                std::to_string(copy_pairs) + ")");
  }
  Rng rng(seed);
  Builder b;
  const Index extents[] = {4, 6, 8};
  Shape s{extents[rng.below(3)], extents[rng.below(3)]};
  const std::string input = b.tensor(s, ir::Location::OffChip, ir::Origin::ModelInput, "x");

  std::set<std::size_t> colliding;
  {
    const auto order = rng.permutation(copy_pairs);
    colliding.insert(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(non_invertible));
  }

  // Tensors by shape, for residual operands.
  std::vector<std::pair<Shape, std::string>> history{{s, input}};
  std::string cur = input;
  bool after_copy = false;

  auto compute = [&] {
    const std::string dst = b.intermediate(s);
    std::vector<std::string> same;
    for (const auto& [shape, name] : history) {
      if (shape == s && name != cur) same.push_back(name);
    }
    switch (rng.below(3)) {
      case 0:
        b.compute(ir::OpKind::Elementwise, ir::Opcode::Neg, {cur}, dst);
        break;
      case 1:
        if (!same.empty()) {
          b.compute(ir::OpKind::Elementwise, ir::Opcode::Add, {cur, same[rng.below(same.size())]}, dst);
        } else {
          b.compute(ir::OpKind::Elementwise, ir::Opcode::Add, {cur, cur}, dst);
        }
        break;
      default:
        b.compute(ir::OpKind::Elementwise, ir::Opcode::Max, {cur, cur}, dst);
        break;
    }
    cur = dst;
    history.emplace_back(s, cur);
    after_copy = false;
  };

  compute();
  for (std::size_t c = 0; c < copy_pairs; ++c) {
    if (rng.coin()) compute();
    if (colliding.count(c) != 0) {
      // its load has a mod, so it takes the same precaution as below
      if (after_copy) compute();
      cur = emit_collision(b, cur, s);
    } else {
      const auto options = candidates(s);
      const CopyShape choice = options[rng.below(options.size())];
      if (after_copy && needs_linear_source(choice)) compute();
      cur = emit_copy(b, rng, choice, cur, s);
    }
    history.emplace_back(s, cur);
    after_copy = true;
  }
  const std::string output = b.tensor(s, ir::Location::OffChip, ir::Origin::ModelOutput, "y");
  b.compute(ir::OpKind::Elementwise, ir::Opcode::Neg, {cur}, output);
  return std::move(b.program);
}

// ---------------------------------------------------------------------------
// ResNet analog

ir::Program resnet_analog(std::size_t blocks, std::size_t transposes_between, std::uint64_t seed) {
  if (blocks == 0) throw std::invalid_argument("blocks must be at least 1");
  Rng rng(seed);
  Builder b;
  constexpr Index kN = 4;
  const Shape cube{kN, kN, kN};
  const IntBox box = IntBox::from_extents(cube);

  std::string act = b.tensor(cube, ir::Location::OffChip, ir::Origin::ModelInput, "x");
  std::vector<std::string> weights;
  for (std::size_t k = 0; k < blocks; ++k) {
    weights.push_back(b.tensor({kN}, ir::Location::OffChip, ir::Origin::ModelInput, "w" + std::to_string(k)));
  }

  for (std::size_t k = 0; k < blocks; ++k) {
    const bool last = k + 1 == blocks;
    const std::string y = last && transposes_between == 0
                              ? b.tensor(cube, ir::Location::OffChip, ir::Origin::ModelOutput, "y")
                              : b.intermediate(cube);
    // y[i] = act[i] * w[i2]
    b.add(ir::OpKind::Conv2d, box,
          {ir::Load{"a", act, QuasiAffineMap::identity(box)},
           ir::Load{"w", weights[k], QuasiAffineMap(box, {QuasiAffineExpr::var(3, 2)})},
           ir::Compute{"r", ir::Opcode::Mul, {"a", "w"}}, ir::Store{y, QuasiAffineMap::identity(box), "r"}});

    std::string cur = y;
    for (std::size_t t = 0; t < transposes_between; ++t) {
      std::vector<std::size_t> perm;
      do {
        perm = rng.permutation(3);
      } while (std::is_sorted(perm.begin(), perm.end()));
      Exprs store;
      for (std::size_t d = 0; d < 3; ++d) store.push_back(QuasiAffineExpr::var(3, perm[d]));
      const std::string dst = last && t + 1 == transposes_between
                                  ? b.tensor(cube, ir::Location::OffChip, ir::Origin::ModelOutput, "y")
                                  : b.intermediate(cube);
      b.copy(ir::OpKind::Transpose, box, cur, identity_exprs(3), dst, store);
      cur = dst;
    }
    if (!last) {
      const std::string z = b.intermediate(cube);
      b.compute(ir::OpKind::Elementwise, ir::Opcode::Add, {cur, act}, z);
      act = z;
    }
  }
  return std::move(b.program);
}

}  // namespace memopt::gen
