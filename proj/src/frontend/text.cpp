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

#include "memopt/text.hpp"

#include <cctype>
#include <charconv>
#include <limits>
#include <optional>
#include <sstream>
#include <variant>

namespace memopt::text {

using affine::DivKind;
using affine::Index;
using affine::LinearExpr;
using affine::QuasiAffineExpr;

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column),
      message_(message) {}

namespace {

// ---------------------------------------------------------------------------
// Lexer (one line at a time)

enum class Tok { Ident, Value, Int, Punct, End };

struct Token {
  Tok kind;
  std::string text;  // identifier, name without '%', punctuation
  Index number = 0;
  std::size_t column = 1;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

std::vector<Token> lex(std::string_view line, std::size_t line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    const std::size_t col = i + 1;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else if (c == '#') {
      break;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
      Index v = 0;
      const auto [p, ec] = std::from_chars(line.data() + i, line.data() + j, v);
      if (ec != std::errc{}) throw ParseError(line_no, col, "integer out of range");
      out.push_back({Tok::Int, std::string(line.substr(i, j - i)), v, col});
      i = j;
    } else if (ident_start(c)) {
      std::size_t j = i;
      // a '.' inside a name is allowed, but ".." always ends it
      while (j < line.size() && ident_char(line[j]) && !(line[j] == '.' && j + 1 < line.size() && line[j + 1] == '.')) ++j;
      out.push_back({Tok::Ident, std::string(line.substr(i, j - i)), 0, col});
      i = j;
    } else if (c == '%') {
      std::size_t j = i + 1;
      while (j < line.size() && ident_char(line[j])) ++j;
      if (j == i + 1) throw ParseError(line_no, col, "expected a name after '%'");
      out.push_back({Tok::Value, std::string(line.substr(i + 1, j - i - 1)), 0, col});
      i = j;
    } else if (line.substr(i, 2) == "..") {
      out.push_back({Tok::Punct, "..", 0, col});
      i += 2;
    } else if (line.substr(i, 2) == "<-") {
      out.push_back({Tok::Punct, "<-", 0, col});
      i += 2;
    } else if (std::string_view("[](){},:=+-*@").find(c) != std::string_view::npos) {
      out.push_back({Tok::Punct, std::string(1, c), 0, col});
      ++i;
    } else {
      throw ParseError(line_no, col, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::End, "", 0, line.size() + 1});
  return out;
}

class Cursor {
 public:
  Cursor(std::vector<Token> toks, std::size_t line) : toks_(std::move(toks)), line_(line) {}

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_punct(std::string_view p) const { return peek().kind == Tok::Punct && peek().text == p; }
  bool is_ident(std::string_view w) const { return peek().kind == Tok::Ident && peek().text == w; }

  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool accept(std::string_view p) {
    if (!is_punct(p)) return false;
    next();
    return true;
  }
  void expect(std::string_view p) {
    if (!accept(p)) fail("expected '" + std::string(p) + "'");
  }
  void expect_word(std::string_view w) {
    if (!is_ident(w)) fail("expected '" + std::string(w) + "'");
    next();
  }
  std::string ident(const char* what) {
    if (peek().kind != Tok::Ident) fail(std::string("expected ") + what);
    return next().text;
  }
  std::string value(const char* what) {
    if (peek().kind != Tok::Value) fail(std::string("expected ") + what);
    return next().text;
  }
  Index integer(const char* what) {
    const bool neg = accept("-");
    if (peek().kind != Tok::Int) fail(std::string("expected ") + what);
    const Index v = next().number;
    return neg ? -v : v;
  }
  void expect_end() {
    if (!at_end()) fail("unexpected '" + peek().text + "'");
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, peek().column, msg); }
  // Reports at the token just consumed, for words that parse but mean nothing.
  [[noreturn]] void fail_previous(const std::string& msg) const {
    throw ParseError(line_, toks_[pos_ == 0 ? 0 : pos_ - 1].column, msg);
  }
  std::size_t line() const { return line_; }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

// ---------------------------------------------------------------------------
// Expressions

class ExprParser {
 public:
  ExprParser(Cursor& cur, const std::vector<std::string>& vars) : cur_(cur), vars_(vars) {}

  QuasiAffineExpr expr() {
    QuasiAffineExpr e = term();
    while (true) {
      if (cur_.accept("+")) {
        e += term();
      } else if (cur_.accept("-")) {
        QuasiAffineExpr t = term();
        t *= -1;
        e += t;
      } else {
        return e;
      }
    }
  }

 private:
  static bool is_constant(const QuasiAffineExpr& e) { return e.is_linear() && e.linear.is_constant(); }

  QuasiAffineExpr term() {
    QuasiAffineExpr e = factor();
    while (true) {
      if (cur_.accept("*")) {
        const std::size_t col = cur_.peek().column;
        QuasiAffineExpr rhs = factor();
        if (is_constant(e)) {
          const Index k = e.linear.constant;
          e = std::move(rhs);
          e *= k;
        } else if (is_constant(rhs)) {
          e *= rhs.linear.constant;
        } else {
          throw ParseError(cur_.line(), col, "product of two non-constant expressions");
        }
      } else if (cur_.is_ident("floordiv") || cur_.is_ident("mod")) {
        const std::size_t col = cur_.peek().column;
        const DivKind kind = cur_.next().text == "mod" ? DivKind::Mod : DivKind::FloorDiv;
        const Index d = cur_.integer("a divisor");
        if (d <= 0) throw ParseError(cur_.line(), col, "divisor must be positive");
        if (!e.is_linear()) throw ParseError(cur_.line(), col, "floordiv/mod may not nest");
        e = QuasiAffineExpr::div(e.linear, d, kind);
      } else {
        return e;
      }
    }
  }

  QuasiAffineExpr factor() {
    const std::size_t n = vars_.size();
    if (cur_.accept("-")) {
      QuasiAffineExpr e = factor();
      e *= -1;
      return e;
    }
    if (cur_.accept("(")) {
      QuasiAffineExpr e = expr();
      cur_.expect(")");
      return e;
    }
    if (cur_.peek().kind == Tok::Int) return QuasiAffineExpr::constant(n, cur_.next().number);
    if (cur_.peek().kind == Tok::Ident) {
      const Token t = cur_.peek();
      for (std::size_t j = 0; j < n; ++j) {
        if (vars_[j] == t.text) {
          cur_.next();
          return QuasiAffineExpr::var(n, j);
        }
      }
      cur_.fail("unknown loop variable '" + t.text + "'");
    }
    cur_.fail("expected an index expression");
  }

  Cursor& cur_;
  const std::vector<std::string>& vars_;
};

// ---------------------------------------------------------------------------
// Program

struct NestHeader {
  ir::OperatorNest nest;
  std::vector<std::string> vars;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ir::Program run() {
    ir::Program program;
    std::optional<NestHeader> open;
    std::size_t open_line = 0;
    std::size_t line_no = 0;
    std::string_view rest = text_;
    while (!rest.empty()) {
      const auto nl = rest.find('\n');
      const std::string_view line = rest.substr(0, nl);
      rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
      ++line_no;
      Cursor cur(lex(line, line_no), line_no);
      if (cur.at_end()) continue;

      if (open) {
        if (cur.accept("}")) {
          cur.expect_end();
          program.nests.push_back(std::move(open->nest));
          open.reset();
          continue;
        }
        if (cur.is_ident("nest") || cur.is_ident("tensor")) cur.fail("missing '}' before this line");
        open->nest.body.push_back(statement(cur, *open));
        continue;
      }
      if (cur.is_ident("tensor")) {
        program.tensors.push_back(tensor(cur));
      } else if (cur.is_ident("nest")) {
        open = header(cur);
        open_line = line_no;
      } else if (cur.is_punct("}")) {
        cur.fail("'}' without an open nest");
      } else {
        cur.fail("expected 'tensor' or 'nest'");
      }
    }
    if (open) throw ParseError(open_line, 1, "nest '" + open->nest.name + "' is not closed");
    return program;
  }

 private:
  static ir::TensorDecl tensor(Cursor& cur) {
    cur.expect_word("tensor");
    ir::TensorDecl t;
    t.name = cur.value("a tensor name");
    cur.expect(":");
    t.elem_size = cur.integer("an element size");
    cur.expect_word("x");
    cur.expect("[");
    if (!cur.is_punct("]")) {
      do {
        t.shape.push_back(cur.integer("an extent"));
      } while (cur.accept(","));
    }
    cur.expect("]");
    cur.expect("@");
    const std::string loc = cur.ident("@dram or @sbuf");
    if (loc == "dram") {
      t.location = ir::Location::OffChip;
    } else if (loc == "sbuf") {
      t.location = ir::Location::OnChip;
    } else {
      cur.fail_previous("location must be @dram or @sbuf");
    }
    if (cur.is_ident("bank")) {
      cur.next();
      cur.expect("(");
      cur.expect_word("axis");
      cur.expect("=");
      const Index axis = cur.integer("an axis");
      if (axis < 0) cur.fail_previous("axis must be non-negative");
      cur.expect(",");
      cur.expect_word("banks");
      cur.expect("=");
      const Index banks = cur.integer("a bank count");
      cur.expect(",");
      const auto policy = ir::parse_policy(cur.ident("cyclic or blocked"));
      if (!policy) cur.fail_previous("policy must be cyclic or blocked");
      cur.expect(")");
      t.mapping = ir::BankMapping{static_cast<std::size_t>(axis), banks, *policy};
    }
    bool input = false, output = false;
    if (cur.is_ident("input")) {
      cur.next();
      input = true;
    }
    if (cur.is_ident("output")) {
      cur.next();
      output = true;
    }
    cur.expect_end();
    t.origin = input && output ? ir::Origin::InputOutput
               : input         ? ir::Origin::ModelInput
               : output        ? ir::Origin::ModelOutput
                               : ir::Origin::Intermediate;
    return t;
  }

  static NestHeader header(Cursor& cur) {
    cur.expect_word("nest");
    NestHeader h;
    h.nest.name = cur.ident("a nest name");
    cur.expect_word("kind");
    cur.expect("=");
    const std::string kind = cur.ident("an operator kind");
    const auto k = ir::parse_op_kind(kind);
    if (!k) cur.fail_previous("unknown operator kind '" + kind + "'");
    h.nest.kind = *k;
    cur.expect("(");
    std::vector<Index> lo, hi;
    if (!cur.is_punct(")")) {
      do {
        const std::string v = cur.ident("a loop variable");
        for (const auto& w : h.vars) {
          if (w == v) cur.fail("loop variable '" + v + "' declared twice");
        }
        h.vars.push_back(v);
        cur.expect_word("in");
        lo.push_back(cur.integer("a lower bound"));
        cur.expect("..");
        hi.push_back(cur.integer("an upper bound"));
        if (hi.back() < lo.back()) cur.fail("empty range with upper bound below lower bound");
      } while (cur.accept(","));
    }
    cur.expect(")");
    cur.expect("{");
    cur.expect_end();
    try {
      h.nest.box = affine::IntBox(lo, hi);
    } catch (const affine::AffineError& e) {
      throw ParseError(cur.line(), 1, e.what());
    }
    return h;
  }

  static affine::QuasiAffineMap access(Cursor& cur, const NestHeader& h) {
    const std::size_t col = cur.peek().column;
    std::vector<QuasiAffineExpr> outs;
    cur.expect("[");
    if (!cur.is_punct("]")) {
      ExprParser ep(cur, h.vars);
      do {
        outs.push_back(ep.expr());
      } while (cur.accept(","));
    }
    cur.expect("]");
    try {
      return affine::QuasiAffineMap(h.nest.box, std::move(outs));
    } catch (const affine::AffineError& e) {
      throw ParseError(cur.line(), col, e.what());
    }
  }

  static ir::Statement statement(Cursor& cur, const NestHeader& h) {
    if (cur.is_ident("store")) {
      cur.next();
      ir::Store s;
      s.tensor = cur.value("a tensor name");
      s.access = access(cur, h);
      cur.expect("=");
      s.value = cur.value("a value");
      cur.expect_end();
      return s;
    }
    if (cur.is_ident("memcopy")) {
      cur.next();
      ir::Memcopy m;
      m.dst = cur.value("a destination tensor");
      cur.expect("<-");
      m.src = cur.value("a source tensor");
      m.map = cur.is_punct("[") ? access(cur, h) : affine::QuasiAffineMap::identity(h.nest.box);
      cur.expect_end();
      return m;
    }
    const std::string result = cur.value("a statement");
    cur.expect("=");
    const std::string op = cur.ident("load or an opcode");
    if (op == "load") {
      ir::Load l;
      l.result = result;
      l.tensor = cur.value("a tensor name");
      l.access = access(cur, h);
      cur.expect_end();
      return l;
    }
    const auto code = ir::parse_opcode(op);
    if (!code) cur.fail_previous("unknown opcode '" + op + "'");
    ir::Compute c;
    c.result = result;
    c.op = *code;
    while (!cur.at_end()) {
      c.operands.push_back(cur.value("an operand"));
      cur.accept(",");
    }
    return c;
  }

  std::string_view text_;
};

// ---------------------------------------------------------------------------
// Printer

void print_linear(std::ostringstream& os, const LinearExpr& e, const std::vector<std::string>& vars, bool& first) {
  auto emit = [&](Index k, const std::string& atom) {
    if (first) {
      if (k < 0) os << '-';
    } else {
      os << (k < 0 ? " - " : " + ");
    }
    const Index a = k < 0 ? -k : k;
    if (atom.empty()) {
      os << a;
    } else {
      if (a != 1) os << a << '*';
      os << atom;
    }
    first = false;
  };
  for (std::size_t j = 0; j < e.coeffs.size(); ++j) {
    if (e.coeffs[j] != 0) emit(e.coeffs[j], vars[j]);
  }
  if (e.constant != 0) emit(e.constant, "");
}

}  // namespace

std::string print_expr(const QuasiAffineExpr& expr, const std::vector<std::string>& vars) {
  std::ostringstream os;
  bool first = true;
  print_linear(os, expr.linear, vars, first);
  for (const auto& t : expr.terms) {
    std::ostringstream inner;
    bool inner_first = true;
    print_linear(inner, t.inner, vars, inner_first);
    if (inner_first) inner << '0';
    const std::string div = "(" + inner.str() + ") " + (t.kind == DivKind::Mod ? "mod " : "floordiv ") +
                            std::to_string(t.divisor);
    const Index w = t.weight < 0 ? -t.weight : t.weight;
    if (first) {
      if (t.weight < 0) os << '-';
    } else {
      os << (t.weight < 0 ? " - " : " + ");
    }
    if (w == 1) {
      os << div;
    } else {
      os << w << "*(" << div << ')';
    }
    first = false;
  }
  if (first) os << '0';
  return os.str();
}

namespace {

std::vector<std::string> loop_vars(std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t j = 0; j < n; ++j) v.push_back("i" + std::to_string(j));
  return v;
}

std::string print_access(const affine::QuasiAffineMap& map, const std::vector<std::string>& vars) {
  if (map.is_tabulated()) throw std::logic_error("a tabulated access has no textual form");
  std::string s = "[";
  for (std::size_t k = 0; k < map.out_rank(); ++k) {
    if (k) s += ", ";
    s += print_expr(map.outputs()[k], vars);
  }
  return s + "]";
}

}  // namespace

ir::Program parse(std::string_view text) { return Parser(text).run(); }

std::string print(const ir::Program& program) {
  std::ostringstream os;
  for (const auto& t : program.tensors) {
    os << "tensor %" << t.name << " : " << t.elem_size << "x[";
    for (std::size_t d = 0; d < t.shape.size(); ++d) os << (d ? ", " : "") << t.shape[d];
    os << "] @" << ir::to_string(t.location);
    if (t.mapping) {
      os << " bank(axis=" << t.mapping->axis << ", banks=" << t.mapping->banks << ", "
         << ir::to_string(t.mapping->policy) << ')';
    }
    if (t.is_input()) os << " input";
    if (t.is_output()) os << " output";
    os << '\n';
  }
  for (const auto& nest : program.nests) {
    const auto vars = loop_vars(nest.box.rank());
    os << "\nnest " << nest.name << " kind=" << ir::to_string(nest.kind) << " (";
    for (std::size_t j = 0; j < vars.size(); ++j) {
      os << (j ? ", " : "") << vars[j] << " in " << nest.box.lo(j) << ".." << nest.box.hi(j);
    }
    os << ") {\n";
    for (const auto& st : nest.body) {
      os << "  ";
      if (const auto* l = std::get_if<ir::Load>(&st)) {
        os << '%' << l->result << " = load %" << l->tensor << print_access(l->access, vars);
      } else if (const auto* w = std::get_if<ir::Store>(&st)) {
        os << "store %" << w->tensor << print_access(w->access, vars) << " = %" << w->value;
      } else if (const auto* c = std::get_if<ir::Compute>(&st)) {
        os << '%' << c->result << " = " << ir::to_string(c->op);
        for (const auto& o : c->operands) os << " %" << o;
      } else if (const auto* m = std::get_if<ir::Memcopy>(&st)) {
        os << "memcopy %" << m->dst << " <- %" << m->src;
        if (!m->map.is_identity()) os << print_access(m->map, vars);
      }
      os << '\n';
    }
    os << "}\n";
  }
  return os.str();
}

}  // namespace memopt::text
