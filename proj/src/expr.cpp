#include "pqn/expr.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>

namespace pqn {

namespace {

constexpr std::array<std::string_view, 5> kFunctionNames = {"exp", "log", "sin", "cos", "sqrt"};

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t node_hash(Op op, double value, std::uint32_t index, const Expr& a, const Expr& b) {
  std::size_t h = static_cast<std::size_t>(op) * 0x100000001b3ULL;
  h = mix(h, std::bit_cast<std::uint64_t>(value));
  h = mix(h, index);
  if (a.valid()) h = mix(h, a.hash());
  if (b.valid()) h = mix(h, b.hash());
  return h;
}

}  // namespace

Expr make_unary(Op op, std::uint32_t index, Expr a) {
  Expr none(nullptr);
  const std::size_t h = node_hash(op, 0.0, index, a, none);
  return Expr(std::make_shared<const Node>(Node{op, 0.0, index, std::move(a), std::move(none), h}));
}

Expr make_binary(Op op, Expr a, Expr b) {
  const std::size_t h = node_hash(op, 0.0, 0, a, b);
  return Expr(std::make_shared<const Node>(Node{op, 0.0, 0, std::move(a), std::move(b), h}));
}

// ---------------------------------------------------------------- Chart

Chart::Chart(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw std::invalid_argument("chart must have at least one coordinate");
  std::set<std::string_view> seen;
  for (const auto& n : names_) {
    if (!is_identifier(n)) throw std::invalid_argument("invalid coordinate name '" + n + "'");
    for (auto f : kFunctionNames) {
      if (n == f) throw std::invalid_argument("coordinate name '" + n + "' shadows a function");
    }
    if (!seen.insert(n).second) throw std::invalid_argument("duplicate coordinate name '" + n + "'");
  }
}

std::optional<std::size_t> Chart::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- Expr basics

Expr::Expr() : Expr(0.0) {}

Expr::Expr(double value) {
  // Leaf: children stay empty handles (node_ == nullptr) to end recursion.
  auto n = std::shared_ptr<Node>(new Node{Op::Constant, value, 0, Expr(nullptr), Expr(nullptr), 0});
  n->hash = node_hash(Op::Constant, value, 0, n->a, n->b);
  node_ = std::move(n);
}

Expr Expr::coord(std::size_t index) {
  auto n = std::shared_ptr<Node>(
      new Node{Op::Coord, 0.0, static_cast<std::uint32_t>(index), Expr(nullptr), Expr(nullptr), 0});
  n->hash = node_hash(Op::Coord, 0.0, n->index, n->a, n->b);
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Op Expr::op() const noexcept { return node_->op; }
double Expr::value() const noexcept { return node_->value; }
std::uint32_t Expr::index() const noexcept { return node_->index; }
const Expr& Expr::lhs() const noexcept { return node_->a; }
const Expr& Expr::rhs() const noexcept { return node_->b; }
std::size_t Expr::hash() const noexcept { return node_->hash; }
bool Expr::is_zero() const noexcept { return op() == Op::Constant && value() == 0.0; }
bool Expr::is_one() const noexcept { return op() == Op::Constant && value() == 1.0; }

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr(-a.value());
  if (a.op() == Op::Neg) return a.arg();
  return make_unary(Op::Neg, 0, a);
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() + b.value());
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return make_binary(Op::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() - b.value());
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  return make_binary(Op::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() * b.value());
  if (a.is_zero() || b.is_zero()) return Expr(0.0);
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  if (a.is_constant() && a.value() == -1.0) return -b;
  if (b.is_constant() && b.value() == -1.0) return -a;
  return make_binary(Op::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.value() != 0.0) return Expr(a.value() / b.value());
  if (a.is_zero() && !(b.is_constant() && b.value() == 0.0)) return Expr(0.0);
  if (b.is_one()) return a;
  return make_binary(Op::Div, a, b);
}

Expr pow(const Expr& base, std::uint32_t exponent) {
  if (exponent == 0) return Expr(1.0);
  if (exponent == 1) return base;
  if (base.is_constant()) return Expr(std::pow(base.value(), static_cast<double>(exponent)));
  return make_unary(Op::IntPow, exponent, base);
}

namespace {

Expr unary(Op op, const Expr& e, double (*fn)(double)) {
  if (e.is_constant()) {
    const double v = fn(e.value());
    if (std::isfinite(v)) return Expr(v);
  }
  return make_unary(op, 0, e);
}

}  // namespace

Expr exp(const Expr& e) { return unary(Op::Exp, e, [](double x) { return std::exp(x); }); }
Expr log(const Expr& e) { return unary(Op::Log, e, [](double x) { return std::log(x); }); }
Expr sin(const Expr& e) { return unary(Op::Sin, e, [](double x) { return std::sin(x); }); }
Expr cos(const Expr& e) { return unary(Op::Cos, e, [](double x) { return std::cos(x); }); }
Expr sqrt(const Expr& e) { return unary(Op::Sqrt, e, [](double x) { return std::sqrt(x); }); }

// ---------------------------------------------------------------- parser

ParseError::ParseError(Kind kind, std::size_t offset, const std::string& message)
    : std::runtime_error(message + " at offset " + std::to_string(offset)),
      kind_(kind),
      offset_(offset) {}

namespace {

class Parser {
 public:
  Parser(std::string_view text, const Chart& chart) : text_(text), chart_(chart) {}

  Expr run() {
    Expr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, ParseError::Kind kind = ParseError::Kind::Syntax) const {
    throw ParseError(kind, pos_, msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_binary(Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make_binary(Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = make_binary(Op::Mul, lhs, factor());
      } else if (accept('/')) {
        lhs = make_binary(Op::Div, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  Expr factor() {
    if (accept('-')) return make_unary(Op::Neg, 0, power());
    return power();
  }

  Expr power() {
    Expr base = atom();
    if (!accept('^')) return base;
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) fail("exponent must be a non-negative integer literal");
    if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
      fail("exponent must be a non-negative integer literal", ParseError::Kind::MalformedNumber);
    }
    std::uint32_t n = 0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, n);
    if (ec != std::errc()) {
      pos_ = start;
      fail("exponent out of range", ParseError::Kind::MalformedNumber);
    }
    (void)ptr;
    return make_unary(Op::IntPow, n, base);
  }

  Expr atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (c == '(') {
      ++pos_;
      Expr inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      const std::size_t s = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      return pos_ - s;
    };
    if (digits() == 0) fail("malformed number", ParseError::Kind::MalformedNumber);
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      if (digits() == 0) fail("malformed number: missing fraction digits", ParseError::Kind::MalformedNumber);
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail("malformed number: missing exponent digits", ParseError::Kind::MalformedNumber);
    }
    if (pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      fail("malformed number", ParseError::Kind::MalformedNumber);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    (void)ptr;
    if (ec != std::errc() || !std::isfinite(v)) {
      pos_ = start;
      fail("malformed number", ParseError::Kind::MalformedNumber);
    }
    return Expr(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    for (std::size_t f = 0; f < kFunctionNames.size(); ++f) {
      if (name != kFunctionNames[f]) continue;
      if (!accept('(')) fail("expected '(' after function name");
      Expr inner = expr();
      if (!accept(')')) fail("expected ')'");
      constexpr std::array<Op, 5> ops = {Op::Exp, Op::Log, Op::Sin, Op::Cos, Op::Sqrt};
      return make_unary(ops[f], 0, inner);
    }
    if (auto idx = chart_.index_of(name)) return Expr::coord(*idx);
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'", ParseError::Kind::UnknownIdentifier);
  }

  std::string_view text_;
  const Chart& chart_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, const Chart& chart) { return Parser(text, chart).run(); }

// ---------------------------------------------------------------- printer

namespace {

std::string format_number(double v) {
  if (!std::isfinite(v)) throw std::domain_error("cannot print a non-finite constant");
  char buf[32];
  for (int prec : {15, 16, 17}) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// Precedence: 1 additive, 2 multiplicative, 3 unary minus, 4 power, 5 atom.
int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::IntPow:
      return 4;
    case Op::Constant:
      return e.value() < 0.0 || std::signbit(e.value()) ? 3 : 5;
    default:
      return 5;
  }
}

void print(const Expr& e, const Chart& chart, int min_prec, std::string& out) {
  const int prec = precedence(e);
  const bool paren = prec < min_prec;
  if (paren) out += '(';
  switch (e.op()) {
    case Op::Constant:
      if (std::signbit(e.value())) {
        out += '-';
        out += format_number(-e.value());
      } else {
        out += format_number(e.value());
      }
      break;
    case Op::Coord:
      out += chart.name(e.index());
      break;
    case Op::Neg:
      out += '-';
      print(e.arg(), chart, 4, out);
      break;
    case Op::Add:
    case Op::Sub:
      print(e.lhs(), chart, 1, out);
      out += e.op() == Op::Add ? " + " : " - ";
      print(e.rhs(), chart, 2, out);
      break;
    case Op::Mul:
    case Op::Div:
      print(e.lhs(), chart, 2, out);
      out += e.op() == Op::Mul ? "*" : "/";
      print(e.rhs(), chart, 3, out);
      break;
    case Op::IntPow:
      print(e.arg(), chart, 5, out);
      out += '^';
      out += std::to_string(e.index());
      break;
    case Op::Exp:
    case Op::Log:
    case Op::Sin:
    case Op::Cos:
    case Op::Sqrt: {
      static constexpr std::array<std::string_view, 5> names = {"exp", "log", "sin", "cos", "sqrt"};
      out += names[static_cast<int>(e.op()) - static_cast<int>(Op::Exp)];
      out += '(';
      print(e.arg(), chart, 0, out);
      out += ')';
      break;
    }
  }
  if (paren) out += ')';
}

}  // namespace

std::string to_string(const Expr& e, const Chart& chart) {
  std::string out;
  print(e, chart, 0, out);
  return out;
}

// ---------------------------------------------------------------- derivative

Expr Differentiator::operator()(const Expr& e, std::size_t index) {
  switch (e.op()) {
    case Op::Constant:
      return Expr(0.0);
    case Op::Coord:
      return Expr(e.index() == index ? 1.0 : 0.0);
    default:
      break;
  }
  const Key key{e.node(), index};
  if (auto it = memo_.find(key); it != memo_.end()) return it->second.second;

  auto& d = *this;
  Expr r;
  switch (e.op()) {
    case Op::Neg:
      r = -d(e.arg(), index);
      break;
    case Op::Add:
      r = d(e.lhs(), index) + d(e.rhs(), index);
      break;
    case Op::Sub:
      r = d(e.lhs(), index) - d(e.rhs(), index);
      break;
    case Op::Mul:
      r = d(e.lhs(), index) * e.rhs() + e.lhs() * d(e.rhs(), index);
      break;
    case Op::Div: {
      const Expr da = d(e.lhs(), index);
      const Expr db = d(e.rhs(), index);
      r = db.is_zero() ? da / e.rhs() : (da * e.rhs() - e.lhs() * db) / pow(e.rhs(), 2);
      break;
    }
    case Op::IntPow:
      r = Expr(static_cast<double>(e.index())) * pow(e.arg(), e.index() - 1) * d(e.arg(), index);
      break;
    case Op::Exp:
      r = e * d(e.arg(), index);
      break;
    case Op::Log:
      r = d(e.arg(), index) / e.arg();
      break;
    case Op::Sin:
      r = cos(e.arg()) * d(e.arg(), index);
      break;
    case Op::Cos:
      r = -sin(e.arg()) * d(e.arg(), index);
      break;
    case Op::Sqrt:
      r = d(e.arg(), index) / (Expr(2.0) * e);
      break;
    default:
      break;
  }
  memo_.emplace(key, std::make_pair(e, r));
  return r;
}

Expr derive(const Expr& e, std::size_t index) {
  Differentiator d;
  return d(e, index);
}

bool depends_on(const Expr& e, std::size_t index) {
  std::unordered_map<const Node*, bool> seen;
  std::function<bool(const Expr&)> visit = [&](const Expr& x) -> bool {
    switch (x.op()) {
      case Op::Constant:
        return false;
      case Op::Coord:
        return x.index() == index;
      default:
        break;
    }
    if (auto it = seen.find(x.node()); it != seen.end()) return it->second;
    bool r = visit(x.lhs());
    if (!r && x.rhs().valid()) r = visit(x.rhs());
    seen.emplace(x.node(), r);
    return r;
  };
  return visit(e);
}

// ---------------------------------------------------------------- tape

namespace {

bool is_unary(Op op) {
  switch (op) {
    case Op::Neg:
    case Op::IntPow:
    case Op::Exp:
    case Op::Log:
    case Op::Sin:
    case Op::Cos:
    case Op::Sqrt:
      return true;
    default:
      return false;
  }
}

struct InstrKey {
  Op op;
  std::uint64_t value_bits;
  std::uint32_t index;
  std::uint32_t a;
  std::uint32_t b;
  bool operator==(const InstrKey&) const = default;
};

struct InstrKeyHash {
  std::size_t operator()(const InstrKey& k) const noexcept {
    std::size_t h = static_cast<std::size_t>(k.op);
    h = mix(h, k.value_bits);
    h = mix(h, k.index);
    h = mix(h, k.a);
    h = mix(h, k.b);
    return h;
  }
};

}  // namespace

Tape::Tape(std::span<const Expr> outputs) {
  std::unordered_map<const Node*, std::uint32_t> slot_of;
  std::unordered_map<InstrKey, std::uint32_t, InstrKeyHash> cse;

  auto emit = [&](Op op, double value, std::uint32_t index, std::uint32_t a, std::uint32_t b) {
    const InstrKey key{op, std::bit_cast<std::uint64_t>(value), index, a, b};
    if (auto it = cse.find(key); it != cse.end()) return it->second;
    const auto slot = static_cast<std::uint32_t>(instrs_.size());
    instrs_.push_back(Instr{op, index, a, b, value});
    cse.emplace(key, slot);
    return slot;
  };

  // Iterative post-order so deep sums do not exhaust the stack.
  std::vector<std::pair<const Expr*, bool>> stack;
  for (const Expr& out : outputs) {
    stack.emplace_back(&out, false);
    while (!stack.empty()) {
      auto [e, expanded] = stack.back();
      stack.pop_back();
      if (slot_of.count(e->node())) continue;
      const Op op = e->op();
      if (op == Op::Constant || op == Op::Coord) {
        slot_of.emplace(e->node(), emit(op, op == Op::Constant ? e->value() : 0.0,
                                         op == Op::Coord ? e->index() : 0, 0, 0));
        continue;
      }
      if (!expanded) {
        stack.emplace_back(e, true);
        stack.emplace_back(&e->lhs(), false);
        if (!is_unary(op)) stack.emplace_back(&e->rhs(), false);
        continue;
      }
      const std::uint32_t a = slot_of.at(e->lhs().node());
      const std::uint32_t b = is_unary(op) ? 0 : slot_of.at(e->rhs().node());
      slot_of.emplace(e->node(), emit(op, 0.0, op == Op::IntPow ? e->index() : 0, a, b));
    }
    outputs_.push_back(slot_of.at(out.node()));
  }
}

bool Tape::evaluate(std::span<const double> point, std::span<double> out,
                    std::vector<double>& scratch) const {
  scratch.resize(instrs_.size());
  double* v = scratch.data();
  for (std::size_t i = 0; i < instrs_.size(); ++i) {
    const Instr& in = instrs_[i];
    switch (in.op) {
      case Op::Constant:
        v[i] = in.value;
        break;
      case Op::Coord:
        v[i] = point[in.index];
        break;
      case Op::Neg:
        v[i] = -v[in.a];
        break;
      case Op::Add:
        v[i] = v[in.a] + v[in.b];
        break;
      case Op::Sub:
        v[i] = v[in.a] - v[in.b];
        break;
      case Op::Mul:
        v[i] = v[in.a] * v[in.b];
        break;
      case Op::Div:
        v[i] = v[in.a] / v[in.b];
        break;
      case Op::IntPow: {
        double r = 1.0;
        double base = v[in.a];
        for (std::uint32_t n = in.index; n; n >>= 1) {
          if (n & 1U) r *= base;
          base *= base;
        }
        v[i] = r;
        break;
      }
      case Op::Exp:
        v[i] = std::exp(v[in.a]);
        break;
      case Op::Log:
        v[i] = v[in.a] > 0.0 ? std::log(v[in.a]) : std::nan("");
        break;
      case Op::Sin:
        v[i] = std::sin(v[in.a]);
        break;
      case Op::Cos:
        v[i] = std::cos(v[in.a]);
        break;
      case Op::Sqrt:
        v[i] = v[in.a] >= 0.0 ? std::sqrt(v[in.a]) : std::nan("");
        break;
    }
  }
  bool finite = true;
  for (std::size_t k = 0; k < outputs_.size(); ++k) {
    out[k] = v[outputs_[k]];
    finite = finite && std::isfinite(out[k]);
  }
  return finite;
}

std::optional<double> evaluate(const Expr& e, std::span<const double> point) {
  const Tape tape(std::span<const Expr>(&e, 1));
  std::vector<double> scratch;
  double out = 0.0;
  if (!tape.evaluate(point, std::span<double>(&out, 1), scratch)) return std::nullopt;
  return out;
}

}  // namespace pqn
