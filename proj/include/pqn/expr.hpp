#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pqn {

/// Ordered coordinate names of a chart. Names are identifiers, pairwise
/// distinct, and may not shadow the built-in function names.
class Chart {
 public:
  Chart() = default;
  explicit Chart(std::vector<std::string> names);

  [[nodiscard]] std::size_t dim() const noexcept { return names_.size(); }
  [[nodiscard]] const std::string& name(std::size_t i) const { return names_.at(i); }
  [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
  [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const;

  friend bool operator==(const Chart&, const Chart&) = default;

 private:
  std::vector<std::string> names_;
};

/// A point of a chart. Entries are expected to be finite.
struct Point {
  std::vector<double> coords;
};

enum class Op : std::uint8_t {
  Constant,
  Coord,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  IntPow,
  Exp,
  Log,
  Sin,
  Cos,
  Sqrt,
};

struct Node;

/// Immutable scalar expression over chart coordinates.
///
/// Construction through the arithmetic operators applies light folding
/// (constants, additive and multiplicative units, zero annihilation).
/// Two expressions are never compared structurally for mathematical
/// equality; that question is settled by sampled evaluation.
class Expr {
 public:
  Expr();
  Expr(double value);  // NOLINT(google-explicit-constructor)

  static Expr coord(std::size_t index);

  [[nodiscard]] Op op() const noexcept;
  /// Constant payload; meaningful only for Op::Constant.
  [[nodiscard]] double value() const noexcept;
  /// Coordinate index for Op::Coord, exponent for Op::IntPow.
  [[nodiscard]] std::uint32_t index() const noexcept;
  [[nodiscard]] const Expr& lhs() const noexcept;
  [[nodiscard]] const Expr& rhs() const noexcept;
  /// Operand of unary nodes (same as lhs()).
  [[nodiscard]] const Expr& arg() const noexcept { return lhs(); }
  [[nodiscard]] std::size_t hash() const noexcept;
  /// False only for the empty child slots of leaf and unary nodes.
  [[nodiscard]] bool valid() const noexcept { return node_ != nullptr; }
  [[nodiscard]] const Node* node() const noexcept { return node_.get(); }

  [[nodiscard]] bool is_constant() const noexcept { return op() == Op::Constant; }
  [[nodiscard]] bool is_zero() const noexcept;
  [[nodiscard]] bool is_one() const noexcept;

  friend Expr operator-(const Expr& a);
  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);

  Expr& operator+=(const Expr& b) { return *this = *this + b; }
  Expr& operator-=(const Expr& b) { return *this = *this - b; }
  Expr& operator*=(const Expr& b) { return *this = *this * b; }

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  friend Expr make_unary(Op op, std::uint32_t index, Expr a);
  friend Expr make_binary(Op op, Expr a, Expr b);

  std::shared_ptr<const Node> node_;
};

struct Node {
  Op op;
  double value;
  std::uint32_t index;
  Expr a;
  Expr b;
  std::size_t hash;
};

Expr pow(const Expr& base, std::uint32_t exponent);
Expr exp(const Expr& e);
Expr log(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr sqrt(const Expr& e);

/// Error raised by parse(); offset is the byte position in the input.
class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, UnknownIdentifier, MalformedNumber };
  ParseError(Kind kind, std::size_t offset, const std::string& message);
  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// Parses the expression grammar
///
///   expr   := term { ("+"|"-") term }
///   term   := factor { ("*"|"/") factor }
///   factor := [ "-" ] power
///   power  := atom [ "^" integer ]
///   atom   := number | ident | func "(" expr ")" | "(" expr ")"
///
/// with func one of exp, log, sin, cos, sqrt.
Expr parse(std::string_view text, const Chart& chart);

/// Prints an expression that parse() maps back to an equal-valued AST.
std::string to_string(const Expr& e, const Chart& chart);

/// Exact partial derivative with respect to coordinate `index`.
Expr derive(const Expr& e, std::size_t index);

/// Partial derivatives with a memo shared across calls, so repeated
/// derivation of shared subtrees (matrix powers, torsions) stays linear.
class Differentiator {
 public:
  Expr operator()(const Expr& e, std::size_t index);

 private:
  struct Key {
    const Node* node;
    std::size_t index;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return std::hash<const void*>{}(k.node) ^ (k.index * 0x9e3779b97f4a7c15ULL);
    }
  };
  // The source expression is retained so its node address stays unique.
  std::unordered_map<Key, std::pair<Expr, Expr>, KeyHash> memo_;
};

/// True when the expression tree mentions coordinate `index`.
bool depends_on(const Expr& e, std::size_t index);

/// Value at a point, or nullopt when the result is not finite.
std::optional<double> evaluate(const Expr& e, std::span<const double> point);

/// Straight-line program evaluating several expressions at once, with
/// common subexpressions (structurally equal subtrees) computed once.
class Tape {
 public:
  Tape() = default;
  explicit Tape(std::span<const Expr> outputs);

  [[nodiscard]] std::size_t outputs() const noexcept { return outputs_.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return instrs_.size(); }

  /// Writes one value per output; returns false if any output is not finite.
  bool evaluate(std::span<const double> point, std::span<double> out,
                std::vector<double>& scratch) const;

 private:
  struct Instr {
    Op op;
    std::uint32_t index;
    std::uint32_t a;
    std::uint32_t b;
    double value;
  };
  std::vector<Instr> instrs_;
  std::vector<std::uint32_t> outputs_;
};

}  // namespace pqn
