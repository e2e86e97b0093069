#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "pqn/expr.hpp"

namespace pqn {

/// Raised when tensor degrees or dimensions do not fit an operation.
class DegreeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Strictly increasing coordinate multi-index (0-based).
using MultiIndex = std::vector<int>;

/// Sign of the permutation sorting `idx`, or 0 if an index repeats.
/// On return `idx` is sorted.
int sort_with_sign(MultiIndex& idx);

/// Vector field: one coefficient per coordinate basis vector.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(std::size_t dim) : comps_(dim) {}
  explicit VectorField(std::vector<Expr> comps) : comps_(std::move(comps)) {}

  static VectorField basis(std::size_t dim, std::size_t i);

  [[nodiscard]] std::size_t dim() const noexcept { return comps_.size(); }
  [[nodiscard]] const Expr& operator[](std::size_t i) const { return comps_.at(i); }
  Expr& operator[](std::size_t i) { return comps_.at(i); }
  [[nodiscard]] const std::vector<Expr>& components() const noexcept { return comps_; }

  friend VectorField operator+(const VectorField& a, const VectorField& b);
  friend VectorField operator-(const VectorField& a, const VectorField& b);
  friend VectorField operator*(const Expr& f, const VectorField& v);

 private:
  std::vector<Expr> comps_;
};

namespace detail {
struct LowerTag {};
struct UpperTag {};
}  // namespace detail

/// Alternating tensor stored sparsely on strictly increasing multi-indices.
/// Absent keys are zero. Tag distinguishes forms from multivectors.
template <class Tag>
class Alternating {
 public:
  Alternating() = default;
  Alternating(std::size_t dim, std::size_t degree) : dim_(dim), degree_(degree) {
    if (degree > dim) throw DegreeError("degree exceeds dimension");
  }

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t degree() const noexcept { return degree_; }
  [[nodiscard]] const std::map<MultiIndex, Expr>& components() const noexcept { return comps_; }

  /// Component on a strictly increasing index; zero if absent.
  [[nodiscard]] Expr get(const MultiIndex& idx) const {
    auto it = comps_.find(idx);
    return it == comps_.end() ? Expr(0.0) : it->second;
  }

  /// Component of the full antisymmetric extension on any index order.
  [[nodiscard]] Expr at(MultiIndex idx) const {
    const int s = sort_with_sign(idx);
    if (s == 0) return Expr(0.0);
    return s > 0 ? get(idx) : -get(idx);
  }

  /// Sets a strictly increasing component. A literal zero erases it.
  void set(const MultiIndex& idx, const Expr& value) {
    validate(idx);
    if (value.is_zero()) {
      comps_.erase(idx);
    } else {
      comps_[idx] = value;
    }
  }

  /// Adds `value` to the component on `idx` given in any order.
  void add(MultiIndex idx, const Expr& value) {
    if (value.is_zero()) return;
    const int s = sort_with_sign(idx);
    if (s == 0) return;
    validate(idx);
    set(idx, get(idx) + (s > 0 ? value : -value));
  }

  friend Alternating operator+(Alternating a, const Alternating& b) {
    a.require_same(b);
    for (const auto& [k, v] : b.comps_) a.add(k, v);
    return a;
  }
  friend Alternating operator-(Alternating a, const Alternating& b) {
    a.require_same(b);
    for (const auto& [k, v] : b.comps_) a.add(k, -v);
    return a;
  }
  friend Alternating operator-(const Alternating& a) { return Expr(-1.0) * a; }
  friend Alternating operator*(const Expr& f, const Alternating& a) {
    Alternating r(a.dim_, a.degree_);
    for (const auto& [k, v] : a.comps_) r.set(k, f * v);
    return r;
  }

 private:
  void validate(const MultiIndex& idx) const {
    if (idx.size() != degree_) throw DegreeError("multi-index length does not match degree");
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= dim_) {
        throw std::out_of_range("multi-index entry out of range");
      }
      if (i > 0 && idx[i] <= idx[i - 1]) throw std::invalid_argument("multi-index not strictly increasing");
    }
  }
  void require_same(const Alternating& b) const {
    if (dim_ != b.dim_ || degree_ != b.degree_) throw DegreeError("dimension or degree mismatch");
  }

  std::size_t dim_ = 0;
  std::size_t degree_ = 0;
  std::map<MultiIndex, Expr> comps_;
};

/// Differential form; components are coefficients of dx^I for increasing I.
using KForm = Alternating<detail::LowerTag>;
/// Multivector field; components are coefficients of d_I for increasing I.
using Multivector = Alternating<detail::UpperTag>;
/// Bivector field (a Multivector of degree 2).
using Bivector = Multivector;

KForm zero_form(std::size_t dim, const Expr& f);
KForm one_form(std::span<const Expr> comps);
KForm basis_one_form(std::size_t dim, std::size_t i);
Multivector as_multivector(const VectorField& x);

/// (1,1) tensor field; entry (i, j) is the coefficient of d_i in N(d_j).
class Endomorphism {
 public:
  Endomorphism() = default;
  explicit Endomorphism(std::size_t dim) : dim_(dim), m_(dim * dim) {}

  static Endomorphism identity(std::size_t dim);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] const Expr& operator()(std::size_t i, std::size_t j) const { return m_.at(i * dim_ + j); }
  Expr& operator()(std::size_t i, std::size_t j) { return m_.at(i * dim_ + j); }
  [[nodiscard]] VectorField column(std::size_t j) const;
  [[nodiscard]] VectorField apply(const VectorField& x) const;

  friend Endomorphism operator+(const Endomorphism& a, const Endomorphism& b);
  friend Endomorphism operator-(const Endomorphism& a, const Endomorphism& b);
  friend Endomorphism operator*(const Expr& f, const Endomorphism& a);

 private:
  std::size_t dim_ = 0;
  std::vector<Expr> m_;
};

/// Top-degree form rho dx^1 ^ ... ^ dx^n.
struct VolumeForm {
  std::size_t dim = 0;
  Expr coeff = Expr(1.0);

  [[nodiscard]] KForm as_form() const;
};

// ---- pairings and pointwise algebra

/// <alpha, X> for a 1-form alpha.
Expr pair(const KForm& alpha, const VectorField& x);
/// X(f) = sum X^i d_i f.
Expr directional(const VectorField& x, const Expr& f);

/// P#alpha with <beta, P#alpha> = P(alpha, beta).
VectorField sharp(const Bivector& p, const KForm& alpha);
/// omega-flat X with <omega-flat X, Y> = omega(X, Y).
KForm flat(const KForm& omega, const VectorField& x);
/// N* alpha with <N* alpha, s> = <alpha, N s>.
KForm dual_apply(const Endomorphism& n, const KForm& alpha);

Endomorphism compose(const Endomorphism& a, const Endomorphism& b);
Endomorphism power(const Endomorphism& n, unsigned k);
Expr trace(const Endomorphism& n);
/// Z (x) xi, sending X to <xi, X> Z.
Endomorphism tensor_product(const VectorField& z, const KForm& xi);

/// Determinant-convention wedge: (a^b)(X,Y) = a(X)b(Y) - a(Y)b(X).
KForm wedge(const KForm& a, const KForm& b);
Multivector wedge(const Multivector& a, const Multivector& b);

/// i_X omega: X inserted in the first slot.
KForm interior(const VectorField& x, const KForm& omega);
/// i_P omega with i_{X^Y} = i_Y o i_X, i.e. i_{X^Y} omega = omega(X, Y, .).
KForm interior_mv(const Multivector& p, const KForm& omega);
/// i_eta (X^Y) = <eta, X> Y - <eta, Y> X.
VectorField interior_form_on_bivectorfield(const KForm& eta, const VectorField& x, const VectorField& y);
/// omega(X_1, ..., X_k) as a scalar expression.
Expr evaluate_on(const KForm& omega, std::span<const VectorField> vectors);

/// star_k P = i_P V, the (dim-k)-form with <i_P V, Q> = <V, P^Q>.
KForm star(const Multivector& p, const VolumeForm& v);
/// (1/rho) sum d_i(rho X^i) for V = rho dx^1^...^dx^n.
Expr divergence(const VectorField& x, const VolumeForm& v);
/// i_N omega (X_1..X_k) = sum_j omega(X_1, .., N X_j, .., X_k); zero on functions.
KForm i_N(const Endomorphism& n, const KForm& omega);

/// Full antisymmetric matrix of a bivector (entry (i,j) = P(dx^i, dx^j)).
std::vector<Expr> bivector_matrix(const Bivector& p);

}  // namespace pqn
