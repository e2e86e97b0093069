#pragma once

#include <cstddef>
#include <vector>

#include "pqn/expr.hpp"
#include "pqn/fields.hpp"

namespace pqn {

/// Exterior derivative. Throws DegreeError on a top-degree form.
KForm d(const KForm& omega);
KForm d(const KForm& omega, Differentiator& diff);

/// [X, Y]^i = sum_j (X^j d_j Y^i - Y^j d_j X^i).
VectorField lie_bracket(const VectorField& x, const VectorField& y);

/// L_X omega = i_X d omega + d i_X omega.
KForm lie_derivative(const VectorField& x, const KForm& omega);

/// d_N = i_N o d - d o i_N. Throws DegreeError on a top-degree form,
/// whose image would have degree dim + 1.
KForm d_N(const Endomorphism& n, const KForm& omega);

/// [alpha, beta]_P = L_{P#alpha} beta - L_{P#beta} alpha - d<beta, P#alpha>.
KForm bracket_P(const Bivector& p, const KForm& alpha, const KForm& beta);

/// Vector-valued 2-form given by its (1,2) components A^i_{jk}, evaluated
/// on coordinate fields once; apply() extends bilinearly over functions.
class TorsionEvaluator {
 public:
  enum class Kind { Nijenhuis, Haantjes };

  TorsionEvaluator() = default;
  TorsionEvaluator(Kind kind, std::size_t dim, std::vector<Expr> comps)
      : kind_(kind), dim_(dim), comps_(std::move(comps)) {}

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  /// A^i_{jk}, the d_i component of A(d_j, d_k).
  [[nodiscard]] const Expr& component(std::size_t i, std::size_t j, std::size_t k) const {
    return comps_.at((i * dim_ + j) * dim_ + k);
  }
  [[nodiscard]] const std::vector<Expr>& components() const noexcept { return comps_; }
  /// A(d_j, d_k) as a vector field.
  [[nodiscard]] VectorField on_basis(std::size_t j, std::size_t k) const;
  [[nodiscard]] VectorField apply(const VectorField& x, const VectorField& y) const;

 private:
  Kind kind_ = Kind::Nijenhuis;
  std::size_t dim_ = 0;
  std::vector<Expr> comps_;
};

TorsionEvaluator nijenhuis(const Endomorphism& n);
TorsionEvaluator haantjes(const Endomorphism& n);
/// Haantjes torsion from an already computed Nijenhuis torsion of n.
TorsionEvaluator haantjes(const Endomorphism& n, const TorsionEvaluator& t);

/// T_N(X,Y) = [NX,NY] - N([NX,Y] + [X,NY] - N[X,Y]) computed from brackets
/// of the given fields.
VectorField nijenhuis_torsion(const Endomorphism& n, const VectorField& x, const VectorField& y);
/// H_N(X,Y) = T_N(NX,NY) - N(T_N(NX,Y) + T_N(X,NY) - N T_N(X,Y)) from brackets.
VectorField haantjes_torsion(const Endomorphism& n, const VectorField& x, const VectorField& y);

/// Entries of N o pi# - pi# o N* as a dim x dim row-major matrix acting on
/// 1-form components; zero exactly when N o pi# is skew.
std::vector<Expr> c1_residual(const Bivector& pi, const Endomorphism& n);
/// The bivector whose sharp is N o pi#: pi_N^{ij} = sum_m pi^{im} N^j_m.
/// Meaningful only when c1_residual vanishes.
Bivector pi_N(const Bivector& pi, const Endomorphism& n);

/// C(pi,N)(alpha,beta) = [a,b]_{pi_N} - [N*a,b]_pi - [a,N*b]_pi + N*[a,b]_pi.
/// Callers are expected to have checked compatibility (C1) first.
KForm concomitant(const Bivector& pi, const Endomorphism& n, const KForm& alpha, const KForm& beta);

/// {f, g} = pi(df, dg).
Expr poisson_bracket(const Bivector& pi, const Expr& f, const Expr& g);
/// {f,{g,h}} + {g,{h,f}} + {h,{f,g}}.
Expr jacobiator(const Bivector& pi, const Expr& f, const Expr& g, const Expr& h);

/// Cache of N^0, N^1, ... built on demand.
class EndomorphismPowers {
 public:
  explicit EndomorphismPowers(Endomorphism n);
  const Endomorphism& operator()(unsigned k);
  [[nodiscard]] const Endomorphism& base() const noexcept { return powers_.at(1); }

 private:
  std::vector<Endomorphism> powers_;
};

/// I_k = Tr(N^k) / (2k), k >= 1.
Expr invariant(const Endomorphism& n, unsigned k);
Expr invariant(EndomorphismPowers& powers, unsigned k);

/// phi_s with <phi_s, X> = (1/2) Tr(N^s o i_X T_N).
KForm phi_s(const Endomorphism& n, unsigned s);
KForm phi_s(EndomorphismPowers& powers, const TorsionEvaluator& t, unsigned s);

}  // namespace pqn
