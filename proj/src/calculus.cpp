#include "pqn/calculus.hpp"

#include <algorithm>

namespace pqn {

KForm d(const KForm& omega) {
  Differentiator diff;
  return d(omega, diff);
}

KForm d(const KForm& omega, Differentiator& diff) {
  if (omega.degree() >= omega.dim()) throw DegreeError("exterior derivative of a top-degree form");
  KForm r(omega.dim(), omega.degree() + 1);
  for (const auto& [idx, c] : omega.components()) {
    for (std::size_t l = 0; l < omega.dim(); ++l) {
      if (std::find(idx.begin(), idx.end(), static_cast<int>(l)) != idx.end()) continue;
      Expr dc = diff(c, l);
      if (dc.is_zero()) continue;
      MultiIndex k;
      k.reserve(idx.size() + 1);
      k.push_back(static_cast<int>(l));
      k.insert(k.end(), idx.begin(), idx.end());
      r.add(std::move(k), dc);
    }
  }
  return r;
}

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
  if (x.dim() != y.dim()) throw DegreeError("lie bracket dimension mismatch");
  Differentiator diff;
  const std::size_t n = x.dim();
  VectorField r(n);
  for (std::size_t i = 0; i < n; ++i) {
    Expr s;
    for (std::size_t j = 0; j < n; ++j) {
      if (!x[j].is_zero()) s += x[j] * diff(y[i], j);
      if (!y[j].is_zero()) s -= y[j] * diff(x[i], j);
    }
    r[i] = s;
  }
  return r;
}

KForm lie_derivative(const VectorField& x, const KForm& omega) {
  if (omega.degree() == 0) return zero_form(omega.dim(), directional(x, omega.get({})));
  if (omega.degree() == omega.dim()) return d(interior(x, omega));
  return interior(x, d(omega)) + d(interior(x, omega));
}

KForm d_N(const Endomorphism& n, const KForm& omega) {
  if (omega.degree() >= omega.dim()) throw DegreeError("d_N of a top-degree form");
  KForm dw = d(omega);
  if (omega.degree() == 0) return i_N(n, dw);
  return i_N(n, dw) - d(i_N(n, omega));
}

KForm bracket_P(const Bivector& p, const KForm& alpha, const KForm& beta) {
  const VectorField pa = sharp(p, alpha);
  const VectorField pb = sharp(p, beta);
  return lie_derivative(pa, beta) - lie_derivative(pb, alpha) - d(zero_form(p.dim(), pair(beta, pa)));
}

// ---------------------------------------------------------------- torsions

VectorField TorsionEvaluator::on_basis(std::size_t j, std::size_t k) const {
  VectorField r(dim_);
  for (std::size_t i = 0; i < dim_; ++i) r[i] = component(i, j, k);
  return r;
}

VectorField TorsionEvaluator::apply(const VectorField& x, const VectorField& y) const {
  if (x.dim() != dim_ || y.dim() != dim_) throw DegreeError("torsion argument dimension mismatch");
  VectorField r(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    Expr s;
    for (std::size_t j = 0; j < dim_; ++j) {
      if (x[j].is_zero()) continue;
      for (std::size_t k = 0; k < dim_; ++k) {
        if (y[k].is_zero()) continue;
        const Expr& c = component(i, j, k);
        if (c.is_zero()) continue;
        s += x[j] * y[k] * c;
      }
    }
    r[i] = s;
  }
  return r;
}

TorsionEvaluator nijenhuis(const Endomorphism& n) {
  const std::size_t dim = n.dim();
  Differentiator diff;
  // dn[(m*dim + j)*dim + l] = d_l N^m_j
  std::vector<Expr> dn(dim * dim * dim);
  for (std::size_t m = 0; m < dim; ++m) {
    for (std::size_t j = 0; j < dim; ++j) {
      for (std::size_t l = 0; l < dim; ++l) dn[(m * dim + j) * dim + l] = diff(n(m, j), l);
    }
  }
  auto dN = [&](std::size_t m, std::size_t j, std::size_t l) -> const Expr& { return dn[(m * dim + j) * dim + l]; };

  std::vector<Expr> comps(dim * dim * dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      for (std::size_t k = j + 1; k < dim; ++k) {
        Expr s;
        for (std::size_t m = 0; m < dim; ++m) {
          if (!n(m, j).is_zero()) s += n(m, j) * dN(i, k, m);
          if (!n(m, k).is_zero()) s -= n(m, k) * dN(i, j, m);
          if (!n(i, m).is_zero()) s -= n(i, m) * (dN(m, k, j) - dN(m, j, k));
        }
        comps[(i * dim + j) * dim + k] = s;
        comps[(i * dim + k) * dim + j] = -s;
      }
    }
  }
  return {TorsionEvaluator::Kind::Nijenhuis, dim, std::move(comps)};
}

TorsionEvaluator haantjes(const Endomorphism& n) { return haantjes(n, nijenhuis(n)); }

TorsionEvaluator haantjes(const Endomorphism& n, const TorsionEvaluator& t) {
  const std::size_t dim = n.dim();
  auto T = [&](std::size_t i, std::size_t j, std::size_t k) -> const Expr& { return t.component(i, j, k); };

  // u[(m*dim + j)*dim + k] = sum_a N^a_j T^m_{ak}, i.e. T(N d_j, d_k)^m
  std::vector<Expr> u(dim * dim * dim);
  for (std::size_t m = 0; m < dim; ++m) {
    for (std::size_t j = 0; j < dim; ++j) {
      for (std::size_t k = 0; k < dim; ++k) {
        Expr s;
        for (std::size_t a = 0; a < dim; ++a) {
          if (n(a, j).is_zero() || T(m, a, k).is_zero()) continue;
          s += n(a, j) * T(m, a, k);
        }
        u[(m * dim + j) * dim + k] = s;
      }
    }
  }
  auto U = [&](std::size_t m, std::size_t j, std::size_t k) -> const Expr& { return u[(m * dim + j) * dim + k]; };

  std::vector<Expr> comps(dim * dim * dim);
  for (std::size_t j = 0; j < dim; ++j) {
    for (std::size_t k = j + 1; k < dim; ++k) {
      // inner^m = T(N d_j, d_k) + T(d_j, N d_k) - N T(d_j, d_k)
      std::vector<Expr> inner(dim);
      for (std::size_t m = 0; m < dim; ++m) {
        Expr s = U(m, j, k) - U(m, k, j);
        for (std::size_t c = 0; c < dim; ++c) {
          if (n(m, c).is_zero() || T(c, j, k).is_zero()) continue;
          s -= n(m, c) * T(c, j, k);
        }
        inner[m] = s;
      }
      for (std::size_t i = 0; i < dim; ++i) {
        // T(N d_j, N d_k)^i = sum_b N^b_k T(N d_j, d_b)^i
        Expr s;
        for (std::size_t b = 0; b < dim; ++b) {
          if (n(b, k).is_zero() || U(i, j, b).is_zero()) continue;
          s += n(b, k) * U(i, j, b);
        }
        for (std::size_t m = 0; m < dim; ++m) {
          if (n(i, m).is_zero() || inner[m].is_zero()) continue;
          s -= n(i, m) * inner[m];
        }
        comps[(i * dim + j) * dim + k] = s;
        comps[(i * dim + k) * dim + j] = -s;
      }
    }
  }
  return {TorsionEvaluator::Kind::Haantjes, dim, std::move(comps)};
}

VectorField nijenhuis_torsion(const Endomorphism& n, const VectorField& x, const VectorField& y) {
  const VectorField nx = n.apply(x);
  const VectorField ny = n.apply(y);
  return lie_bracket(nx, ny) - n.apply(lie_bracket(nx, y) + lie_bracket(x, ny) - n.apply(lie_bracket(x, y)));
}

VectorField haantjes_torsion(const Endomorphism& n, const VectorField& x, const VectorField& y) {
  const VectorField nx = n.apply(x);
  const VectorField ny = n.apply(y);
  return nijenhuis_torsion(n, nx, ny) -
         n.apply(nijenhuis_torsion(n, nx, y) + nijenhuis_torsion(n, x, ny) - n.apply(nijenhuis_torsion(n, x, y)));
}

// ---------------------------------------------------------------- compatibility

namespace {

// K = N pi~ ; (K)_{ij} = sum_m N^i_m pi^{mj}
std::vector<Expr> n_times_pi(const Bivector& pi, const Endomorphism& n) {
  const std::size_t dim = n.dim();
  const std::vector<Expr> p = bivector_matrix(pi);
  std::vector<Expr> k(dim * dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      Expr s;
      for (std::size_t m = 0; m < dim; ++m) {
        if (n(i, m).is_zero() || p[m * dim + j].is_zero()) continue;
        s += n(i, m) * p[m * dim + j];
      }
      k[i * dim + j] = s;
    }
  }
  return k;
}

}  // namespace

std::vector<Expr> c1_residual(const Bivector& pi, const Endomorphism& n) {
  if (pi.dim() != n.dim()) throw DegreeError("bivector and endomorphism dimensions differ");
  const std::size_t dim = n.dim();
  const std::vector<Expr> k = n_times_pi(pi, n);
  // N o pi# has matrix -K, pi# o N* has matrix K^T.
  std::vector<Expr> r(dim * dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) r[i * dim + j] = -(k[i * dim + j] + k[j * dim + i]);
  }
  return r;
}

Bivector pi_N(const Bivector& pi, const Endomorphism& n) {
  if (pi.dim() != n.dim()) throw DegreeError("bivector and endomorphism dimensions differ");
  const std::size_t dim = n.dim();
  const std::vector<Expr> k = n_times_pi(pi, n);
  Bivector r(dim, 2);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i + 1; j < dim; ++j) r.set({static_cast<int>(i), static_cast<int>(j)}, -k[j * dim + i]);
  }
  return r;
}

KForm concomitant(const Bivector& pi, const Endomorphism& n, const KForm& alpha, const KForm& beta) {
  const Bivector pn = pi_N(pi, n);
  const KForm na = dual_apply(n, alpha);
  const KForm nb = dual_apply(n, beta);
  return bracket_P(pn, alpha, beta) - bracket_P(pi, na, beta) - bracket_P(pi, alpha, nb) +
         dual_apply(n, bracket_P(pi, alpha, beta));
}

Expr poisson_bracket(const Bivector& pi, const Expr& f, const Expr& g) {
  Differentiator diff;
  Expr s;
  for (const auto& [idx, c] : pi.components()) {
    const auto i = static_cast<std::size_t>(idx[0]);
    const auto j = static_cast<std::size_t>(idx[1]);
    s += c * (diff(f, i) * diff(g, j) - diff(f, j) * diff(g, i));
  }
  return s;
}

Expr jacobiator(const Bivector& pi, const Expr& f, const Expr& g, const Expr& h) {
  return poisson_bracket(pi, f, poisson_bracket(pi, g, h)) + poisson_bracket(pi, g, poisson_bracket(pi, h, f)) +
         poisson_bracket(pi, h, poisson_bracket(pi, f, g));
}

// ---------------------------------------------------------------- invariants

EndomorphismPowers::EndomorphismPowers(Endomorphism n) {
  powers_.push_back(Endomorphism::identity(n.dim()));
  powers_.push_back(std::move(n));
}

const Endomorphism& EndomorphismPowers::operator()(unsigned k) {
  while (powers_.size() <= k) powers_.push_back(compose(powers_.back(), powers_[1]));
  return powers_[k];
}

Expr invariant(const Endomorphism& n, unsigned k) {
  EndomorphismPowers powers(n);
  return invariant(powers, k);
}

Expr invariant(EndomorphismPowers& powers, unsigned k) {
  if (k == 0) throw std::invalid_argument("invariant index must be at least 1");
  return trace(powers(k)) / Expr(2.0 * k);
}

KForm phi_s(const Endomorphism& n, unsigned s) {
  EndomorphismPowers powers(n);
  return phi_s(powers, nijenhuis(n), s);
}

KForm phi_s(EndomorphismPowers& powers, const TorsionEvaluator& t, unsigned s) {
  const Endomorphism& ns = powers(s);
  const std::size_t dim = ns.dim();
  KForm r(dim, 1);
  for (std::size_t j = 0; j < dim; ++j) {
    Expr sum;
    for (std::size_t a = 0; a < dim; ++a) {
      for (std::size_t c = 0; c < dim; ++c) {
        if (ns(a, c).is_zero() || t.component(c, j, a).is_zero()) continue;
        sum += ns(a, c) * t.component(c, j, a);
      }
    }
    r.set({static_cast<int>(j)}, Expr(0.5) * sum);
  }
  return r;
}

}  // namespace pqn
