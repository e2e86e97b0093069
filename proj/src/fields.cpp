#include "pqn/fields.hpp"

#include <algorithm>

namespace pqn {

int sort_with_sign(MultiIndex& idx) {
  int sign = 1;
  // Insertion sort; multi-indices are short.
  for (std::size_t i = 1; i < idx.size(); ++i) {
    for (std::size_t j = i; j > 0 && idx[j - 1] > idx[j]; --j) {
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  }
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (idx[i] == idx[i - 1]) return 0;
  }
  return sign;
}

// ---------------------------------------------------------------- VectorField

VectorField VectorField::basis(std::size_t dim, std::size_t i) {
  VectorField v(dim);
  v[i] = Expr(1.0);
  return v;
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  if (a.dim() != b.dim()) throw DegreeError("vector field dimension mismatch");
  VectorField r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] + b[i];
  return r;
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  if (a.dim() != b.dim()) throw DegreeError("vector field dimension mismatch");
  VectorField r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] - b[i];
  return r;
}

VectorField operator*(const Expr& f, const VectorField& v) {
  VectorField r(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) r[i] = f * v[i];
  return r;
}

// ---------------------------------------------------------------- forms

KForm zero_form(std::size_t dim, const Expr& f) {
  KForm r(dim, 0);
  r.set({}, f);
  return r;
}

KForm one_form(std::span<const Expr> comps) {
  KForm r(comps.size(), 1);
  for (std::size_t i = 0; i < comps.size(); ++i) r.set({static_cast<int>(i)}, comps[i]);
  return r;
}

KForm basis_one_form(std::size_t dim, std::size_t i) {
  KForm r(dim, 1);
  r.set({static_cast<int>(i)}, Expr(1.0));
  return r;
}

Multivector as_multivector(const VectorField& x) {
  Multivector r(x.dim(), 1);
  for (std::size_t i = 0; i < x.dim(); ++i) r.set({static_cast<int>(i)}, x[i]);
  return r;
}

KForm VolumeForm::as_form() const {
  KForm r(dim, dim);
  MultiIndex top(dim);
  for (std::size_t i = 0; i < dim; ++i) top[i] = static_cast<int>(i);
  r.set(top, coeff);
  return r;
}

// ---------------------------------------------------------------- Endomorphism

Endomorphism Endomorphism::identity(std::size_t dim) {
  Endomorphism r(dim);
  for (std::size_t i = 0; i < dim; ++i) r(i, i) = Expr(1.0);
  return r;
}

VectorField Endomorphism::column(std::size_t j) const {
  VectorField r(dim_);
  for (std::size_t i = 0; i < dim_; ++i) r[i] = (*this)(i, j);
  return r;
}

VectorField Endomorphism::apply(const VectorField& x) const {
  if (x.dim() != dim_) throw DegreeError("endomorphism dimension mismatch");
  VectorField r(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    Expr s;
    for (std::size_t j = 0; j < dim_; ++j) s += (*this)(i, j) * x[j];
    r[i] = s;
  }
  return r;
}

Endomorphism operator+(const Endomorphism& a, const Endomorphism& b) {
  if (a.dim() != b.dim()) throw DegreeError("endomorphism dimension mismatch");
  Endomorphism r(a.dim());
  for (std::size_t k = 0; k < a.m_.size(); ++k) r.m_[k] = a.m_[k] + b.m_[k];
  return r;
}

Endomorphism operator-(const Endomorphism& a, const Endomorphism& b) {
  if (a.dim() != b.dim()) throw DegreeError("endomorphism dimension mismatch");
  Endomorphism r(a.dim());
  for (std::size_t k = 0; k < a.m_.size(); ++k) r.m_[k] = a.m_[k] - b.m_[k];
  return r;
}

Endomorphism operator*(const Expr& f, const Endomorphism& a) {
  Endomorphism r(a.dim());
  for (std::size_t k = 0; k < a.m_.size(); ++k) r.m_[k] = f * a.m_[k];
  return r;
}

Endomorphism compose(const Endomorphism& a, const Endomorphism& b) {
  if (a.dim() != b.dim()) throw DegreeError("endomorphism dimension mismatch");
  const std::size_t n = a.dim();
  Endomorphism r(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Expr s;
      for (std::size_t m = 0; m < n; ++m) s += a(i, m) * b(m, j);
      r(i, j) = s;
    }
  }
  return r;
}

Endomorphism power(const Endomorphism& n, unsigned k) {
  Endomorphism r = Endomorphism::identity(n.dim());
  for (unsigned i = 0; i < k; ++i) r = i == 0 ? n : compose(r, n);
  return r;
}

Expr trace(const Endomorphism& n) {
  Expr s;
  for (std::size_t i = 0; i < n.dim(); ++i) s += n(i, i);
  return s;
}

Endomorphism tensor_product(const VectorField& z, const KForm& xi) {
  if (xi.degree() != 1 || xi.dim() != z.dim()) throw DegreeError("tensor_product needs a 1-form of matching dimension");
  Endomorphism r(z.dim());
  for (std::size_t i = 0; i < z.dim(); ++i) {
    for (std::size_t j = 0; j < z.dim(); ++j) r(i, j) = z[i] * xi.get({static_cast<int>(j)});
  }
  return r;
}

// ---------------------------------------------------------------- pairings

Expr pair(const KForm& alpha, const VectorField& x) {
  if (alpha.degree() != 1 || alpha.dim() != x.dim()) throw DegreeError("pairing needs a 1-form and a vector field");
  Expr s;
  for (const auto& [k, v] : alpha.components()) s += v * x[static_cast<std::size_t>(k[0])];
  return s;
}

Expr directional(const VectorField& x, const Expr& f) {
  Expr s;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    if (x[i].is_zero()) continue;
    s += x[i] * derive(f, i);
  }
  return s;
}

std::vector<Expr> bivector_matrix(const Bivector& p) {
  if (p.degree() != 2) throw DegreeError("expected a bivector");
  const std::size_t n = p.dim();
  std::vector<Expr> m(n * n);
  for (const auto& [k, v] : p.components()) {
    const auto i = static_cast<std::size_t>(k[0]);
    const auto j = static_cast<std::size_t>(k[1]);
    m[i * n + j] = v;
    m[j * n + i] = -v;
  }
  return m;
}

VectorField sharp(const Bivector& p, const KForm& alpha) {
  if (p.degree() != 2 || alpha.degree() != 1 || p.dim() != alpha.dim()) {
    throw DegreeError("sharp needs a bivector and a 1-form of the same dimension");
  }
  VectorField r(p.dim());
  for (const auto& [k, v] : p.components()) {
    const auto i = static_cast<std::size_t>(k[0]);
    const auto j = static_cast<std::size_t>(k[1]);
    // P^{ij} alpha_i d_j - P^{ij} alpha_j d_i
    const Expr ai = alpha.get({k[0]});
    const Expr aj = alpha.get({k[1]});
    r[j] += v * ai;
    r[i] -= v * aj;
  }
  return r;
}

KForm flat(const KForm& omega, const VectorField& x) {
  if (omega.degree() != 2 || omega.dim() != x.dim()) throw DegreeError("flat needs a 2-form");
  KForm r(omega.dim(), 1);
  for (const auto& [k, v] : omega.components()) {
    const auto i = static_cast<std::size_t>(k[0]);
    const auto j = static_cast<std::size_t>(k[1]);
    r.add({k[1]}, v * x[i]);
    r.add({k[0]}, -(v * x[j]));
  }
  return r;
}

KForm dual_apply(const Endomorphism& n, const KForm& alpha) {
  if (alpha.degree() != 1 || alpha.dim() != n.dim()) throw DegreeError("dual_apply needs a 1-form");
  KForm r(n.dim(), 1);
  for (std::size_t j = 0; j < n.dim(); ++j) {
    Expr s;
    for (const auto& [k, v] : alpha.components()) s += v * n(static_cast<std::size_t>(k[0]), j);
    r.set({static_cast<int>(j)}, s);
  }
  return r;
}

// ---------------------------------------------------------------- exterior algebra

namespace {

template <class T>
T wedge_impl(const T& a, const T& b) {
  if (a.dim() != b.dim()) throw DegreeError("wedge dimension mismatch");
  if (a.degree() + b.degree() > a.dim()) throw DegreeError("wedge degree exceeds dimension");
  T r(a.dim(), a.degree() + b.degree());
  for (const auto& [i, u] : a.components()) {
    for (const auto& [j, v] : b.components()) {
      MultiIndex k = i;
      k.insert(k.end(), j.begin(), j.end());
      r.add(std::move(k), u * v);
    }
  }
  return r;
}

}  // namespace

KForm wedge(const KForm& a, const KForm& b) { return wedge_impl(a, b); }
Multivector wedge(const Multivector& a, const Multivector& b) { return wedge_impl(a, b); }

KForm interior(const VectorField& x, const KForm& omega) {
  if (omega.degree() == 0) throw DegreeError("interior product of a function");
  if (omega.dim() != x.dim()) throw DegreeError("interior product dimension mismatch");
  KForm r(omega.dim(), omega.degree() - 1);
  for (const auto& [idx, c] : omega.components()) {
    for (std::size_t p = 0; p < idx.size(); ++p) {
      const Expr& xi = x[static_cast<std::size_t>(idx[p])];
      if (xi.is_zero()) continue;
      MultiIndex rest = idx;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(p));
      r.add(std::move(rest), (p % 2 == 0) ? xi * c : -(xi * c));
    }
  }
  return r;
}

KForm interior_mv(const Multivector& p, const KForm& omega) {
  if (p.dim() != omega.dim()) throw DegreeError("interior product dimension mismatch");
  if (p.degree() > omega.degree()) throw DegreeError("multivector degree exceeds form degree");
  KForm r(omega.dim(), omega.degree() - p.degree());
  for (const auto& [j, c] : omega.components()) {
    for (const auto& [i, pc] : p.components()) {
      if (!std::includes(j.begin(), j.end(), i.begin(), i.end())) continue;
      MultiIndex rest;
      std::set_difference(j.begin(), j.end(), i.begin(), i.end(), std::back_inserter(rest));
      MultiIndex seq = i;
      seq.insert(seq.end(), rest.begin(), rest.end());
      const int s = sort_with_sign(seq);
      r.add(std::move(rest), s > 0 ? pc * c : -(pc * c));
    }
  }
  return r;
}

VectorField interior_form_on_bivectorfield(const KForm& eta, const VectorField& x, const VectorField& y) {
  return pair(eta, x) * y - pair(eta, y) * x;
}

Expr evaluate_on(const KForm& omega, std::span<const VectorField> vectors) {
  if (vectors.size() != omega.degree()) throw DegreeError("evaluate_on needs exactly degree vectors");
  KForm cur = omega;
  for (const auto& v : vectors) cur = interior(v, cur);
  return cur.get({});
}

KForm star(const Multivector& p, const VolumeForm& v) {
  if (p.dim() != v.dim) throw DegreeError("star dimension mismatch");
  return interior_mv(p, v.as_form());
}

Expr divergence(const VectorField& x, const VolumeForm& v) {
  if (x.dim() != v.dim) throw DegreeError("divergence dimension mismatch");
  Differentiator d;
  Expr s;
  if (v.coeff.is_constant()) {
    for (std::size_t i = 0; i < x.dim(); ++i) s += d(x[i], i);
    return s;
  }
  for (std::size_t i = 0; i < x.dim(); ++i) s += d(v.coeff * x[i], i);
  return s / v.coeff;
}

KForm i_N(const Endomorphism& n, const KForm& omega) {
  if (n.dim() != omega.dim()) throw DegreeError("i_N dimension mismatch");
  KForm r(omega.dim(), omega.degree());
  for (const auto& [j, c] : omega.components()) {
    for (std::size_t p = 0; p < j.size(); ++p) {
      const auto m = static_cast<std::size_t>(j[p]);
      for (std::size_t l = 0; l < n.dim(); ++l) {
        const Expr& nml = n(m, l);
        if (nml.is_zero()) continue;
        MultiIndex slot = j;
        slot[p] = static_cast<int>(l);
        r.add(std::move(slot), nml * c);
      }
    }
  }
  return r;
}

}  // namespace pqn
