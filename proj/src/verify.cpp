#include "pqn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace pqn {

// ---------------------------------------------------------------- sampling

std::uint64_t SplitMix64::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SamplePlan::SamplePlan(std::vector<Interval> box, std::size_t count, std::uint64_t seed,
                       std::optional<std::size_t> resample_limit)
    : box_(std::move(box)), count_(count), seed_(seed), resample_limit_(resample_limit.value_or(count)) {
  if (box_.empty()) throw std::invalid_argument("sample box has no coordinates");
  if (count_ == 0) throw std::invalid_argument("sample count must be at least 1");
  for (const auto& iv : box_) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo < iv.hi)) {
      throw std::invalid_argument("sample box interval must satisfy lo < hi");
    }
  }
}

SamplePlan SamplePlan::uniform(std::size_t dim, Interval iv, std::size_t count, std::uint64_t seed) {
  return SamplePlan(std::vector<Interval>(dim, iv), count, seed);
}

std::vector<Point> SamplePlan::points() const {
  PointStream s(*this);
  std::vector<Point> pts;
  pts.reserve(count_);
  for (std::size_t j = 0; j < count_; ++j) pts.push_back(s.next());
  return pts;
}

Point PointStream::next() {
  Point p;
  p.coords.resize(plan_->dim());
  for (std::size_t i = 0; i < plan_->dim(); ++i) {
    const double u = static_cast<double>(rng_.next()) * 0x1p-64;
    const Interval& iv = plan_->box()[i];
    p.coords[i] = iv.lo + (iv.hi - iv.lo) * u;
  }
  return p;
}

// ---------------------------------------------------------------- fields

Field::Field(const Expr& e) : kind(Kind::Scalar) { comps[{}] = e; }

Field::Field(const VectorField& v) : kind(Kind::Vector) {
  for (std::size_t i = 0; i < v.dim(); ++i) comps[{static_cast<int>(i)}] = v[i];
}

Field::Field(const KForm& f) : kind(Kind::Form), degree(f.degree()) {
  for (const auto& [k, e] : f.components()) comps[k] = e;
}

Field::Field(const Multivector& m) : kind(Kind::Multivector), degree(m.degree()) {
  for (const auto& [k, e] : m.components()) comps[k] = e;
}

Field::Field(const Endomorphism& n) : kind(Kind::Endomorphism) {
  for (std::size_t i = 0; i < n.dim(); ++i) {
    for (std::size_t j = 0; j < n.dim(); ++j) comps[{static_cast<int>(i), static_cast<int>(j)}] = n(i, j);
  }
}

Field Field::list(const std::vector<Expr>& items) {
  Field f;
  f.kind = Kind::List;
  f.comps.clear();
  for (std::size_t i = 0; i < items.size(); ++i) f.comps[{static_cast<int>(i)}] = items[i];
  return f;
}

Field Field::stack(const std::vector<Field>& parts) {
  Field f;
  f.kind = Kind::List;
  f.comps.clear();
  for (std::size_t p = 0; p < parts.size(); ++p) {
    if (parts[p].kind != parts.front().kind || parts[p].degree != parts.front().degree) {
      throw std::invalid_argument("stacked fields differ in kind");
    }
    for (const auto& [k, e] : parts[p].comps) {
      std::vector<int> key{static_cast<int>(p)};
      key.insert(key.end(), k.begin(), k.end());
      f.comps[key] = e;
    }
  }
  return f;
}

Field Field::zero_like() const {
  Field f;
  f.kind = kind;
  f.degree = degree;
  f.comps.clear();
  return f;
}

// ---------------------------------------------------------------- checks

const char* to_string(CheckReport::Status s) {
  switch (s) {
    case CheckReport::Status::Pass:
      return "pass";
    case CheckReport::Status::Fail:
      return "fail";
    case CheckReport::Status::Skipped:
      return "skipped";
  }
  return "skipped";
}

CheckReport skipped(const std::string& name, double tol, const std::string& detail) {
  CheckReport r;
  r.name = name;
  r.status = CheckReport::Status::Skipped;
  r.tol = tol;
  r.detail = detail;
  return r;
}

CheckReport trivially_passed(const std::string& name, double tol, const std::string& detail) {
  CheckReport r;
  r.name = name;
  r.status = CheckReport::Status::Pass;
  r.tol = tol;
  r.detail = detail;
  return r;
}

CheckReport check_identity(const std::string& name, const Field& lhs, const Field& rhs, const SamplePlan& plan,
                           double tol) {
  if (lhs.kind != rhs.kind || lhs.degree != rhs.degree) {
    throw std::invalid_argument("check '" + name + "': fields differ in kind or degree");
  }
  std::vector<Expr> outs;
  for (const auto& [k, e] : lhs.comps) {
    outs.push_back(e);
    auto it = rhs.comps.find(k);
    outs.push_back(it == rhs.comps.end() ? Expr(0.0) : it->second);
  }
  for (const auto& [k, e] : rhs.comps) {
    if (lhs.comps.count(k)) continue;
    outs.emplace_back(0.0);
    outs.push_back(e);
  }

  CheckReport r;
  r.name = name;
  r.tol = tol;
  const std::size_t pairs = outs.size() / 2;
  if (pairs == 0) {
    r.status = CheckReport::Status::Pass;
    r.samples_used = plan.count();
    r.worst_point = plan.points().front();
    return r;
  }

  Tape tape(outs);
  std::vector<double> vals(outs.size());
  std::vector<double> scratch;
  PointStream stream(plan);
  std::size_t rejected = 0;
  double worst = -1.0;
  while (r.samples_used < plan.count()) {
    Point p = stream.next();
    if (!tape.evaluate(p.coords, vals, scratch)) {
      if (++rejected > plan.resample_limit()) {
        r.status = CheckReport::Status::Skipped;
        r.detail = "resample limit exhausted: non-finite values at " + std::to_string(rejected) + " points";
        if (worst < 0) r.max_scaled_residual = 0.0;
        return r;
      }
      continue;
    }
    double res = 0.0;
    double scale = 1.0;
    for (std::size_t c = 0; c < pairs; ++c) {
      const double a = vals[2 * c];
      const double b = vals[2 * c + 1];
      res = std::max(res, std::fabs(a - b));
      scale = std::max(scale, std::max(std::fabs(a), std::fabs(b)));
    }
    const double scaled = res / scale;
    if (scaled > worst) {
      worst = scaled;
      r.worst_point = p;
    }
    ++r.samples_used;
  }
  r.max_scaled_residual = worst;
  r.status = worst <= tol ? CheckReport::Status::Pass : CheckReport::Status::Fail;
  if (rejected > 0) r.detail = std::to_string(rejected) + " points resampled";
  return r;
}

CheckReport check_zero(const std::string& name, const Field& f, const SamplePlan& plan, double tol) {
  return check_identity(name, f, f.zero_like(), plan, tol);
}

// ---------------------------------------------------------------- helpers

namespace {

std::vector<std::pair<std::size_t, std::size_t>> coordinate_pairs(std::size_t dim) {
  std::vector<std::pair<std::size_t, std::size_t>> r;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i + 1; j < dim; ++j) r.emplace_back(i, j);
  }
  return r;
}

// pi(alpha, beta)
Expr bivector_pairing(const Bivector& pi, const KForm& a, const KForm& b) {
  Expr s;
  for (const auto& [k, v] : pi.components()) {
    const Expr ai = a.get({k[0]}), aj = a.get({k[1]}), bi = b.get({k[0]}), bj = b.get({k[1]});
    s += v * (ai * bj - aj * bi);
  }
  return s;
}

KForm exterior_d_of(const Expr& f, std::size_t dim, Differentiator& diff) {
  KForm r(dim, 1);
  for (std::size_t i = 0; i < dim; ++i) r.set({static_cast<int>(i)}, diff(f, i));
  return r;
}

// i_{d_i ^ d_j} omega = omega(d_i, d_j, ...)
KForm insert_pair(const KForm& omega, std::size_t i, std::size_t j) {
  const std::size_t n = omega.dim();
  return interior(VectorField::basis(n, j), interior(VectorField::basis(n, i), omega));
}

bool is_top(const KForm& f) { return f.degree() == f.dim(); }

CheckReport c1_check(const std::string& name, const Bivector& pi, const Endomorphism& n, const SamplePlan& plan,
                     double tol) {
  return check_zero(name, Field::list(c1_residual(pi, n)), plan, tol);
}

CheckReport c2_check(const std::string& name, const Bivector& pi, const Endomorphism& n, const CheckReport& c1,
                     const SamplePlan& plan, double tol) {
  if (!c1.passed()) return skipped(name, tol, "C1 failed");
  const std::size_t dim = n.dim();
  std::vector<Field> parts;
  for (auto [i, j] : coordinate_pairs(dim)) {
    parts.emplace_back(concomitant(pi, n, basis_one_form(dim, i), basis_one_form(dim, j)));
  }
  if (parts.empty()) return trivially_passed(name, tol, "no coordinate pairs");
  return check_zero(name, Field::stack(parts), plan, tol);
}

std::vector<Field> torsion_pairs(const TorsionEvaluator& t) {
  std::vector<Field> parts;
  for (auto [i, j] : coordinate_pairs(t.dim())) parts.emplace_back(t.on_basis(i, j));
  return parts;
}

Field torsion_field(const TorsionEvaluator& t) {
  auto parts = torsion_pairs(t);
  return parts.empty() ? Field::list({}) : Field::stack(parts);
}

bool is_canonical_xy(const Bivector& pi) {
  if (pi.dim() != 3 || pi.components().size() != 1) return false;
  auto it = pi.components().find({0, 1});
  return it != pi.components().end() && it->second.is_constant() && it->second.value() == 1.0;
}

}  // namespace

// ---------------------------------------------------------------- Poisson

Reports verify_poisson(const Bivector& pi, const std::optional<VolumeForm>& v, const SamplePlan& plan, double tol) {
  Reports out;
  const std::size_t dim = pi.dim();
  std::vector<Expr> jac;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i + 1; j < dim; ++j) {
      for (std::size_t k = j + 1; k < dim; ++k) {
        jac.push_back(jacobiator(pi, Expr::coord(i), Expr::coord(j), Expr::coord(k)));
      }
    }
  }
  out.push_back(check_zero("poisson.jacobiator", Field::list(jac), plan, tol));
  if (dim == 3 && v) {
    const KForm xi = star(pi, *v);
    out.push_back(check_zero("poisson.xi_wedge_dxi", wedge(xi, d(xi)), plan, tol));
    out.push_back(check_zero("poisson.sharp_xi", sharp(pi, xi), plan, tol));
  }
  return out;
}

// ---------------------------------------------------------------- PN / PqN

Reports verify_pn(const Bivector& pi, const Endomorphism& n, const SamplePlan& plan, double tol,
                  const std::string& prefix) {
  Reports out;
  out.push_back(c1_check(prefix + ".C1", pi, n, plan, tol));
  out.push_back(c2_check(prefix + ".C2", pi, n, out.back(), plan, tol));
  out.push_back(check_zero(prefix + ".torsion", torsion_field(nijenhuis(n)), plan, tol));
  return out;
}

Reports verify_pqn(const Bivector& pi, const Endomorphism& n, const KForm& phi, const SamplePlan& plan, double tol,
                   const std::string& prefix) {
  if (phi.degree() != 3) throw DegreeError("phi must be a 3-form");
  Reports out;
  out.push_back(c1_check(prefix + ".C1", pi, n, plan, tol));
  out.push_back(c2_check(prefix + ".C2", pi, n, out.back(), plan, tol));
  if (is_top(phi)) {
    out.push_back(trivially_passed(prefix + ".d_phi", tol, "top-degree form"));
    out.push_back(trivially_passed(prefix + ".dN_phi", tol, "top-degree form"));
  } else {
    out.push_back(check_zero(prefix + ".d_phi", d(phi), plan, tol));
    out.push_back(check_zero(prefix + ".dN_phi", d_N(n, phi), plan, tol));
  }
  const TorsionEvaluator t = nijenhuis(n);
  std::vector<Field> lhs, rhs;
  for (auto [i, j] : coordinate_pairs(n.dim())) {
    lhs.emplace_back(t.on_basis(i, j));
    rhs.emplace_back(sharp(pi, insert_pair(phi, i, j)));
  }
  out.push_back(check_identity(prefix + ".torsion", Field::stack(lhs), Field::stack(rhs), plan, tol));
  return out;
}

// ---------------------------------------------------------------- 3D

Decomposition recover_decomposition(const Endomorphism& n, const KForm& xi) {
  const std::size_t dim = n.dim();
  if (dim != 3 || xi.degree() != 1) throw DegreeError("decomposition needs dim 3 and a 1-form");
  // pi~ is recovered from xi up to the volume density: pi ~ (xi_3, -xi_2, xi_1) on (12, 13, 23).
  // lambda = <pi~, pi~ N^T> / <pi~, pi~> over i<j.
  const Expr p12 = xi.get({2}), p13 = -xi.get({1}), p23 = xi.get({0});
  const Expr p[3][3] = {{Expr(0.0), p12, p13}, {-p12, Expr(0.0), p23}, {-p13, -p23, Expr(0.0)}};
  Expr num, den;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      Expr m;
      for (std::size_t k = 0; k < 3; ++k) {
        if (p[i][k].is_zero() || n(j, k).is_zero()) continue;
        m += p[i][k] * n(j, k);
      }
      num += p[i][j] * m;
      den += p[i][j] * p[i][j];
    }
  }
  Decomposition r;
  r.lambda = num / den;
  Expr xx;
  for (std::size_t j = 0; j < 3; ++j) xx += xi.get({static_cast<int>(j)}) * xi.get({static_cast<int>(j)});
  r.Z = VectorField(3);
  for (std::size_t i = 0; i < 3; ++i) {
    Expr s;
    for (std::size_t j = 0; j < 3; ++j) {
      const Expr& xj = xi.get({static_cast<int>(j)});
      if (xj.is_zero()) continue;
      Expr e = i == j ? n(i, j) - r.lambda : n(i, j);
      s += e * xj;
    }
    r.Z[i] = s / xx;
  }
  return r;
}

Reports verify_3d_conditions(const Bivector& pi, const Endomorphism& n, const std::optional<KForm>& phi,
                             const VolumeForm& v, const std::optional<Expr>& lambda,
                             const std::optional<VectorField>& z, const SamplePlan& plan, double tol) {
  if (n.dim() != 3) throw DegreeError("3D conditions need dimension 3");
  const KForm xi = star(pi, v);
  Expr lam;
  VectorField zz;
  std::string source = "supplied";
  if (lambda && z) {
    lam = *lambda;
    zz = *z;
  } else {
    Decomposition dec = recover_decomposition(n, xi);
    lam = lambda ? *lambda : dec.lambda;
    zz = z ? *z : dec.Z;
    source = "recovered";
  }
  Reports out;
  const Endomorphism model = lam * Endomorphism::identity(3) + tensor_product(zz, xi);
  out.push_back(check_identity("3d.decomposition", n, model, plan, tol));
  out.back().detail = "lambda and Z " + source;
  const Expr mu = lam + pair(xi, zz);
  out.push_back(check_identity("3d.closure", d(zero_form(3, mu)), divergence(zz, v) * xi, plan, tol));
  if (phi) {
    out.push_back(check_identity("3d.phi", *phi, Expr(-1.0) * directional(zz, lam) * v.as_form(), plan, tol));
  } else {
    out.push_back(skipped("3d.phi", tol, "no 3-form"));
  }
  return out;
}

PointDecomposition decompose_3d(const Endomorphism& n, const KForm& xi, const Point& p, double tol) {
  if (n.dim() != 3 || xi.dim() != 3 || xi.degree() != 1) throw DegreeError("decompose_3d needs dimension 3");
  double m[3][3];
  double x[3];
  for (std::size_t i = 0; i < 3; ++i) {
    auto xv = evaluate(xi.get({static_cast<int>(i)}), p.coords);
    if (!xv) throw std::domain_error("xi is not finite at the point");
    x[i] = *xv;
    for (std::size_t j = 0; j < 3; ++j) {
      auto v = evaluate(n(i, j), p.coords);
      if (!v) throw std::domain_error("N is not finite at the point");
      m[i][j] = *v;
    }
  }
  std::size_t j = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (std::fabs(x[i]) > std::fabs(x[j])) j = i;
  }
  if (x[j] == 0.0) throw std::domain_error("xi vanishes at the point");
  const std::size_t k = j == 0 ? 1 : 0;
  double e[3] = {0, 0, 0};
  e[k] += x[j];
  e[j] -= x[k];
  std::size_t mi = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (std::fabs(e[i]) > std::fabs(e[mi])) mi = i;
  }
  double ne = 0;
  for (std::size_t c = 0; c < 3; ++c) ne += m[mi][c] * e[c];
  PointDecomposition r;
  r.lambda = ne / e[mi];
  r.Z.assign(3, 0.0);
  for (std::size_t i = 0; i < 3; ++i) r.Z[i] = (m[i][j] - (i == j ? r.lambda : 0.0)) / x[j];
  double res = 0.0, scale = 1.0;
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      const double model = (a == b ? r.lambda : 0.0) + r.Z[a] * x[b];
      res = std::max(res, std::fabs(m[a][b] - model));
      scale = std::max(scale, std::fabs(m[a][b]));
    }
  }
  r.residual = res / scale;
  if (r.residual > tol) throw DecompositionError("N is not of the form lambda I + Z (x) xi at the point", r.residual);
  return r;
}

// ---------------------------------------------------------------- Haantjes

Reports verify_haantjes_structure(const Endomorphism& n, const KForm& theta, const SamplePlan& plan, double tol,
                                  const std::string& prefix) {
  if (theta.degree() != 1) throw DegreeError("theta must be a 1-form");
  Reports out;
  const TorsionEvaluator t = nijenhuis(n);
  out.push_back(check_zero(prefix + ".H1", torsion_field(haantjes(n, t)), plan, tol));
  out.push_back(check_zero(prefix + ".H2", d(theta), plan, tol));
  out.push_back(check_zero(prefix + ".H3", d_N(n, theta), plan, tol));
  std::vector<Expr> h4;
  for (auto [i, j] : coordinate_pairs(n.dim())) h4.push_back(pair(theta, t.on_basis(i, j)));
  out.push_back(check_zero(prefix + ".H4", Field::list(h4), plan, tol));
  return out;
}

Reports verify_lm_chain(const std::vector<Endomorphism>& chain, const KForm& theta,
                        const std::optional<Endomorphism>& n, const SamplePlan& plan, double tol) {
  if (chain.size() < 2) throw std::invalid_argument("chain needs at least two members");
  Reports out;
  const std::size_t dim = chain.front().dim();
  {
    std::vector<Field> c0{Field(chain[0] - Endomorphism::identity(dim))};
    if (n) c0.emplace_back(chain[1] - *n);
    out.push_back(check_zero("chain.C0", Field::stack(c0), plan, tol));
    if (!n) out.back().detail = "N_1 = N not checked: structure has no N";
  }
  std::vector<TorsionEvaluator> torsions;
  for (const auto& m : chain) torsions.push_back(nijenhuis(m));
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const std::string tag = ".N" + std::to_string(i);
    out.push_back(check_zero("chain.C1" + tag, torsion_field(haantjes(chain[i], torsions[i])), plan, tol));
  }
  for (std::size_t i = 0; i < chain.size(); ++i) {
    for (std::size_t j = i + 1; j < chain.size(); ++j) {
      out.push_back(check_identity("chain.C2.N" + std::to_string(i) + ".N" + std::to_string(j),
                                   compose(chain[i], chain[j]), compose(chain[j], chain[i]), plan, tol));
    }
  }
  for (std::size_t i = 0; i < chain.size(); ++i) {
    out.push_back(check_zero("chain.C3.N" + std::to_string(i), d_N(chain[i], theta), plan, tol));
  }
  for (std::size_t i = 0; i < chain.size(); ++i) {
    std::vector<Expr> c4;
    for (auto [a, b] : coordinate_pairs(dim)) c4.push_back(pair(theta, torsions[i].on_basis(a, b)));
    out.push_back(check_zero("chain.C4.N" + std::to_string(i), Field::list(c4), plan, tol));
  }
  for (std::size_t i = 0; i < chain.size(); ++i) {
    for (std::size_t j = i; j < chain.size(); ++j) {
      const KForm tij = dual_apply(chain[i], dual_apply(chain[j], theta));
      out.push_back(check_zero("chain.theta_closed.N" + std::to_string(i) + ".N" + std::to_string(j), d(tij), plan,
                               tol));
      out.back().informational = true;
    }
  }
  return out;
}

// ---------------------------------------------------------------- recursion

RecursionResult verify_recursion_involutivity(const Bivector& pi, const Endomorphism& n, unsigned kmax,
                                              const SamplePlan& plan, double tol) {
  if (kmax < 2) throw std::invalid_argument("kmax must be at least 2");
  const std::size_t dim = n.dim();
  EndomorphismPowers powers(n);
  const TorsionEvaluator t = nijenhuis(n);
  Differentiator diff;
  std::vector<KForm> dI(kmax + 1);
  for (unsigned k = 1; k <= kmax; ++k) dI[k] = exterior_d_of(invariant(powers, k), dim, diff);
  std::vector<KForm> phis(kmax);
  for (unsigned s = 0; s < kmax; ++s) phis[s] = phi_s(powers, t, s);
  auto bracket = [&](unsigned i, unsigned j) { return bivector_pairing(pi, dI[i], dI[j]); };

  RecursionResult r;
  for (unsigned k = 1; k < kmax; ++k) {
    // dI_{k+1} = N* dI_k - phi_{k-1} with <phi_s, X> = (1/2) Tr(N^s T_N(X, -))
    const KForm rhs = dual_apply(n, dI[k]) - phis[k - 1];
    r.reports.push_back(check_identity("recursion.step.k" + std::to_string(k), dI[k + 1], rhs, plan, tol));
  }
  for (unsigned k = 2; k <= kmax; ++k) {
    for (unsigned j = 1; j < k; ++j) {
      const Expr lhs = bracket(k, j) - bracket(k - 1, j + 1);
      const Expr rhs = pair(phis[j - 1], sharp(pi, dI[k - 1])) + pair(phis[k - 2], sharp(pi, dI[j]));
      r.reports.push_back(check_identity(
          "recursion.bracket_difference.k" + std::to_string(k) + ".j" + std::to_string(j), lhs, rhs, plan, tol));
    }
  }
  r.table.assign(kmax, std::vector<double>(kmax, 0.0));
  r.table_pass.assign(kmax, std::vector<bool>(kmax, true));
  for (unsigned i = 1; i <= kmax; ++i) {
    for (unsigned j = i; j <= kmax; ++j) {
      CheckReport c = check_zero("recursion.involutivity.I" + std::to_string(i) + ".I" + std::to_string(j),
                                 bracket(i, j), plan, tol);
      r.table[i - 1][j - 1] = r.table[j - 1][i - 1] = c.max_scaled_residual;
      r.table_pass[i - 1][j - 1] = r.table_pass[j - 1][i - 1] = !c.failed();
      r.reports.push_back(std::move(c));
    }
  }
  return r;
}

// ---------------------------------------------------------------- involutivity conditions

Reports verify_theo_inv(const Bivector& pi, const Endomorphism& n, const KForm& phi, const KForm& omega,
                        unsigned pmax, const SamplePlan& plan, double tol) {
  if (omega.degree() != 2) throw DegreeError("Omega must be a 2-form");
  if (pmax < 1) throw std::invalid_argument("pmax must be at least 1");
  const std::size_t dim = n.dim();
  EndomorphismPowers powers(n);
  Differentiator diff;
  std::vector<KForm> dI(pmax + 1);
  for (unsigned k = 1; k <= pmax; ++k) dI[k] = exterior_d_of(invariant(powers, k), dim, diff);
  Reports out;
  out.push_back(check_identity("theoinv.a", phi, Expr(-2.0) * wedge(dI[1], omega), plan, tol));

  std::vector<VectorField> x(pmax + 1), y(pmax + 1);
  for (unsigned k = 1; k <= pmax; ++k) x[k] = sharp(pi, dI[k]);
  for (unsigned k = 1; k <= pmax; ++k) y[k] = powers(k - 1).apply(x[1]) - x[k];
  std::vector<Expr> b;
  for (unsigned j = 1; j <= pmax; ++j) {
    for (unsigned k = 1; k <= pmax; ++k) {
      std::vector<VectorField> args{x[j], y[k]};
      b.push_back(evaluate_on(omega, args));
    }
  }
  out.push_back(check_zero("theoinv.b", Field::list(b), plan, tol));
  return out;
}

// ---------------------------------------------------------------- deformation

Endomorphism deformed_endomorphism(const Bivector& pi, const Endomorphism& n, const KForm& omega) {
  if (omega.degree() != 2) throw DegreeError("Omega must be a 2-form");
  const std::size_t dim = n.dim();
  Endomorphism r = n;
  for (std::size_t j = 0; j < dim; ++j) {
    const VectorField col = sharp(pi, flat(omega, VectorField::basis(dim, j)));
    for (std::size_t i = 0; i < dim; ++i) r(i, j) = n(i, j) + col[i];
  }
  return r;
}

KForm half_bracket_canonical_3d(const KForm& omega) {
  if (omega.dim() != 3 || omega.degree() != 2) throw DegreeError("expected a 2-form in dimension 3");
  const Expr o12 = omega.get({0, 1}), o13 = omega.get({0, 2}), o23 = omega.get({1, 2});
  Differentiator diff;
  KForm r(3, 3);
  r.set({0, 1, 2}, o23 * diff(o12, 0) - o13 * diff(o12, 1) + o12 * diff(o12, 2));
  return r;
}

Deformation deform_3d(const Bivector& pi, const Endomorphism& n, const KForm& phi, const KForm& omega,
                      const SamplePlan& plan, double tol) {
  if (!is_canonical_xy(pi)) {
    throw std::invalid_argument("deformation needs dimension 3 and pi = d_x ^ d_y exactly");
  }
  if (omega.degree() != 2 || phi.degree() != 3) throw DegreeError("Omega must be a 2-form and phi a 3-form");
  Deformation out;
  out.reports.push_back(check_zero("deform.d_omega", d(omega), plan, tol));
  out.N = deformed_endomorphism(pi, n, omega);
  const KForm dn_omega = d_N(n, omega);
  out.phi = phi + dn_omega + half_bracket_canonical_3d(omega);
  if (!out.reports.back().passed()) {
    out.reports.push_back(skipped("deform.pqn", tol, "Omega is not closed"));
    return out;
  }
  for (auto& r : verify_pqn(pi, out.N, out.phi, plan, tol, "deform.pqn")) out.reports.push_back(std::move(r));

  // Sign of the g d_z Omega_12 term when N = g d_z (x) dz.
  bool vertical = true;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if ((i != 2 || j != 2) && !n(i, j).is_zero()) vertical = false;
    }
  }
  if (!vertical) {
    out.reports.push_back(skipped("deform.term_sign", tol, "N is not of the form g d_z (x) dz"));
    return out;
  }
  const KForm vol = VolumeForm{3, Expr(1.0)}.as_form();
  const Expr g = n(2, 2);
  const Expr o12 = omega.get({0, 1});
  const Expr gterm = g * derive(o12, 2);
  const KForm half = half_bracket_canonical_3d(omega);
  const KForm plus = phi + gterm * vol + half;
  const KForm minus = phi + Expr(-1.0) * gterm * vol + half;
  const Decomposition dec = recover_decomposition(out.N, star(pi, VolumeForm{3, Expr(1.0)}));
  const KForm target = Expr(-1.0) * directional(dec.Z, dec.lambda) * vol;

  CheckReport cp = check_identity("deform.term_sign.plus", plus, target, plan, tol);
  CheckReport cm = check_identity("deform.term_sign.minus", minus, target, plan, tol);
  CheckReport cd = check_identity("deform.term_sign.dN_definition", dn_omega, gterm * vol, plan, tol);
  CheckReport r;
  r.name = "deform.term_sign";
  r.tol = tol;
  if (cp.passed() && !cm.passed()) {
    out.sign = 1;
  } else if (cm.passed() && !cp.passed()) {
    out.sign = -1;
  }
  const bool agrees = out.sign == 1 ? cd.passed() : (out.sign == -1 ? !cd.passed() : false);
  if (out.sign != 0 && agrees) {
    r = out.sign == 1 ? cp : cm;
    r.name = "deform.term_sign";
    r.detail = std::string(out.sign == 1 ? "positive" : "negative") +
               ": phi~ = -Z(lambda) V requires the " + (out.sign == 1 ? "+" : "-") +
               "g d_z Omega_12 term; d_N Omega from i_N d - d i_N agrees";
  } else if (out.sign == 0) {
    r = cp;
    r.name = "deform.term_sign";
    r.status = CheckReport::Status::Pass;
    r.informational = true;
    r.detail = cp.passed() ? "undetermined: g d_z Omega_12 vanishes on the samples"
                           : "undetermined: neither sign reproduces -Z(lambda) V";
    if (!cp.passed()) r.status = CheckReport::Status::Fail;
  } else {
    r = cd;
    r.name = "deform.term_sign";
    r.status = CheckReport::Status::Fail;
    r.detail = "sign consistent with -Z(lambda) V disagrees with d_N Omega from the definition";
  }
  out.reports.push_back(std::move(r));
  return out;
}

// ---------------------------------------------------------------- minimal polynomial

CheckReport verify_minpoly(const Endomorphism& n, const Expr& lambda, const VectorField& z, const KForm& xi,
                           const SamplePlan& plan, double tol) {
  const Expr s = pair(xi, z);
  const Endomorphism p = compose(n, n) - (s + Expr(2.0) * lambda) * n +
                         (lambda * lambda + s * lambda) * Endomorphism::identity(n.dim());
  return check_zero("minpoly", p, plan, tol);
}

// ---------------------------------------------------------------- identity battery

namespace {

double binomial(unsigned n, unsigned k) {
  double r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

Reports run_identity_battery(const Structure& s, const SamplePlan& plan, double tol) {
  Reports out;
  const unsigned kb = 5;
  const std::size_t dim = s.chart.dim();
  const bool decomposable = dim == 3 && s.pi && s.volume && s.N;
  const char* need3d = "requires dimension 3 with pi, volume and N";

  std::optional<KForm> xi;
  Expr lam;
  VectorField zz;
  if (decomposable) {
    xi = star(*s.pi, *s.volume);
    if (s.lambda && s.Z) {
      lam = *s.lambda;
      zz = *s.Z;
    } else {
      Decomposition dec = recover_decomposition(*s.N, *xi);
      lam = s.lambda ? *s.lambda : dec.lambda;
      zz = s.Z ? *s.Z : dec.Z;
    }
  }

  if (decomposable) {
    const Expr sz = pair(*xi, zz);
    const Expr zl = directional(zz, lam);
    EndomorphismPowers powers(*s.N);
    const TorsionEvaluator t = nijenhuis(*s.N);
    // f_k = sum_{l<k} C(k,l) lambda^l <xi,Z>^{k-l-1}
    auto f_k = [&](unsigned k) {
      Expr f;
      for (unsigned l = 0; l < k; ++l) f += Expr(binomial(k, l)) * pow(lam, l) * pow(sz, k - l - 1);
      return f;
    };
    std::vector<Field> nalk_l, nalk_r;
    for (unsigned k = 1; k <= kb; ++k) {
      out.push_back(check_identity("battery.power_closed_form.k" + std::to_string(k), powers(k),
                                   pow(lam, k) * Endomorphism::identity(3) + f_k(k) * tensor_product(zz, *xi), plan,
                                   tol));
    }
    for (unsigned k = 0; k <= kb; ++k) {
      out.push_back(check_identity("battery.phi_closed_form.k" + std::to_string(k), phi_s(powers, t, k),
                                   (zl * pow(lam, k)) * *xi, plan, tol));
    }
    const KForm theta = divergence(zz, *s.volume) * *xi;
    const Expr mu = lam + sz;
    out.push_back(check_identity("battery.i_N_xi", i_N(*s.N, theta), mu * theta, plan, tol));
    for (unsigned k = 1; k <= kb; ++k) {
      out.push_back(check_identity("battery.power_on_xi.k" + std::to_string(k), i_N(powers(k), theta), pow(mu, k) * theta,
                                   plan, tol));
    }
    const KForm xdm = wedge(*xi, d(zero_form(3, mu)));
    std::vector<Field> tl, tg, tp;
    for (auto [i, j] : coordinate_pairs(3)) {
      const VectorField ei = VectorField::basis(3, i), ej = VectorField::basis(3, j);
      std::vector<VectorField> args{ei, ej};
      tl.emplace_back(t.on_basis(i, j));
      const VectorField ixi = interior_form_on_bivectorfield(*xi, ei, ej);
      tg.emplace_back(evaluate_on(xdm, args) * zz + zl * ixi);
      tp.emplace_back(zl * ixi);
    }
    out.push_back(check_identity("battery.torsion_closed_form", Field::stack(tl), Field::stack(tg), plan, tol));
    out.push_back(check_identity("battery.torsion_phi_form", Field::stack(tl), Field::stack(tp), plan, tol));
    for (unsigned k = 1; k <= kb; ++k) {
      const TorsionEvaluator tk = nijenhuis(powers(k));
      const Expr zlk = Expr(static_cast<double>(k)) * pow(lam, k - 1) * zl;
      std::vector<Field> l, r;
      for (auto [i, j] : coordinate_pairs(3)) {
        l.emplace_back(tk.on_basis(i, j));
        r.emplace_back((f_k(k) * zlk) *
                       interior_form_on_bivectorfield(*xi, VectorField::basis(3, i), VectorField::basis(3, j)));
      }
      out.push_back(check_identity("battery.power_torsion.k" + std::to_string(k), Field::stack(l), Field::stack(r), plan, tol));
    }
    if (s.phi) {
      const KForm ipi = interior_mv(*s.pi, *s.phi);
      std::vector<Field> l, r;
      for (auto [i, j] : coordinate_pairs(3)) {
        l.emplace_back(sharp(*s.pi, insert_pair(*s.phi, i, j)));
        r.emplace_back(Expr(-1.0) *
                       interior_form_on_bivectorfield(ipi, VectorField::basis(3, i), VectorField::basis(3, j)));
      }
      out.push_back(check_identity("battery.phi_contraction", Field::stack(l), Field::stack(r), plan, tol));
    } else {
      out.push_back(skipped("battery.phi_contraction", tol, "requires phi"));
    }
  } else {
    for (const char* nm : {"battery.power_closed_form", "battery.phi_closed_form", "battery.i_N_xi", "battery.power_on_xi", "battery.torsion_closed_form",
                           "battery.torsion_phi_form", "battery.power_torsion", "battery.phi_contraction"}) {
      out.push_back(skipped(nm, tol, need3d));
    }
  }

  // W (x) eta torsions
  std::optional<VectorField> w;
  std::optional<KForm> eta;
  if (decomposable) {
    w = zz;
    eta = xi;
  } else if (s.Z && s.theta) {
    w = s.Z;
    eta = s.theta;
  }
  if (w && eta) {
    const Endomorphism we = tensor_product(*w, *eta);
    const TorsionEvaluator t = nijenhuis(we);
    const TorsionEvaluator h = haantjes(we, t);
    const Expr ew = pair(*eta, *w);
    const KForm ede = wedge(*eta, d(*eta));
    std::vector<Field> tl, tr, hl, hr;
    for (auto [i, j] : coordinate_pairs(dim)) {
      const VectorField ei = VectorField::basis(dim, i), ej = VectorField::basis(dim, j);
      std::vector<VectorField> args{*w, ei, ej};
      const Expr ede_w = ede.degree() <= dim ? evaluate_on(ede, args) : Expr(0.0);
      tl.emplace_back(t.on_basis(i, j));
      tr.emplace_back((pair(*eta, ei) * directional(ej, ew) - pair(*eta, ej) * directional(ei, ew) - ede_w) * *w);
      hl.emplace_back(h.on_basis(i, j));
      hr.emplace_back((Expr(-1.0) * ew * ew * ede_w) * *w);
    }
    out.push_back(check_identity("battery.rank_one_torsion", Field::stack(tl), Field::stack(tr), plan, tol));
    out.push_back(check_identity("battery.rank_one_haantjes", Field::stack(hl), Field::stack(hr), plan, tol));
  } else {
    out.push_back(skipped("battery.rank_one_torsion", tol, "requires a 3D decomposition or Z and theta"));
    out.push_back(skipped("battery.rank_one_haantjes", tol, "requires a 3D decomposition or Z and theta"));
  }

  if (s.N) {
    const Expr f = Expr(1.0) + Expr::coord(0) * Expr::coord(0);
    const Expr g = Expr(2.0) + Expr::coord(dim > 1 ? 1 : 0);
    const Endomorphism m = f * Endomorphism::identity(dim) + g * *s.N;
    const Field hm = torsion_field(haantjes(m));
    Field hn = torsion_field(haantjes(*s.N));
    const Expr g4 = pow(g, 4);
    for (auto& [k, e] : hn.comps) e = g4 * e;
    out.push_back(check_identity("battery.haantjes_rescaling", hm, hn, plan, tol));
  } else {
    out.push_back(skipped("battery.haantjes_rescaling", tol, "requires N"));
  }
  return out;
}

// ---------------------------------------------------------------- suites

SuiteResult run_suites(const Structure& s, const std::vector<std::string>& suites, const SamplePlan& plan,
                       const Settings& settings) {
  const auto& known = suite_names();
  for (const auto& name : suites) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw std::invalid_argument("unknown suite '" + name + "'");
    }
  }
  const double tol = settings.tol;
  const std::size_t dim = s.chart.dim();
  SuiteResult out;
  auto add = [&](Reports rs) {
    for (auto& r : rs) out.reports.push_back(std::move(r));
  };
  auto missing = [&](const std::string& suite, std::initializer_list<std::pair<bool, const char*>> needs) {
    std::string m;
    for (const auto& [ok, what] : needs) {
      if (!ok) m += (m.empty() ? "" : ", ") + std::string(what);
    }
    if (!m.empty()) out.reports.push_back(skipped(suite, tol, "missing " + m));
    return !m.empty();
  };

  for (const auto& suite : suites) {
    if (suite == "poisson") {
      if (missing(suite, {{s.pi.has_value(), "pi"}})) continue;
      add(verify_poisson(*s.pi, s.volume, plan, tol));
    } else if (suite == "pn") {
      if (missing(suite, {{s.pi.has_value(), "pi"}, {s.N.has_value(), "N"}})) continue;
      add(verify_pn(*s.pi, *s.N, plan, tol));
    } else if (suite == "pqn") {
      if (missing(suite, {{s.pi.has_value(), "pi"}, {s.N.has_value(), "N"}, {s.phi.has_value(), "phi"}})) continue;
      add(verify_pqn(*s.pi, *s.N, *s.phi, plan, tol));
    } else if (suite == "3d") {
      if (missing(suite, {{dim == 3, "dimension 3"},
                          {s.pi.has_value(), "pi"},
                          {s.N.has_value(), "N"},
                          {s.volume.has_value(), "volume"}})) {
        continue;
      }
      add(verify_3d_conditions(*s.pi, *s.N, s.phi, *s.volume, s.lambda, s.Z, plan, tol));
    } else if (suite == "haantjes") {
      if (missing(suite, {{s.N.has_value(), "N"}, {s.theta.has_value(), "theta"}})) continue;
      add(verify_haantjes_structure(*s.N, *s.theta, plan, tol));
    } else if (suite == "chain") {
      if (missing(suite, {{s.chain.size() >= 2, "chain of length >= 2"}, {s.theta.has_value(), "theta"}})) continue;
      add(verify_lm_chain(s.chain, *s.theta, s.N, plan, tol));
    } else if (suite == "recursion") {
      if (missing(suite, {{s.pi.has_value(), "pi"}, {s.N.has_value(), "N"}, {settings.kmax >= 2, "kmax >= 2"}})) {
        continue;
      }
      RecursionResult rr = verify_recursion_involutivity(*s.pi, *s.N, settings.kmax, plan, tol);
      add(rr.reports);
      rr.reports.clear();
      out.recursion = std::move(rr);
    } else if (suite == "minpoly") {
      if (missing(suite, {{dim == 3, "dimension 3"},
                          {s.pi.has_value(), "pi"},
                          {s.N.has_value(), "N"},
                          {s.volume.has_value(), "volume"}})) {
        continue;
      }
      const KForm xi = star(*s.pi, *s.volume);
      Expr lam;
      VectorField z;
      if (s.lambda && s.Z) {
        lam = *s.lambda;
        z = *s.Z;
      } else {
        Decomposition dec = recover_decomposition(*s.N, xi);
        lam = s.lambda ? *s.lambda : dec.lambda;
        z = s.Z ? *s.Z : dec.Z;
      }
      out.reports.push_back(verify_minpoly(*s.N, lam, z, xi, plan, tol));
    } else if (suite == "theoinv") {
      if (missing(suite, {{s.pi.has_value(), "pi"},
                          {s.N.has_value(), "N"},
                          {s.phi.has_value(), "phi"},
                          {s.Omega.has_value(), "Omega"}})) {
        continue;
      }
      add(verify_theo_inv(*s.pi, *s.N, *s.phi, *s.Omega, std::max(1u, settings.kmax), plan, tol));
    } else if (suite == "battery") {
      add(run_identity_battery(s, plan, tol));
    } else if (suite == "deform") {
      if (missing(suite, {{s.pi.has_value(), "pi"},
                          {s.N.has_value(), "N"},
                          {s.phi.has_value(), "phi"},
                          {s.Omega.has_value(), "Omega"}})) {
        continue;
      }
      if (!is_canonical_xy(*s.pi)) {
        out.reports.push_back(skipped(suite, tol, "requires dimension 3 and pi = d_x ^ d_y"));
        continue;
      }
      add(deform_3d(*s.pi, *s.N, *s.phi, *s.Omega, plan, tol).reports);
    }
  }
  return out;
}

}  // namespace pqn
