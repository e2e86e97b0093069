#include "pqn/catalog.hpp"

#include <algorithm>
#include <string>

namespace pqn {

namespace {

using Poly = std::vector<Expr>;

Poly poly_add(const Poly& a, const Poly& b, double sign) {
  Poly r(std::max(a.size(), b.size()));
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Expr x = i < a.size() ? a[i] : Expr(0.0);
    const Expr y = i < b.size() ? b[i] : Expr(0.0);
    r[i] = sign > 0 ? x + y : x - y;
  }
  return r;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly r(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  }
  return r;
}

// Coefficients in the given coordinate, lowest degree first.
Poly expand(const Expr& e, std::size_t index) {
  if (!depends_on(e, index)) return {e};
  switch (e.op()) {
    case Op::Coord:
      return {Expr(0.0), Expr(1.0)};
    case Op::Neg: {
      Poly r = expand(e.arg(), index);
      for (auto& c : r) c = -c;
      return r;
    }
    case Op::Add:
      return poly_add(expand(e.lhs(), index), expand(e.rhs(), index), 1);
    case Op::Sub:
      return poly_add(expand(e.lhs(), index), expand(e.rhs(), index), -1);
    case Op::Mul:
      return poly_mul(expand(e.lhs(), index), expand(e.rhs(), index));
    case Op::Div: {
      if (depends_on(e.rhs(), index)) break;
      Poly r = expand(e.lhs(), index);
      for (auto& c : r) c = c / e.rhs();
      return r;
    }
    case Op::IntPow: {
      const Poly base = expand(e.arg(), index);
      Poly r{Expr(1.0)};
      for (std::uint32_t k = 0; k < e.index(); ++k) r = poly_mul(r, base);
      return r;
    }
    default:
      break;
  }
  throw CatalogError("integrand is not polynomial in the integration variable; supply b explicitly");
}

void require_xyz(const RecipeInput& in) {
  if (!in.lambda.valid() || !in.a.valid() || !in.g.valid()) throw CatalogError("recipe needs lambda, a and g");
  for (std::size_t i : {0u, 1u}) {
    if (depends_on(in.g, i)) throw CatalogError("g must depend on z only");
  }
}

Expr recipe_b(const RecipeInput& in) {
  if (in.b) {
    const Expr lhs = derive(*in.b, 1);
    const Expr rhs = derive(in.lambda, 2) - derive(in.a, 0);
    const SamplePlan plan = SamplePlan::uniform(3, {-1.0, 1.0}, 64, 42);
    if (!check_identity("recipe.b", lhs, rhs, plan, 1e-8).passed()) {
      throw CatalogError("explicit b does not satisfy b_y = lambda_z - a_x");
    }
    return *in.b;
  }
  return antiderivative_polynomial(derive(in.lambda, 2) - derive(in.a, 0), 1);
}

Chart toda_chart(unsigned n) {
  std::vector<std::string> names;
  for (unsigned i = 1; i <= n; ++i) names.push_back("p" + std::to_string(i));
  for (unsigned i = 1; i <= n; ++i) names.push_back("q" + std::to_string(i));
  return Chart(names);
}

Bivector canonical_pairing(unsigned n) {
  Bivector pi(2 * n, 2);
  for (unsigned i = 0; i < n; ++i) pi.set({static_cast<int>(i), static_cast<int>(n + i)}, Expr(1.0));
  return pi;
}

Endomorphism do_operator(unsigned n) {
  const std::size_t dim = 2 * n;
  auto p = [](unsigned i) { return i - 1; };
  auto q = [n](unsigned i) { return n + i - 1; };
  Endomorphism m(dim);
  for (unsigned i = 1; i <= n; ++i) {
    m(q(i), q(i)) = Expr::coord(p(i));
    m(p(i), p(i)) = Expr::coord(p(i));
  }
  for (unsigned i = 1; i <= n; ++i) {
    for (unsigned j = i + 1; j <= n; ++j) {
      m(q(i), p(j)) = Expr(1.0);
      m(q(j), p(i)) = Expr(-1.0);
    }
  }
  for (unsigned i = 1; i < n; ++i) {
    const Expr e = exp(Expr::coord(q(i)) - Expr::coord(q(i + 1)));
    m(p(i + 1), q(i)) = m(p(i + 1), q(i)) + e;
    m(p(i), q(i + 1)) = m(p(i), q(i + 1)) - e;
  }
  return m;
}

}  // namespace

Expr antiderivative_polynomial(const Expr& e, std::size_t index) {
  const Poly c = expand(e, index);
  Expr r;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k].is_zero()) continue;
    r += c[k] / Expr(static_cast<double>(k + 1)) * pow(Expr::coord(index), static_cast<std::uint32_t>(k + 1));
  }
  return r;
}

Structure das_okubo(unsigned n) {
  if (n < 2) throw CatalogError("das-okubo needs n >= 2");
  Structure s;
  s.name = "das-okubo";
  s.chart = toda_chart(n);
  s.pi = canonical_pairing(n);
  s.N = do_operator(n);
  s.phi = KForm(2 * n, 3);
  return s;
}

Structure closed_toda(unsigned n) {
  if (n < 2) throw CatalogError("closed-toda needs n >= 2");
  Structure s;
  s.name = "closed-toda";
  s.chart = toda_chart(n);
  s.pi = canonical_pairing(n);
  const std::size_t p1 = 0, pn = n - 1, q1 = n, qn = 2 * n - 1;
  const Expr e = exp(Expr::coord(qn) - Expr::coord(q1));
  Endomorphism m = do_operator(n);
  m(p1, qn) = m(p1, qn) - e;
  m(pn, q1) = m(pn, q1) + e;
  s.N = m;
  KForm sum_dp(2 * n, 1);
  for (unsigned i = 0; i < n; ++i) sum_dp.set({static_cast<int>(i)}, Expr(1.0));
  KForm dq1qn(2 * n, 2);
  dq1qn.set({static_cast<int>(q1), static_cast<int>(qn)}, Expr(2.0) * e);
  s.phi = wedge(dq1qn, sum_dp);
  KForm omega(2 * n, 2);
  omega.set({static_cast<int>(q1), static_cast<int>(qn)}, -e);
  s.Omega = omega;
  return s;
}

Structure r3_recipe(const RecipeInput& in) {
  require_xyz(in);
  const Expr b = recipe_b(in);
  const Expr& a = in.a;
  const Expr c = in.g - in.lambda;
  Structure s;
  s.name = "r3-recipe";
  s.chart = Chart({"x", "y", "z"});
  s.volume = VolumeForm{3, Expr(1.0)};
  Bivector pi(3, 2);
  pi.set({0, 1}, Expr(1.0));
  s.pi = pi;
  const VectorField z(std::vector<Expr>{a, b, c});
  const KForm dz = basis_one_form(3, 2);
  const Endomorphism n = in.lambda * Endomorphism::identity(3) + tensor_product(z, dz);
  s.N = n;
  KForm phi(3, 3);
  phi.set({0, 1, 2}, a * derive(c, 0) + b * derive(c, 1) - c * (derive(a, 0) + derive(b, 1)));
  s.phi = phi;
  s.lambda = in.lambda;
  s.Z = z;
  s.theta = divergence(z, *s.volume) * dz;
  EndomorphismPowers powers(n);
  for (unsigned k = 0; k <= 3; ++k) s.chain.push_back(powers(k));
  return s;
}

LocalPair prop_local_pair(const RecipeInput& in) {
  require_xyz(in);
  const Expr b = recipe_b(in);
  LocalPair r{Endomorphism(3), KForm(3, 2)};
  r.N1(2, 2) = in.g;
  r.Omega.set({0, 1}, -in.lambda);
  r.Omega.set({0, 2}, -b);
  r.Omega.set({1, 2}, in.a);
  return r;
}

Structure prop_local(const RecipeInput& in) {
  LocalPair lp = prop_local_pair(in);
  Structure s;
  s.name = "prop-local";
  s.chart = Chart({"x", "y", "z"});
  s.volume = VolumeForm{3, Expr(1.0)};
  Bivector pi(3, 2);
  pi.set({0, 1}, Expr(1.0));
  s.pi = pi;
  s.N = lp.N1;
  s.phi = KForm(3, 3);
  s.Omega = lp.Omega;
  return s;
}

Structure magri_veselov() {
  Structure s;
  s.name = "magri-veselov";
  s.chart = Chart({"x", "y", "z"});
  const Expr y = Expr::coord(1), z = Expr::coord(2);
  Endomorphism n(3);
  n(0, 2) = Expr(-0.5) * y;
  n(1, 0) = Expr(2.0);
  n(1, 2) = -z;
  n(2, 1) = Expr(2.0);
  s.N = n;
  s.theta = basis_one_form(3, 2);
  EndomorphismPowers powers(n);
  for (unsigned k = 0; k <= 2; ++k) s.chain.push_back(powers(k));
  return s;
}

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names{"das-okubo", "closed-toda", "r3-recipe", "prop-local", "magri-veselov"};
  return names;
}

}  // namespace pqn

namespace pqn {

namespace {

Expr recipe_expr(const std::map<std::string, std::string>& p, const std::string& key, const std::string& fallback) {
  static const Chart xyz({"x", "y", "z"});
  auto it = p.find(key);
  try {
    return parse(it == p.end() ? fallback : it->second, xyz);
  } catch (const ParseError& e) {
    throw CatalogError("parameter " + key + ": " + e.what());
  }
}

unsigned size_param(const std::map<std::string, std::string>& p, const std::string& name) {
  auto it = p.find("n");
  if (it == p.end()) throw CatalogError(name + " needs n");
  const std::string& v = it->second;
  if (v.empty() || v.size() > 6 || v.find_first_not_of("0123456789") != std::string::npos) {
    throw CatalogError("n must be a non-negative integer");
  }
  return static_cast<unsigned>(std::stoul(v));
}

}  // namespace

Structure catalog_entry(const std::string& name, const std::map<std::string, std::string>& params) {
  std::map<std::string, std::string> p;
  for (const auto& [k, v] : params) p[k == "\xce\xbb" ? "lambda" : k] = v;
  auto allow = [&](std::initializer_list<std::string> keys) {
    for (const auto& [k, v] : p) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
        throw CatalogError("unknown parameter '" + k + "' for " + name);
      }
    }
  };

  Structure s;
  if (name == "das-okubo" || name == "closed-toda") {
    allow({"n"});
    const unsigned n = size_param(p, name);
    s = name == "das-okubo" ? das_okubo(n) : closed_toda(n);
  } else if (name == "r3-recipe" || name == "prop-local") {
    allow({"lambda", "a", "g", "b"});
    if (!p.count("lambda")) throw CatalogError(name + " needs lambda");
    RecipeInput r{recipe_expr(p, "lambda", ""), recipe_expr(p, "a", "0"), recipe_expr(p, "g", "0"), std::nullopt};
    if (p.count("b")) r.b = recipe_expr(p, "b", "");
    s = name == "r3-recipe" ? r3_recipe(r) : prop_local(r);
  } else if (name == "magri-veselov") {
    allow({});
    s = magri_veselov();
  } else {
    std::string known;
    for (const auto& c : catalog_names()) known += (known.empty() ? "" : ", ") + c;
    throw CatalogError("unknown catalog name '" + name + "' (known: " + known + ")");
  }
  s.name = name;
  for (const auto& [k, v] : p) s.name += " " + k + "=" + v;
  return s;
}

}  // namespace pqn
