#include <gtest/gtest.h>

#include "helpers.hpp"
#include "pqn/catalog.hpp"

using namespace pqn;
using testutil::ev;

namespace {

SamplePlan plan(std::size_t dim) { return SamplePlan::uniform(dim, {-1.0, 1.0}, 64, 42); }

bool passes(const Reports& rs) {
  for (const auto& r : rs) {
    if (r.failed() && !r.informational) return false;
  }
  return true;
}

RecipeInput recipe(const char* l, const char* a, const char* g) {
  Chart c = testutil::xyz();
  return RecipeInput{parse(l, c), parse(a, c), parse(g, c), std::nullopt};
}

}  // namespace

TEST(DasOkubo, Components) {
  auto s = das_okubo(2);
  ASSERT_EQ(s.chart.dim(), 4u);
  EXPECT_EQ(s.chart.names()[0], "p1");
  EXPECT_EQ(s.chart.names()[3], "q2");
  const auto& n = *s.N;
  // d/dq1 (x) dp2
  EXPECT_DOUBLE_EQ(ev(n(2, 1), {0.1, 0.2, 0.3, 0.4}), 1.0);
  EXPECT_DOUBLE_EQ(ev(n(3, 0), {0.1, 0.2, 0.3, 0.4}), -1.0);
  EXPECT_DOUBLE_EQ(ev(n(1, 2), {0.1, 0.2, 0.3, 0.4}), std::exp(0.3 - 0.4));
  EXPECT_DOUBLE_EQ(ev(n(0, 3), {0.1, 0.2, 0.3, 0.4}), -std::exp(0.3 - 0.4));
  EXPECT_DOUBLE_EQ(ev(invariant(n, 1), {1, 2, 0, 0}), 3.0);
  EXPECT_THROW(das_okubo(1), CatalogError);
}

TEST(DasOkubo, IsPn) {
  for (unsigned n : {2u, 3u}) {
    auto s = das_okubo(n);
    EXPECT_TRUE(passes(verify_pn(*s.pi, *s.N, plan(2 * n), 1e-8))) << n;
    EXPECT_TRUE(passes(verify_pqn(*s.pi, *s.N, *s.phi, plan(2 * n), 1e-8))) << n;
  }
}

TEST(ClosedToda, IsPqnNotPn) {
  for (unsigned n : {2u, 3u}) {
    auto s = closed_toda(n);
    EXPECT_TRUE(passes(verify_pqn(*s.pi, *s.N, *s.phi, plan(2 * n), 1e-8))) << n;
    auto pn = verify_pn(*s.pi, *s.N, plan(2 * n), 1e-8);
    EXPECT_TRUE(pn[0].passed());
    EXPECT_TRUE(pn[1].passed());
    EXPECT_TRUE(pn[2].failed());
    EXPECT_GT(pn[2].max_scaled_residual, 1e-3);
  }
  EXPECT_THROW(closed_toda(1), CatalogError);
}

TEST(ClosedToda, HaantjesTorsionNonzero) {
  auto s = closed_toda(3);
  const TorsionEvaluator h = haantjes(*s.N);
  double m = 0;
  for (const auto& p : plan(6).points()) {
    for (const auto& e : h.components()) m = std::max(m, std::fabs(ev(e, p.coords)));
  }
  EXPECT_GT(m, 1e-3);
}

TEST(ClosedToda, ThreeFormComponents) {
  auto s = closed_toda(2);
  // phi = 2 e^{q2-q1} dq1 ^ dq2 ^ (dp1 + dp2); in index order (p1,p2,q1,q2): dp1^dq1^dq2 = +.
  const std::vector<double> p{0.1, 0.2, 0.3, -0.4};
  const double e = 2 * std::exp(-0.4 - 0.3);
  EXPECT_DOUBLE_EQ(ev(s.phi->get({0, 2, 3}), p), e);
  EXPECT_DOUBLE_EQ(ev(s.phi->get({1, 2, 3}), p), e);
  EXPECT_EQ(s.phi->components().size(), 2u);
}

TEST(Recipe, Examples) {
  Chart c = testutil::xyz();
  const std::vector<double> p{0.3, -0.7, 0.45};
  {
    auto s = r3_recipe(recipe("z", "y", "0"));
    EXPECT_DOUBLE_EQ(ev((*s.Z)[1], p), -0.7);
    EXPECT_DOUBLE_EQ(ev((*s.Z)[2], p), -0.45);
    EXPECT_DOUBLE_EQ(ev(s.phi->get({0, 1, 2}), p), 0.45);
  }
  {
    auto s = r3_recipe(recipe("z/2", "x/2", "z"));
    EXPECT_DOUBLE_EQ(ev((*s.Z)[1], p), 0.0);
    EXPECT_DOUBLE_EQ(ev((*s.Z)[2], p), 0.225);
    EXPECT_DOUBLE_EQ(ev(s.phi->get({0, 1, 2}), p), -0.45 / 4);
    EXPECT_DOUBLE_EQ(ev(s.theta->get({2}), p), 1.0);
    EXPECT_DOUBLE_EQ(ev(s.theta->get({0}), p), 0.0);
    EXPECT_EQ(s.chain.size(), 4u);
  }
  {
    auto s = r3_recipe(recipe("x", "0", "0"));
    EXPECT_DOUBLE_EQ(ev((*s.Z)[1], p), 0.0);
    EXPECT_DOUBLE_EQ(ev((*s.Z)[2], p), -0.3);
    EXPECT_DOUBLE_EQ(ev(s.phi->get({0, 1, 2}), p), 0.0);
    EXPECT_TRUE(passes(verify_pn(*s.pi, *s.N, plan(3), 1e-8)));
  }
}

TEST(Recipe, ConditionsHoldForPolynomialFamilies) {
  const char* cases[][3] = {{"x*y + z^2", "x^2*z - y", "1 + z^3"},
                            {"z*y^3 - x", "y*x^2", "z"},
                            {"(x + y + z)^2", "x*y*z", "2*z^2 - 1"}};
  for (const auto& cs : cases) {
    auto s = r3_recipe(recipe(cs[0], cs[1], cs[2]));
    auto r = verify_3d_conditions(*s.pi, *s.N, s.phi, *s.volume, s.lambda, s.Z, plan(3), 1e-8);
    EXPECT_TRUE(passes(r)) << cs[0];
    EXPECT_TRUE(passes(verify_pqn(*s.pi, *s.N, *s.phi, plan(3), 1e-8))) << cs[0];
  }
}

TEST(Recipe, ExplicitBAgreesWithIntegration) {
  Chart c = testutil::xyz();
  RecipeInput in = recipe("z*y^2", "x", "0");
  in.b = parse("y^3/3 - y + exp(x*z)", c);
  auto explicit_b = r3_recipe(in);
  EXPECT_TRUE(passes(verify_pqn(*explicit_b.pi, *explicit_b.N, *explicit_b.phi, plan(3), 1e-8)));
  in.b = parse("y^3/3 - y", c);
  auto with_b = r3_recipe(in);
  auto integrated = r3_recipe(recipe("z*y^2", "x", "0"));
  EXPECT_TRUE(check_identity("N", *with_b.N, *integrated.N, plan(3), 1e-12).passed());
  in.b = parse("y", c);
  EXPECT_THROW(r3_recipe(in), CatalogError);
}

TEST(Recipe, RejectsBadInputs) {
  EXPECT_THROW(r3_recipe(recipe("z*exp(y)", "0", "0")), CatalogError);
  EXPECT_THROW(r3_recipe(recipe("z", "0", "x")), CatalogError);
  EXPECT_NO_THROW(r3_recipe(recipe("exp(x)*z", "sin(z)*x", "0")));
}

TEST(Antiderivative, PolynomialInOneVariable) {
  Chart c = testutil::xyz();
  const Expr e = parse("3*y^2*exp(x) - (y - z)^3 / (2 + x^2) + sin(z)", c);
  const Expr f = antiderivative_polynomial(e, 1);
  testutil::expect_equal_at_samples(derive(f, 1), e, 3, 1e-12);
  EXPECT_THROW(antiderivative_polynomial(parse("1/y", c), 1), CatalogError);
  EXPECT_THROW(antiderivative_polynomial(parse("sqrt(1 + y^2)", c), 1), CatalogError);
}

TEST(LocalDeformation, Pair) {
  Chart c = testutil::xyz();
  const RecipeInput in = recipe("z/2", "x/2", "z");
  auto lp = prop_local_pair(in);
  const std::vector<double> p{0.3, -0.7, 0.45};
  EXPECT_DOUBLE_EQ(ev(lp.Omega.get({0, 1}), p), -0.225);
  EXPECT_DOUBLE_EQ(ev(lp.Omega.get({0, 2}), p), 0.0);
  EXPECT_DOUBLE_EQ(ev(lp.Omega.get({1, 2}), p), 0.15);
  EXPECT_DOUBLE_EQ(ev(lp.N1(2, 2), p), 0.45);
  EXPECT_TRUE(check_zero("d", d(lp.Omega), plan(3), 1e-12).passed());
  auto s = prop_local(in);
  EXPECT_TRUE(passes(verify_pn(*s.pi, lp.N1, plan(3), 1e-8)));
  auto target = r3_recipe(in);
  EXPECT_TRUE(check_identity("N", deformed_endomorphism(*s.pi, lp.N1, lp.Omega), *target.N, plan(3), 1e-12).passed());
  // Other recipe data: d Omega vanishes because lambda_z = a_x + b_y.
  for (auto other : {recipe("z*y^2 + x", "x^2*y", "z^2"), recipe("z", "y", "0")}) {
    auto o = prop_local_pair(other);
    EXPECT_TRUE(check_zero("d", d(o.Omega), plan(3), 1e-12).passed());
    auto t = r3_recipe(other);
    auto def = deform_3d(*s.pi, o.N1, KForm(3, 3), o.Omega, plan(3), 1e-8);
    EXPECT_TRUE(check_identity("N", def.N, *t.N, plan(3), 1e-12).passed());
    EXPECT_TRUE(check_identity("phi", def.phi, *t.phi, plan(3), 1e-10).passed());
  }
}

TEST(MagriVeselov, Data) {
  auto s = magri_veselov();
  EXPECT_FALSE(s.pi.has_value());
  Chart c = testutil::xyz();
  const Endomorphism n = testutil::endo(c, {{"0", "0", "-y/2"}, {"2", "0", "-z"}, {"0", "2", "0"}});
  EXPECT_TRUE(check_identity("N", *s.N, n, plan(3), 0).passed());
  const Endomorphism n2 = testutil::endo(c, {{"0", "-y", "0"}, {"0", "-2*z", "-y"}, {"4", "0", "-2*z"}});
  EXPECT_TRUE(check_identity("N2", s.chain[2], n2, plan(3), 1e-14).passed());

  const TorsionEvaluator t = nijenhuis(*s.N);
  const VectorField minus_dx = Expr(-1.0) * VectorField::basis(3, 0);
  const VectorField minus_dy = Expr(-1.0) * VectorField::basis(3, 1);
  EXPECT_TRUE(check_identity("Txz", t.on_basis(0, 2), minus_dx, plan(3), 1e-10).passed());
  EXPECT_TRUE(check_identity("Tyz", t.on_basis(1, 2), minus_dy, plan(3), 1e-10).passed());
  const TorsionEvaluator t2 = nijenhuis(s.chain[2]);
  EXPECT_TRUE(check_identity("T2xy", t2.on_basis(0, 1), Expr(-8.0) * VectorField::basis(3, 1), plan(3), 1e-10).passed());
  EXPECT_TRUE(check_identity("T2xz", t2.on_basis(0, 2), Expr(-8.0) * VectorField::basis(3, 2), plan(3), 1e-10).passed());
}
