#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"

using namespace pqn;
using testutil::ev;

TEST(Chart, RejectsBadNames) {
  EXPECT_THROW(Chart({"x", "x"}), std::invalid_argument);
  EXPECT_THROW(Chart({"1x"}), std::invalid_argument);
  EXPECT_THROW(Chart({"exp"}), std::invalid_argument);
  EXPECT_THROW(Chart(std::vector<std::string>{}), std::invalid_argument);
  Chart c({"p1", "q_2"});
  EXPECT_EQ(c.dim(), 2u);
  EXPECT_EQ(*c.index_of("q_2"), 1u);
  EXPECT_FALSE(c.index_of("z").has_value());
}

TEST(Parse, ProductPlusExp) {
  Chart c = testutil::xyz();
  Expr e = parse("x*y + exp(z)", c);
  ASSERT_EQ(e.op(), Op::Add);
  ASSERT_EQ(e.lhs().op(), Op::Mul);
  EXPECT_EQ(e.lhs().lhs().op(), Op::Coord);
  EXPECT_EQ(e.lhs().lhs().index(), 0u);
  EXPECT_EQ(e.lhs().rhs().index(), 1u);
  ASSERT_EQ(e.rhs().op(), Op::Exp);
  EXPECT_EQ(e.rhs().arg().index(), 2u);
}

TEST(Parse, IdentifierLookup) {
  Chart c({"p1", "p2", "q1", "q2"});
  Expr e = parse("q1-q2", c);
  ASSERT_EQ(e.op(), Op::Sub);
  EXPECT_EQ(e.lhs().index(), 2u);
  EXPECT_EQ(e.rhs().index(), 3u);
}

TEST(Parse, Errors) {
  Chart c = testutil::xyz();
  try {
    parse("x^-1", c);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::Syntax);
    EXPECT_EQ(e.offset(), 2u);
  }
  try {
    parse("x + w", c);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::UnknownIdentifier);
    EXPECT_EQ(e.offset(), 4u);
  }
  try {
    parse("1.2.3", c);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::MalformedNumber);
  }
  EXPECT_THROW(parse("1e", c), ParseError);
  EXPECT_THROW(parse("x^2.5", c), ParseError);
  EXPECT_THROW(parse("(x", c), ParseError);
  EXPECT_THROW(parse("exp x", c), ParseError);
  EXPECT_THROW(parse("", c), ParseError);
  EXPECT_THROW(parse("x y", c), ParseError);
}

TEST(Parse, PrecedenceAndWhitespace) {
  Chart c = testutil::xyz();
  std::vector<double> p{2, 3, 5};
  EXPECT_DOUBLE_EQ(ev("-x^2", c, p), -4);
  EXPECT_DOUBLE_EQ(ev(" 1 - 2 - 3 ", c, p), -4);
  EXPECT_DOUBLE_EQ(ev("x / y / z", c, p), 2.0 / 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(ev("2*x^3", c, p), 16);
  EXPECT_DOUBLE_EQ(ev("(x+y)^2", c, p), 25);
  EXPECT_DOUBLE_EQ(ev("1.5e1 + 2.5e-1*4", c, p), 16);
}

TEST(Derive, Rules) {
  Chart c = testutil::xyz();
  Expr d = derive(parse("x*y", c), 0);
  EXPECT_EQ(d.op(), Op::Coord);
  EXPECT_EQ(d.index(), 1u);

  Chart t({"p1", "p2", "q1", "q2"});
  Expr e = derive(parse("exp(q1-q2)", t), 3);
  ASSERT_EQ(e.op(), Op::Neg);
  ASSERT_EQ(e.arg().op(), Op::Exp);
  EXPECT_EQ(e.arg().arg().op(), Op::Sub);

  EXPECT_DOUBLE_EQ(ev(derive(parse("x^3", c), 0), {2, 0, 0}), 12);
}

TEST(Evaluate, Values) {
  Chart c = testutil::xyz();
  EXPECT_DOUBLE_EQ(ev("x*y+1", c, {2, 3, 0}), 7);
  EXPECT_FALSE(evaluate(parse("1/x", c), std::vector<double>{0, 0, 0}).has_value());
  EXPECT_FALSE(evaluate(parse("log(x)", c), std::vector<double>{-1, 0, 0}).has_value());
  EXPECT_FALSE(evaluate(parse("sqrt(x)", c), std::vector<double>{-1, 0, 0}).has_value());
  Chart t({"p1", "p2", "q1", "q2"});
  EXPECT_DOUBLE_EQ(ev("exp(q1-q2)", t, {0, 0, 0, 0}), 1);
}

TEST(Derive, MatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  const double h = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    Expr e = testutil::random_polynomial(rng, 3, 5, 3);
    for (const auto& p : testutil::sample_points(3, 5, 100 + trial)) {
      for (std::size_t i = 0; i < 3; ++i) {
        auto pp = p, pm = p;
        pp[i] += h;
        pm[i] -= h;
        const double fd = (ev(e, pp) - ev(e, pm)) / (2 * h);
        const double sym = ev(derive(e, i), p);
        EXPECT_LE(std::fabs(sym - fd), 1e-6 * (1 + std::fabs(sym)));
      }
    }
  }
}

TEST(Derive, TranscendentalMatchesFiniteDifferences) {
  Chart c = testutil::xyz();
  Expr e = parse("sin(x*y) * exp(z) + log(2 + x^2) - cos(y) / sqrt(3 + z) + (x - y)^4", c);
  const double h = 1e-5;
  for (const auto& p : testutil::sample_points(3, 10, 3)) {
    for (std::size_t i = 0; i < 3; ++i) {
      auto pp = p, pm = p;
      pp[i] += h;
      pm[i] -= h;
      const double fd = (ev(e, pp) - ev(e, pm)) / (2 * h);
      const double sym = ev(derive(e, i), p);
      EXPECT_NEAR(sym, fd, 1e-6 * (1 + std::fabs(sym)));
    }
  }
}

TEST(Derive, MixedPartialsCommute) {
  Chart c = testutil::xyz();
  Expr e = parse("exp(x*y) * sin(z) + x^3*y/(2 + z^2)", c);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      testutil::expect_equal_at_samples(derive(derive(e, i), j), derive(derive(e, j), i), 3, 1e-9, 5, 100);
    }
  }
}

TEST(Print, RoundTrip) {
  Chart c = testutil::xyz();
  std::mt19937_64 rng(3);
  std::vector<Expr> cases{
      parse("-x^2", c),
      parse("(-x)^2", c),
      parse("x - (y - z)", c),
      parse("x / (y * z)", c),
      parse("-(x + y) * -z", c),
      parse("exp(-x) - -3", c),
      Expr(-2.5) * Expr::coord(0),
      pow(Expr(-2.0) + Expr::coord(1), 3),
      Expr(1e-300) + Expr(0.1),
      Expr::coord(0) - Expr(-1.0) * Expr::coord(1),
  };
  for (int i = 0; i < 30; ++i) cases.push_back(testutil::random_polynomial(rng, 3, 4, 3));
  cases.push_back(derive(parse("sin(x*y) * exp(z) / (1 + x^2)", c), 0));
  for (const auto& e : cases) {
    const std::string s = to_string(e, c);
    Expr back = parse(s, c);
    EXPECT_EQ(to_string(back, c), s);
    for (const auto& p : testutil::sample_points(3, 10, 9)) {
      EXPECT_EQ(ev(back, p), ev(e, p)) << s;
    }
  }
}

TEST(Folding, Identities) {
  Expr x = Expr::coord(0);
  EXPECT_TRUE((x * Expr(0.0)).is_zero());
  EXPECT_EQ((x * Expr(1.0)).node(), x.node());
  EXPECT_EQ((x + Expr(0.0)).node(), x.node());
  EXPECT_TRUE((Expr(2.0) * Expr(3.0)).is_constant());
  EXPECT_DOUBLE_EQ((Expr(2.0) * Expr(3.0)).value(), 6);
  EXPECT_TRUE(pow(x, 0).is_one());
  EXPECT_FALSE((Expr(1.0) / Expr(0.0)).is_constant());
}

TEST(Tape, MatchesTreeEvaluation) {
  Chart c = testutil::xyz();
  std::vector<Expr> outs{parse("x*y + exp(z)", c), parse("(x*y + exp(z))^2", c), parse("1/x", c), Expr(3.0)};
  Tape tape(outs);
  EXPECT_EQ(tape.outputs(), 4u);
  std::vector<double> scratch, out(4);
  for (const auto& p : testutil::sample_points(3, 10, 1, 0.5, 1.5)) {
    ASSERT_TRUE(tape.evaluate(p, out, scratch));
    for (std::size_t i = 0; i < outs.size(); ++i) EXPECT_EQ(out[i], ev(outs[i], p));
  }
  std::vector<double> zero{0, 1, 1};
  EXPECT_FALSE(tape.evaluate(zero, out, scratch));
}

TEST(DependsOn, Coordinates) {
  Chart c = testutil::xyz();
  Expr e = parse("x*exp(z)", c);
  EXPECT_TRUE(depends_on(e, 0));
  EXPECT_FALSE(depends_on(e, 1));
  EXPECT_TRUE(depends_on(e, 2));
}
