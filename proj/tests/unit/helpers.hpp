#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pqn/calculus.hpp"
#include "pqn/expr.hpp"
#include "pqn/fields.hpp"

namespace testutil {

using namespace pqn;

inline Chart xyz() { return Chart({"x", "y", "z"}); }

inline std::vector<std::vector<double>> sample_points(std::size_t dim, std::size_t count, unsigned seed,
                                                      double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
  for (auto& p : pts) {
    for (auto& c : p) c = u(rng);
  }
  return pts;
}

inline double ev(const Expr& e, const std::vector<double>& p) {
  auto v = evaluate(e, p);
  return v ? *v : NAN;
}

inline double ev(const std::string& text, const Chart& chart, const std::vector<double>& p) {
  return ev(parse(text, chart), p);
}

/// Random polynomial in `dim` variables with small integer coefficients.
inline Expr random_polynomial(std::mt19937_64& rng, std::size_t dim, int terms = 4, int max_deg = 3) {
  std::uniform_int_distribution<int> coef(-3, 3);
  std::uniform_int_distribution<int> deg(0, max_deg);
  Expr s;
  for (int t = 0; t < terms; ++t) {
    Expr m(static_cast<double>(coef(rng)));
    for (std::size_t i = 0; i < dim; ++i) {
      const int k = deg(rng);
      if (k > 0) m = m * pow(Expr::coord(i), static_cast<unsigned>(k));
    }
    s += m;
  }
  return s;
}

inline VectorField random_vector_field(std::mt19937_64& rng, std::size_t dim, int terms = 3, int max_deg = 2) {
  VectorField v(dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = random_polynomial(rng, dim, terms, max_deg);
  return v;
}

inline KForm random_form(std::mt19937_64& rng, std::size_t dim, std::size_t degree) {
  KForm f(dim, degree);
  MultiIndex idx(degree);
  // enumerate increasing tuples
  std::vector<int> c(degree);
  for (std::size_t i = 0; i < degree; ++i) c[i] = static_cast<int>(i);
  while (true) {
    f.set(c, random_polynomial(rng, dim, 3, 2));
    int i = static_cast<int>(degree) - 1;
    while (i >= 0 && c[i] == static_cast<int>(dim - degree) + i) --i;
    if (i < 0) break;
    ++c[i];
    for (std::size_t j = i + 1; j < degree; ++j) c[j] = c[j - 1] + 1;
  }
  return f;
}

inline Endomorphism random_endomorphism(std::mt19937_64& rng, std::size_t dim, int terms = 2, int max_deg = 2) {
  Endomorphism n(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) n(i, j) = random_polynomial(rng, dim, terms, max_deg);
  }
  return n;
}

inline double max_abs_diff(const VectorField& a, const VectorField& b, const std::vector<double>& p) {
  double m = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::fabs(ev(a[i], p) - ev(b[i], p)));
  return m;
}

template <class T>
double max_abs_diff(const Alternating<T>& a, const Alternating<T>& b, const std::vector<double>& p) {
  double m = 0;
  for (const auto& [k, v] : a.components()) m = std::max(m, std::fabs(ev(v, p) - ev(b.get(k), p)));
  for (const auto& [k, v] : b.components()) m = std::max(m, std::fabs(ev(v, p) - ev(a.get(k), p)));
  return m;
}

inline double max_abs_diff(const Endomorphism& a, const Endomorphism& b, const std::vector<double>& p) {
  double m = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t j = 0; j < a.dim(); ++j) m = std::max(m, std::fabs(ev(a(i, j), p) - ev(b(i, j), p)));
  }
  return m;
}

template <class A>
void expect_equal_at_samples(const A& a, const A& b, std::size_t dim, double tol = 1e-9, unsigned seed = 7,
                             std::size_t count = 20) {
  for (const auto& p : sample_points(dim, count, seed)) {
    ASSERT_LE(max_abs_diff(a, b, p), tol);
  }
}

inline void expect_equal_at_samples(const Expr& a, const Expr& b, std::size_t dim, double tol = 1e-9,
                                    unsigned seed = 7, std::size_t count = 20) {
  for (const auto& p : sample_points(dim, count, seed)) {
    const double u = ev(a, p);
    const double v = ev(b, p);
    ASSERT_LE(std::fabs(u - v), tol * std::max(1.0, std::max(std::fabs(u), std::fabs(v))));
  }
}

inline VectorField vf(const Chart& c, std::initializer_list<const char*> comps) {
  VectorField v(c.dim());
  std::size_t i = 0;
  for (const char* s : comps) v[i++] = parse(s, c);
  return v;
}

inline Endomorphism endo(const Chart& c, std::initializer_list<std::initializer_list<const char*>> rows) {
  Endomorphism n(c.dim());
  std::size_t i = 0;
  for (const auto& row : rows) {
    std::size_t j = 0;
    for (const char* s : row) n(i, j++) = parse(s, c);
    ++i;
  }
  return n;
}

}  // namespace testutil
