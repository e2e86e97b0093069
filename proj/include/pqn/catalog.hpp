#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqn/verify.hpp"

namespace pqn {

/// Bad builder parameters (n too small, non-polynomial integrand, ...).
class CatalogError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inputs of the 3D recipe on the chart (x, y, z).
struct RecipeInput {
  Expr lambda;
  Expr a;
  /// Must depend on z only.
  Expr g;
  /// Explicit antiderivative in y of lambda_z - a_x; integrated when absent.
  std::optional<Expr> b;
};

/// Antiderivative in coordinate `index` of an expression polynomial in it.
/// Throws CatalogError otherwise.
Expr antiderivative_polynomial(const Expr& e, std::size_t index);

/// Chart (p1..pn, q1..qn), canonical pi, the open-Toda PN operator, phi = 0.
Structure das_okubo(unsigned n);
/// Das-Okubo data with the closed-Toda operator, its 3-form and the 2-form
/// Omega = e^{qn-q1} dqn ^ dq1.
Structure closed_toda(unsigned n);
/// 3D structure N = lambda I + Z (x) dz on pi = d_x ^ d_y, V = dx ^ dy ^ dz,
/// theta = div(Z) dz and chain {I, N, N^2, N^3}.
Structure r3_recipe(const RecipeInput& in);

struct LocalPair {
  Endomorphism N1;
  KForm Omega;
};
LocalPair prop_local_pair(const RecipeInput& in);
/// pi, V, N = N1, phi = 0 and Omega of prop_local_pair.
Structure prop_local(const RecipeInput& in);

/// N, theta = dz and chain {I, N, N^2}; no pi.
Structure magri_veselov();

/// Catalog names in canonical order.
const std::vector<std::string>& catalog_names();

/// Builds a catalog entry from string parameters: n for das-okubo and
/// closed-toda; lambda (or the Greek letter), a, g, b for r3-recipe and
/// prop-local (a and g default to 0); none for magri-veselov. The result is
/// named "<name> key=value ...". Throws CatalogError on any bad name or value.
Structure catalog_entry(const std::string& name, const std::map<std::string, std::string>& params);

}  // namespace pqn
