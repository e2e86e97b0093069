#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pqn/calculus.hpp"
#include "pqn/expr.hpp"
#include "pqn/fields.hpp"

namespace pqn {

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
};

/// splitmix64 generator.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();

 private:
  std::uint64_t state_;
};

/// Deterministic seeded point set in a coordinate box.
class SamplePlan {
 public:
  /// resample_limit defaults to count.
  SamplePlan(std::vector<Interval> box, std::size_t count, std::uint64_t seed,
             std::optional<std::size_t> resample_limit = std::nullopt);
  static SamplePlan uniform(std::size_t dim, Interval iv, std::size_t count, std::uint64_t seed);

  [[nodiscard]] std::size_t dim() const noexcept { return box_.size(); }
  [[nodiscard]] std::size_t count() const noexcept { return count_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::size_t resample_limit() const noexcept { return resample_limit_; }
  [[nodiscard]] const std::vector<Interval>& box() const noexcept { return box_; }

  /// The first count() points of the stream.
  [[nodiscard]] std::vector<Point> points() const;

 private:
  std::vector<Interval> box_;
  std::size_t count_;
  std::uint64_t seed_;
  std::size_t resample_limit_;
};

/// Endless stream of plan points; point j uses outputs j*dim .. j*dim+dim-1.
class PointStream {
 public:
  explicit PointStream(const SamplePlan& plan) : plan_(&plan), rng_(plan.seed()) {}
  Point next();

 private:
  const SamplePlan* plan_;
  SplitMix64 rng_;
};

/// Tensor of any supported kind flattened to keyed scalar components.
struct Field {
  enum class Kind { Scalar, Vector, Form, Multivector, Endomorphism, List };

  Kind kind = Kind::Scalar;
  std::size_t degree = 0;
  std::map<std::vector<int>, Expr> comps;

  Field() = default;
  Field(const Expr& e);                 // NOLINT(google-explicit-constructor)
  Field(const VectorField& v);          // NOLINT(google-explicit-constructor)
  Field(const KForm& f);                // NOLINT(google-explicit-constructor)
  Field(const Multivector& m);          // NOLINT(google-explicit-constructor)
  Field(const Endomorphism& n);         // NOLINT(google-explicit-constructor)
  static Field list(const std::vector<Expr>& items);
  /// Concatenation of same-kind fields, keyed by (part index, original key).
  static Field stack(const std::vector<Field>& parts);
  /// Zero of the same kind and degree.
  [[nodiscard]] Field zero_like() const;
};

struct CheckReport {
  enum class Status { Pass, Fail, Skipped };

  std::string name;
  Status status = Status::Skipped;
  double max_scaled_residual = 0.0;
  Point worst_point;
  std::size_t samples_used = 0;
  double tol = 0.0;
  std::string detail;
  /// Reported but excluded from the overall verdict.
  bool informational = false;

  [[nodiscard]] bool passed() const noexcept { return status == Status::Pass; }
  [[nodiscard]] bool failed() const noexcept { return status == Status::Fail; }
};

const char* to_string(CheckReport::Status s);

CheckReport skipped(const std::string& name, double tol, const std::string& detail);
CheckReport trivially_passed(const std::string& name, double tol, const std::string& detail);

/// Sampled comparison of two fields of the same kind and degree. Throws
/// std::invalid_argument on a kind mismatch.
CheckReport check_identity(const std::string& name, const Field& lhs, const Field& rhs, const SamplePlan& plan,
                           double tol);
CheckReport check_zero(const std::string& name, const Field& f, const SamplePlan& plan, double tol);

/// Bundle of the objects a verifier may consume.
struct Structure {
  std::string name;
  Chart chart;
  std::optional<VolumeForm> volume;
  std::optional<Bivector> pi;
  std::optional<Endomorphism> N;
  std::optional<KForm> phi;
  std::optional<Expr> lambda;
  std::optional<VectorField> Z;
  std::optional<KForm> theta;
  std::optional<KForm> Omega;
  std::vector<Endomorphism> chain;
};

struct Settings {
  double tol = 1e-8;
  unsigned kmax = 5;
};

using Reports = std::vector<CheckReport>;

Reports verify_poisson(const Bivector& pi, const std::optional<VolumeForm>& v, const SamplePlan& plan, double tol);
Reports verify_pn(const Bivector& pi, const Endomorphism& n, const SamplePlan& plan, double tol,
                  const std::string& prefix = "pn");
Reports verify_pqn(const Bivector& pi, const Endomorphism& n, const KForm& phi, const SamplePlan& plan, double tol,
                   const std::string& prefix = "pqn");

/// lambda and Z with N = lambda I + Z (x) xi, recovered symbolically from N
/// and xi; exact whenever N has that form.
struct Decomposition {
  Expr lambda;
  VectorField Z;
};
Decomposition recover_decomposition(const Endomorphism& n, const KForm& xi);

Reports verify_3d_conditions(const Bivector& pi, const Endomorphism& n, const std::optional<KForm>& phi,
                             const VolumeForm& v, const std::optional<Expr>& lambda,
                             const std::optional<VectorField>& z, const SamplePlan& plan, double tol);

class DecompositionError : public std::runtime_error {
 public:
  DecompositionError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  [[nodiscard]] double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

struct PointDecomposition {
  double lambda = 0.0;
  std::vector<double> Z;
  double residual = 0.0;
};
/// Pointwise split N = lambda I + Z (x) xi at p. Throws std::domain_error if
/// xi vanishes at p and DecompositionError if the residual exceeds tol.
PointDecomposition decompose_3d(const Endomorphism& n, const KForm& xi, const Point& p, double tol = 1e-8);

Reports verify_haantjes_structure(const Endomorphism& n, const KForm& theta, const SamplePlan& plan, double tol,
                                  const std::string& prefix = "haantjes");
/// n is the structure's N if known (checked against chain[1]).
Reports verify_lm_chain(const std::vector<Endomorphism>& chain, const KForm& theta,
                        const std::optional<Endomorphism>& n, const SamplePlan& plan, double tol);

struct RecursionResult {
  Reports reports;
  /// table[i][j] = max scaled residual of {I_{i+1}, I_{j+1}}.
  std::vector<std::vector<double>> table;
  std::vector<std::vector<bool>> table_pass;
};
RecursionResult verify_recursion_involutivity(const Bivector& pi, const Endomorphism& n, unsigned kmax,
                                              const SamplePlan& plan, double tol);

Reports verify_theo_inv(const Bivector& pi, const Endomorphism& n, const KForm& phi, const KForm& omega,
                        unsigned pmax, const SamplePlan& plan, double tol);

struct Deformation {
  Endomorphism N;
  KForm phi;
  Reports reports;
  /// +1 or -1 when the sign of the g d_z Omega_12 term was determined, 0 otherwise.
  int sign = 0;
};
/// N + pi# Omega-flat in any dimension.
Endomorphism deformed_endomorphism(const Bivector& pi, const Endomorphism& n, const KForm& omega);
/// (1/2)[Omega, Omega]_pi for pi = d_x ^ d_y in three dimensions.
KForm half_bracket_canonical_3d(const KForm& omega);
/// Throws std::invalid_argument unless dim is 3 and pi is exactly d_x ^ d_y.
Deformation deform_3d(const Bivector& pi, const Endomorphism& n, const KForm& phi, const KForm& omega,
                      const SamplePlan& plan, double tol);

CheckReport verify_minpoly(const Endomorphism& n, const Expr& lambda, const VectorField& z, const KForm& xi,
                           const SamplePlan& plan, double tol);

Reports run_identity_battery(const Structure& s, const SamplePlan& plan, double tol);

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"poisson", "pn",     "pqn",     "3d",      "haantjes", "chain",
                                              "recursion", "minpoly", "theoinv", "battery", "deform"};
  return names;
}

struct SuiteResult {
  Reports reports;
  std::optional<RecursionResult> recursion;
};

/// Runs the named suites on a structure. Unknown names throw
/// std::invalid_argument; suites whose members are absent report skipped.
SuiteResult run_suites(const Structure& s, const std::vector<std::string>& suites, const SamplePlan& plan,
                       const Settings& settings);

}  // namespace pqn
