#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqn/verify.hpp"

namespace pqn {

/// Malformed structure file. line and column are 1-based; 0 when unknown.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& what, std::size_t line = 0, std::size_t column = 0);
  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Structure file (JSON):
///   {"name": str, "chart": {"dim": n, "coords": [..]}, "volume": {"coeff": expr},
///    "bivector" | "endomorphism" | "threeform" | "theta" | "omega" | "Z": {"components": {"i,j": expr}},
///    "lambda": expr, "chain": [{"components": {...}}, ...]}
/// Indices are 1-based; endomorphism "i,j" is the d_i coefficient of N(d_j);
/// form and bivector keys are strictly increasing. A member is present iff
/// its key is.
Structure parse_structure(const std::string& text);
std::string write_structure(const Structure& s);

std::uint64_t fnv1a64(const std::string& bytes);

struct RunMetadata {
  std::string command = "verify";
  std::string structure;
  std::string input_digest;
  std::uint64_t seed = 42;
  std::size_t samples = 64;
  std::vector<Interval> box;
  double tol = 1e-8;
  unsigned kmax = 5;
  std::vector<std::string> suites;
};

/// True iff no non-informational check failed.
bool verdict(const Reports& reports);

/// JSON report with schema_version, metadata, summary, checks sorted by name
/// and, when present, the involutivity table. Numbers use 17 significant digits.
std::string write_report(const RunMetadata& meta, const Reports& reports,
                         const std::optional<RecursionResult>& table);

/// Parses "lo:hi" (applied to every coordinate) or "lo:hi,lo:hi,..." (one per coordinate).
std::vector<Interval> parse_box(const std::string& spec, std::size_t dim);

}  // namespace pqn
