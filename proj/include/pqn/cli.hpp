#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pqn {

struct VerifyOptions {
  std::vector<std::string> suites;  ///< empty means every suite
  std::uint64_t seed = 42;
  std::size_t samples = 64;
  double tol = 1e-8;
  std::string box = "-1:1";
  unsigned kmax = 5;
  std::optional<std::size_t> resample_limit;
  /// Emits the involutivity table and requires pi and N.
  bool table = false;
};

struct VerifyOutcome {
  std::string report;
  bool pass = false;
  std::vector<std::string> failed;  ///< failing check names; informational ones prefixed "note:"
};

/// Parses a structure file, runs the suites and renders the report.
/// Throws InputError for malformed files, boxes or unknown suites.
VerifyOutcome verify_document(const std::string& text, const VerifyOptions& opts);

/// Exit codes: 0 all checks pass, 1 a check failed, 2 input or parameter error.
///   pqn verify FILE|- [--suites a,b] [--seed] [--samples] [--tol] [--box] [--kmax] [--resample-limit] [--out]
///   pqn catalog NAME [key=value ...] [--out]
///   pqn table FILE|- [--kmax] [--seed] [--samples] [--tol] [--box] [--out]
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in);

}  // namespace pqn
