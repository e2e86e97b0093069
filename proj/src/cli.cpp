#include "pqn/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>

#include "pqn/catalog.hpp"
#include "pqn/io.hpp"

namespace pqn {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SamplingFlags {
  std::uint64_t seed = 42;
  std::size_t samples = 64;
  double tol = 1e-8;
  std::string box = "-1:1";
  unsigned kmax = 5;
  std::optional<std::size_t> resample_limit;
  std::string out;
};

void add_sampling_flags(CLI::App* cmd, SamplingFlags& f) {
  cmd->add_option("--seed", f.seed, "sampling seed")->capture_default_str();
  cmd->add_option("--samples", f.samples, "sample points per check")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--tol", f.tol, "pass threshold on the scaled residual")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--box", f.box, "lo:hi for every coordinate, or lo:hi,lo:hi,... per coordinate")->capture_default_str();
  cmd->add_option("--kmax", f.kmax, "largest trace invariant index")->capture_default_str()->check(CLI::Range(2u, 12u));
  cmd->add_option("--resample-limit", f.resample_limit, "non-finite points tolerated per check");
  cmd->add_option("--out", f.out, "output path (default stdout)");
}

std::string read_input(const std::string& path, std::istream& in) {
  if (path == "-") return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << text;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::string> split_suites(const std::string& spec) {
  if (spec == "all") return {};
  std::vector<std::string> r;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) r.push_back(item);
  if (r.empty()) throw UsageError("no suites given");
  return r;
}

int run_checks(const std::string& file, VerifyOptions opts, const SamplingFlags& f, std::ostream& out,
               std::ostream& err, std::istream& in) {
  opts.seed = f.seed;
  opts.samples = f.samples;
  opts.tol = f.tol;
  opts.box = f.box;
  opts.kmax = f.kmax;
  opts.resample_limit = f.resample_limit;
  const VerifyOutcome v = verify_document(read_input(file, in), opts);
  emit(v.report, f.out, out);
  for (const auto& name : v.failed) err << (name.rfind("note:", 0) == 0 ? "" : "FAIL: ") << name << "\n";
  return v.pass ? 0 : 1;
}

}  // namespace

VerifyOutcome verify_document(const std::string& text, const VerifyOptions& opts) {
  std::vector<std::string> suites;
  const auto& known = suite_names();
  for (const auto& name : opts.table ? std::vector<std::string>{"recursion"} : opts.suites) {
    if (std::find(known.begin(), known.end(), name) == known.end()) throw InputError("unknown suite '" + name + "'");
    if (std::find(suites.begin(), suites.end(), name) == suites.end()) suites.push_back(name);
  }
  if (suites.empty()) suites = known;

  const Structure s = parse_structure(text);
  if (opts.table && (!s.pi || !s.N)) throw InputError("table needs a bivector and an endomorphism");
  if (opts.samples == 0 || !(opts.tol > 0)) throw InputError("samples and tol must be positive");
  const SamplePlan plan(parse_box(opts.box, s.chart.dim()), opts.samples, opts.seed, opts.resample_limit);
  const SuiteResult result = run_suites(s, suites, plan, Settings{opts.tol, opts.kmax});

  RunMetadata meta;
  meta.command = opts.table ? "table" : "verify";
  meta.structure = s.name;
  meta.input_digest = "fnv1a64:" + hex(fnv1a64(text));
  meta.seed = opts.seed;
  meta.samples = opts.samples;
  meta.box = plan.box();
  meta.tol = opts.tol;
  meta.kmax = opts.kmax;
  meta.suites = suites;

  VerifyOutcome v;
  v.report = write_report(meta, result.reports, opts.table ? result.recursion : std::nullopt);
  v.pass = verdict(result.reports);
  for (const auto& r : result.reports) {
    if (r.failed()) v.failed.push_back((r.informational ? "note: " : "") + r.name);
  }
  return v;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in) {
  CLI::App app{"Poisson quasi-Nijenhuis and Haantjes identity checker", "pqn"};
  app.require_subcommand(1);

  SamplingFlags vf;
  std::string vfile;
  std::string suites = "all";
  auto* verify = app.add_subcommand("verify", "run verification suites on a structure file");
  verify->add_option("file", vfile, "structure file, or - for stdin")->required();
  verify->add_option("--suites", suites, "comma-separated suites, or all")->capture_default_str();
  add_sampling_flags(verify, vf);

  std::string cname;
  std::vector<std::string> cparams;
  std::string cout_path;
  auto* catalog = app.add_subcommand("catalog", "write a catalog structure file");
  catalog->add_option("name", cname, "catalog entry")->required();
  catalog->add_option("params", cparams, "key=value parameters");
  catalog->add_option("--out", cout_path, "output path (default stdout)");

  SamplingFlags tf;
  std::string tfile;
  auto* table = app.add_subcommand("table", "involutivity table of the trace invariants");
  table->add_option("file", tfile, "structure file, or - for stdin")->required();
  add_sampling_flags(table, tf);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    VerifyOptions opts;
    if (*verify) {
      opts.suites = split_suites(suites);
      return run_checks(vfile, opts, vf, out, err, in);
    }
    if (*table) {
      opts.table = true;
      return run_checks(tfile, opts, tf, out, err, in);
    }
    std::map<std::string, std::string> params;
    for (const auto& kv : cparams) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("parameter '" + kv + "' must be key=value");
      params[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    emit(write_structure(catalog_entry(cname, params)), cout_path, out);
    return 0;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
  } catch (const CatalogError& e) {
    err << "parameter error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return 2;
}

}  // namespace pqn
