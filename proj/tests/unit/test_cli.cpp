#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "pqn/catalog.hpp"
#include "pqn/cli.hpp"
#include "pqn/io.hpp"

using namespace pqn;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args, const std::string& stdin_text = "") {
  args.insert(args.begin(), "pqn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  std::istringstream in(stdin_text);
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err, in);
  return {code, out.str(), err.str()};
}

std::string catalog_file(std::vector<std::string> args) {
  args.insert(args.begin(), "catalog");
  CliRun r = run(args);
  EXPECT_EQ(r.code, 0) << r.err;
  return r.out;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("pqn_cli_test_" + name);
}

}  // namespace

TEST(CliCatalog, Writes) {
  const Structure s = parse_structure(catalog_file({"das-okubo", "n=3"}));
  EXPECT_EQ(s.chart.dim(), 6u);
  EXPECT_EQ(s.name, "das-okubo n=3");

  const Structure r = parse_structure(catalog_file({"r3-recipe", "\xce\xbb=z/2", "a=x/2", "g=z"}));
  const Chart c({"x", "y", "z"});
  const Structure expect = r3_recipe(RecipeInput{parse("z/2", c), parse("x/2", c), parse("z", c), std::nullopt});
  const SamplePlan plan = SamplePlan::uniform(3, {-1, 1}, 32, 1);
  EXPECT_TRUE(check_identity("N", *r.N, *expect.N, plan, 1e-14).passed());
  EXPECT_TRUE(check_identity("phi", *r.phi, *expect.phi, plan, 1e-14).passed());
  EXPECT_EQ(r.chain.size(), 4u);
}

TEST(CliCatalog, ParameterErrors) {
  EXPECT_EQ(run({"catalog", "closed-toda", "n=1"}).code, 2);
  EXPECT_EQ(run({"catalog", "closed-toda"}).code, 2);
  EXPECT_EQ(run({"catalog", "closed-toda", "n=two"}).code, 2);
  EXPECT_EQ(run({"catalog", "closed-toda", "m=3"}).code, 2);
  EXPECT_EQ(run({"catalog", "no-such"}).code, 2);
  EXPECT_EQ(run({"catalog", "r3-recipe", "lambda=z*exp(y)"}).code, 2);
  EXPECT_EQ(run({"catalog", "r3-recipe", "lambda=z+"}).code, 2);
  EXPECT_EQ(run({"catalog", "magri-veselov", "n=2"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(CliVerify, ClosedTodaPasses) {
  const CliRun r = run({"verify", "-", "--suites", "pqn,recursion"}, catalog_file({"closed-toda", "n=3"}));
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["summary"]["verdict"], "pass");
  EXPECT_EQ(j["metadata"]["seed"], 42);
  EXPECT_EQ(j["metadata"]["samples"], 64);
  EXPECT_EQ(j["metadata"]["box"].size(), 6u);
}

TEST(CliVerify, MagriVeselovChainFails) {
  const CliRun r = run({"verify", "-", "--suites", "chain"}, catalog_file({"magri-veselov"}));
  EXPECT_EQ(r.code, 1);
  const auto j = nlohmann::json::parse(r.out);
  std::vector<std::string> failed;
  for (const auto& c : j["checks"]) {
    if (c["status"] == "fail" && !c["informational"].get<bool>()) failed.push_back(c["name"]);
  }
  EXPECT_EQ(failed, std::vector<std::string>{"chain.C4.N2"});
}

TEST(CliVerify, InputErrors) {
  std::string text = catalog_file({"r3-recipe", "lambda=z", "a=y"});
  const auto pos = text.find("\"1,2\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 5, "\"1,1\"");
  CliRun r = run({"verify", "-"}, text);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("strictly increasing"), std::string::npos);
  EXPECT_NE(r.err.find("line"), std::string::npos);

  const std::string good = catalog_file({"magri-veselov"});
  EXPECT_EQ(run({"verify", "-"}, "{ not json").code, 2);
  EXPECT_EQ(run({"verify", "-", "--suites", "pqn,bogus"}, good).code, 2);
  EXPECT_EQ(run({"verify", "-", "--box", "0:1,0:1"}, good).code, 2);
  EXPECT_EQ(run({"verify", "-", "--samples", "0"}, good).code, 2);
  EXPECT_EQ(run({"verify", temp_path("missing.json").string()}).code, 2);
}

TEST(CliVerify, FileRoundTripReproducesInMemoryResults) {
  const Chart c({"x", "y", "z"});
  std::vector<std::pair<std::vector<std::string>, Structure>> cases;
  cases.push_back({{"closed-toda", "n=2"}, closed_toda(2)});
  cases.push_back({{"r3-recipe", "lambda=x*y + z^2", "a=x^2*z - y", "g=1 + z^3"},
                   r3_recipe(RecipeInput{parse("x*y + z^2", c), parse("x^2*z - y", c), parse("1 + z^3", c),
                                         std::nullopt})});
  cases.push_back({{"magri-veselov"}, magri_veselov()});
  cases.push_back({{"prop-local", "lambda=z/2", "a=x/2", "g=z"},
                   prop_local(RecipeInput{parse("z/2", c), parse("x/2", c), parse("z", c), std::nullopt})});
  for (const auto& [args, s] : cases) {
    const std::string text = catalog_file(args);
    const CliRun r = run({"verify", "-"}, text);
    ASSERT_NE(r.code, 2) << r.err;
    const SamplePlan plan = SamplePlan::uniform(s.chart.dim(), {-1, 1}, 64, 42);
    const SuiteResult mem = run_suites(s, suite_names(), plan, Settings{});
    EXPECT_EQ(r.code, verdict(mem.reports) ? 0 : 1) << args[0];
    const auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j["checks"].size(), mem.reports.size());
    std::map<std::string, const CheckReport*> by_name;
    for (const auto& m : mem.reports) by_name[m.name] = &m;
    for (const auto& chk : j["checks"]) {
      const CheckReport* m = by_name.at(chk["name"].get<std::string>());
      EXPECT_EQ(chk["status"], to_string(m->status)) << m->name;
      if (!chk["max_scaled_residual"].is_null()) {
        EXPECT_NEAR(chk["max_scaled_residual"].get<double>(), m->max_scaled_residual, 1e-12) << m->name;
      }
    }
  }
}

TEST(CliVerify, Deterministic) {
  const std::string text = catalog_file({"closed-toda", "n=3"});
  const auto path = temp_path("toda3.json");
  {
    std::ofstream f(path);
    f << text;
  }
  const auto out1 = temp_path("report1.json"), out2 = temp_path("report2.json");
  // pn.torsion fails: closed Toda is quasi-Nijenhuis only.
  EXPECT_EQ(run({"verify", path.string(), "--out", out1.string()}).code, 1);
  EXPECT_EQ(run({"verify", path.string(), "--out", out2.string()}).code, 1);
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
  };
  EXPECT_FALSE(slurp(out1).empty());
  EXPECT_EQ(slurp(out1), slurp(out2));
  const CliRun seeded = run({"verify", path.string(), "--seed", "7"});
  EXPECT_NE(seeded.out, slurp(out1));
  std::filesystem::remove(path);
  std::filesystem::remove(out1);
  std::filesystem::remove(out2);
}

TEST(CliTable, ClosedToda) {
  const CliRun r = run({"table", "-", "--kmax", "4"}, catalog_file({"closed-toda", "n=3"}));
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["table"]["kmax"], 4);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(j["table"]["residuals"][i][i], 0.0);
    for (int k = 0; k < 4; ++k) {
      EXPECT_LE(j["table"]["residuals"][i][k].get<double>(), 1e-8);
      EXPECT_EQ(j["table"]["residuals"][i][k], j["table"]["residuals"][k][i]);
    }
  }
  EXPECT_EQ(run({"table", "-"}, catalog_file({"magri-veselov"})).code, 2);
}
