#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rieszheat/cli.hpp"
#include "rieszheat/errors.hpp"

using namespace rieszheat;

TEST_CASE("git blob hash") {
  CHECK(cli::git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(cli::git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("options") {
  CHECK(cli::subcommands().size() == 8);
  for (const auto& s : cli::subcommands()) {
    const auto& opts = cli::options_for(s);
    REQUIRE(opts.size() >= 2);
    CHECK(opts[0].key == "seed");
  }
  CHECK_THROWS_AS(cli::options_for("nope"), ConfigError);
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(cli::run("capacity", {{"bogus", "1"}}, 1), ConfigError);
  CHECK_THROWS_AS(cli::run("capacity", {{"d", "two"}}, 1), ConfigError);
  CHECK_THROWS_AS(cli::run("capacity", {{"d", "2.5"}}, 1), ConfigError);
  CHECK_THROWS_AS(cli::run("capacity", {{"set", "torus"}}, 1), ConfigError);
  CHECK_THROWS_AS(cli::run("capacity", {{"set", "box"}}, 1), ConfigError);
  CHECK_THROWS_AS(cli::run("noise-check", {{"beta", "1.5"}}, 1), ConfigError);
  CHECK_THROWS_AS(cli::run("noise-check", {{"n", "100"}}, 1), ConfigError);
  CHECK_THROWS_AS(cli::run("hitting", {{"paths", "100"}}, 1), ConfigError);
  CHECK_THROWS_AS(cli::run("simulate", {{"coeffs", "cubic"}}, 1), ConfigError);
  CHECK_THROWS_AS(cli::run("capacity", {}, 0), ConfigError);
}

TEST_CASE("report contents") {
  const cli::RunOutcome r = cli::run("capacity", {{"index", "1"}, {"resolution", "6"}}, 1);
  CHECK(r.exit_code == 0);
  CHECK(r.report["schema_version"] == cli::kSchemaVersion);
  CHECK(r.report["config"]["index"] == "1");
  CHECK(r.report["config"]["set"] == "ball");
  CHECK(r.report["seed"] == 1);
  CHECK_FALSE(r.report.contains("timestamp"));
  CHECK(r.report["input_hash"] == cli::git_blob_sha1(r.report["config"].dump()));
  CHECK(r.report["results"]["capacity"].get<double>() > 0.5);
  REQUIRE(r.files.size() == 1);
  CHECK(r.files[0].name == "measure.csv");

  const cli::RunOutcome neg = cli::run("capacity", {}, 1);
  CHECK(neg.report["results"]["index"] == -1.0);
  CHECK(neg.report["results"]["capacity"] == 1.0);
}

TEST_CASE("gate failures give exit code 1") {
  const cli::RunOutcome r = cli::run("noise-check", {{"slices", "500"}, {"n", "64"}, {"lags", "0,1,2,4"}, {"max_z", "0"}}, 1);
  CHECK(r.exit_code == 1);
  CHECK(r.report["status"] == "FAIL");
}

TEST_CASE("payload does not depend on the thread count") {
  const cli::Config cfg{{"slices", "640"}, {"n", "64"}, {"lags", "0,3,8"}};
  const cli::RunOutcome a = cli::run("noise-check", cfg, 1);
  const cli::RunOutcome b = cli::run("noise-check", cfg, 4);
  CHECK(a.report.dump() == b.report.dump());
  CHECK(a.files[0].content == b.files[0].content);
}

TEST_CASE("outputs land under a content-addressed run id") {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "rieszheat_cli_test";
  fs::remove_all(root);
  const cli::RunOutcome r = cli::run("capacity", {{"resolution", "4"}}, 1);
  const fs::path first = cli::write_outputs(r, root.string(), "capacity");
  const fs::path second = cli::write_outputs(r, root.string(), "capacity");
  const std::string id = r.report["input_hash"].get<std::string>().substr(0, 12);
  CHECK(first.filename() == id);
  CHECK(second.filename() == id + "-2");
  CHECK(fs::exists(first / "report.json"));
  CHECK(fs::exists(first / "measure.csv"));
  std::ifstream in(first / "report.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j.contains("timestamp"));
  CHECK(j["run_id"] == id);
  fs::remove_all(root);
}
