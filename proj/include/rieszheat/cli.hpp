#ifndef RIESZHEAT_CLI_HPP
#define RIESZHEAT_CLI_HPP

// Experiment orchestration behind the `rieszheat` executable. A run takes a
// subcommand and a flat key -> value configuration (defaults filled in and
// validated here) and produces a JSON report plus CSV / binary artifacts.
// Reports never depend on the worker count.

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace rieszheat::cli {

inline constexpr int kSchemaVersion = 1;

using Config = std::map<std::string, std::string>;

struct OptionSpec {
  std::string key;
  std::string default_value;
  std::string help;
};

const std::vector<std::string>& subcommands();
/// Options accepted by a subcommand, common ones first.
const std::vector<OptionSpec>& options_for(const std::string& subcommand);

struct Artifact {
  std::string name;
  std::string content;
};

struct RunOutcome {
  int exit_code = 0;       // 0 when every gate passes, 1 otherwise
  nlohmann::json report;   // no timestamp; added by write_outputs
  std::vector<Artifact> files;
};

/// Throws ConfigError for unknown keys or unparsable values.
RunOutcome run(const std::string& subcommand, const Config& config, int threads);

/// git's blob object id: SHA-1 of "blob <size>\0" + content, lowercase hex.
std::string git_blob_sha1(const std::string& content);

/// Writes report.json and the artifacts under <out>/<subcommand>/<run id>,
/// where the run id is the first 12 hex digits of the input hash, suffixed
/// -2, -3, ... when that directory already exists. Returns the directory.
std::string write_outputs(const RunOutcome& outcome, const std::string& out_dir, const std::string& subcommand);

}  // namespace rieszheat::cli

#endif  // RIESZHEAT_CLI_HPP
