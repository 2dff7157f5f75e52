#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "rieszheat/cli.hpp"
#include "rieszheat/errors.hpp"
#include "rieszheat/parallel.hpp"

namespace cli = rieszheat::cli;

const std::map<std::string, std::string> kSummaries{
    {"kernel-check", "heat-kernel estimate ratios and power-law slopes"},
    {"noise-check", "empirical lag covariance of the lattice noise against the spectral sum"},
    {"simulate", "one sample path; writes field dumps and snapshot statistics"},
    {"exponent", "Monte Carlo Holder exponents in space and time"},
    {"eigen-check", "smallest eigenvalue of the increment covariance over Delta"},
    {"density-check", "Gaussian joint density against the two-point envelope"},
    {"capacity", "Riesz / log capacity of a compact set"},
    {"hitting", "hitting probabilities and the capacity lower bound"},
};

int main(int argc, char** argv) {
  CLI::App app{"rieszheat: stochastic heat equation with Riesz-correlated noise"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI file; [subcommand] sections, command-line flags override it");
  std::string out_dir = "runs";
  int threads = rieszheat::default_worker_count();
  app.add_option("--out", out_dir, "output root")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (default RIESZHEAT_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  std::map<std::string, std::map<std::string, std::string>> values;
  for (const auto& name : cli::subcommands()) {
    CLI::App* sub = app.add_subcommand(name, kSummaries.at(name));
    for (const auto& spec : cli::options_for(name)) {
      auto* opt = sub->add_option("--" + spec.key, values[name][spec.key], spec.help);
      if (!spec.default_value.empty()) opt->default_str(spec.default_value);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  cli::Config config;
  for (const auto& spec : cli::options_for(name)) {
    if (chosen->get_option("--" + spec.key)->count() > 0) config[spec.key] = values[name][spec.key];
  }

  try {
    const cli::RunOutcome outcome = cli::run(name, config, threads);
    const std::string dir = cli::write_outputs(outcome, out_dir, name);
    for (const auto& v : outcome.report.at("verdicts")) {
      std::cout << (v.at("pass").get<bool>() ? "PASS " : "FAIL ") << v.at("name").get<std::string>() << ": "
                << v.at("detail").get<std::string>() << '\n';
    }
    std::cout << outcome.report.at("status").get<std::string>() << ' ' << dir << '\n';
    return outcome.exit_code;
  } catch (const rieszheat::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const rieszheat::DomainError& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
