// Command-line front end of the check runner. Exit codes: 0 when every
// check passes, 1 when any fails, 2 on usage or configuration errors.

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "pivotality/errors.hpp"
#include "pivotality/runner.hpp"

namespace rn = pivotality::runner;

int main(int argc, char** argv) {
  CLI::App app{"Pivotality identity and derivative checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out = "runs";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> suites;

  const auto common = [&](CLI::App* sub, bool with_suites) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", out, "Directory receiving run-NNNN result directories")->capture_default_str();
    sub->add_option("--seed", seed, "Master seed (overrides the config)");
    if (with_suites) sub->add_option("--suite", suites, "Suite to run (repeatable; overrides the config)");
  };

  std::vector<std::pair<CLI::App*, std::vector<std::string>>> fixed;
  for (const auto& name : rn::known_suites()) {
    auto* sub = app.add_subcommand(name, "Run the " + name + " suite");
    common(sub, false);
    fixed.push_back({sub, {name}});
  }
  auto* all = app.add_subcommand("all", "Run every suite");
  common(all, false);
  fixed.push_back({all, rn::known_suites()});
  auto* run = app.add_subcommand("run", "Run the suites listed in the config (or --suite)");
  common(run, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::vector<std::string> selected = suites;
    for (const auto& [sub, names] : fixed) {
      if (sub->parsed()) selected = names;
    }
    if (run->parsed() && config_path.empty()) throw rn::ConfigError("run: --config is required");
    const auto config = config_path.empty() ? rn::parse_config(nlohmann::json::object(), seed, selected)
                                            : rn::load_config(config_path, seed, selected);
    const auto result = rn::execute(config, out, [](const std::string& suite, const auto& rows, double seconds) {
      std::size_t failed = 0;
      for (const auto& r : rows) {
        if (!r.pass) {
          ++failed;
          std::fprintf(stderr, "  FAIL %s %s: z_or_gap=%.6g threshold=%.6g\n", suite.c_str(), r.check_id.c_str(),
                       r.z_or_gap, r.threshold);
        }
      }
      std::fprintf(stderr, "%-20s %3zu checks, %zu failed (%.1f s)\n", suite.c_str(), rows.size(), failed, seconds);
    });
    std::printf("%s\n", result.directory.string().c_str());
    return result.all_pass ? 0 : 1;
  } catch (const rn::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const pivotality::DomainError& e) {
    std::fprintf(stderr, "invalid parameters: %s\n", e.what());
    return 2;
  }
}
