#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pivotality/crofton.hpp"
#include "pivotality/point_process.hpp"

namespace pivotality::runner {

/// Usage or configuration problem; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// How a row's z_or_gap is compared against its threshold.
enum class Rule {
  gap_at_most,     ///< |lhs - rhs| <= threshold
  z_at_most,       ///< |z| <= threshold
  p_above,         ///< p-value > threshold
  gap_above,       ///< |lhs - rhs| > threshold (a discrepancy being demonstrated)
  within_budget,   ///< |lhs - rhs| <= threshold, threshold = bound + z·stderr
};
const char* rule_name(Rule rule);

struct CheckRow {
  std::string suite;
  std::string check_id;
  nlohmann::json params = nlohmann::json::object();
  double lhs = 0.0;
  double rhs = 0.0;
  double lhs_stderr = 0.0;
  double rhs_stderr = 0.0;
  double z_or_gap = 0.0;
  double threshold = 0.0;
  Rule rule = Rule::gap_at_most;
  bool pass = false;
};

struct Tolerances {
  double exact = 1e-10;
  double cpois = 1e-12;
  double ode = 1e-5;
  double z = 4.0;
  double ks_p = 0.01;
  double ecdf = 0.02;
  double stable_quad = 1e-3;
  double levy = 1e-7;
  double steiner = 1e-5;
};

struct IdentitiesParams {
  std::vector<std::array<double, 3>> binomial{{10, 3, 0.3}, {30, 15, 0.5}, {30, 1, 0.9}};  ///< n, k, p
  std::vector<std::array<double, 3>> negbin{{1, 1, 0.5}, {5, 7, 0.3}, {10, 10, 0.6}};      ///< r, k, p
  std::vector<std::array<double, 2>> poisson{{2.0, 3}, {20.0, 30}};                         ///< θ, k
  std::vector<std::array<double, 3>> erlang{{3, 1.5, 2.0}, {30, 20.0, 1.0}};                ///< n, θ, x
  int cpois_lattices = 3;
  int cpois_kmax = 50;
  int ode_cases = 3;
  double ode_delta = 1e-3;
};

struct RussoParams {
  int dnf_events = 10;
  int table_events = 10;
  int m_max = 12;
  std::vector<double> thetas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
};

struct PoissonDerivativeParams {
  std::size_t reps = 0;  ///< 0: the run's reps
  double theta = 1.5;
  double corner = 0.5;   ///< B = [0, corner]^2 inside the unit square
  std::vector<double> series_thetas{0.25, 0.5, 1.0};
  int kmax = 6;
};

struct StableSuiteParams {
  std::size_t reps = 0;  ///< Monte Carlo dimone replicates; 0: the run's reps
  std::size_t ecdf_samples = 10000;
  std::vector<double> quad_points{0.5, 1.0, 2.0, 5.0};
  std::size_t ks_samples = 10000;
  std::vector<double> stability_t{0.5};
  double scaling_factor = 2.5;
  std::vector<double> homogeneity_c{0.5, 2.0, 4.0};
  std::size_t radvec_samples = 0;  ///< 0: the run's reps
  double radvec_r = 1.0;
};

struct CroftonSuiteParams {
  nlohmann::json shape = {{"kind", "disk"}, {"center", {0.0, 0.0}}, {"radius", 1.0}};
  std::string h = "const:1";
  double t = 0.5;
  std::size_t m = 10;
  std::size_t reps = 0;      ///< 0: the run's reps
  std::size_t rhs_reps = 0;  ///< boundary-side replicates; 0: reps/10 (at least 1000)
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t reps = 100000;
  std::size_t workers = 1;
  Tolerances tol;
  std::vector<std::string> suites;
  IdentitiesParams identities;
  RussoParams russo;
  PoissonDerivativeParams poisson_derivative;
  StableSuiteParams stable;
  CroftonSuiteParams crofton;
  /// Effective configuration (defaults filled in), written next to the results.
  nlohmann::json resolved;
};

const std::vector<std::string>& known_suites();
/// Stream index of a suite's RngStream(seed, ·); see docs/seed_derivation.md.
std::uint64_t suite_stream(const std::string& suite);

/// Validates `config` strictly: unknown keys, unknown suites, reps = 0, a
/// missing seed, an empty suite list and malformed shapes are ConfigErrors.
/// `seed` and `suites` (when non-empty) override the file.
RunConfig parse_config(const nlohmann::json& config, std::optional<std::uint64_t> seed = std::nullopt,
                       const std::vector<std::string>& suites = {});
RunConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed = std::nullopt,
                      const std::vector<std::string>& suites = {});

/// Shape block → convex body; throws ConfigError when malformed.
ConvexBody parse_shape(const nlohmann::json& shape);
/// "const:c" or "affine:a,b,c" (h(x) = a + b x_1 + c x_2); the supremum is
/// taken over the bounding box of K_{t_max}.
Density parse_density(const std::string& spec, const ConvexBody& K, double t_max);

/// Effective boundary-side replicate count of the crofton suite.
std::size_t crofton_rhs_reps(const RunConfig& config);

std::vector<CheckRow> run_suite(const std::string& suite, const RunConfig& config);

std::string csv_header();
std::string csv_line(const CheckRow& row);
std::string to_csv(const std::vector<CheckRow>& rows);

struct RunResult {
  std::filesystem::path directory;
  std::vector<CheckRow> rows;
  bool all_pass = true;
};

/// Runs the configured suites in order into a fresh `out/run-NNNN`
/// directory (existing runs are never touched): config.json, results.csv,
/// summary.json.
using SuiteCallback = std::function<void(const std::string& suite, const std::vector<CheckRow>& rows, double seconds)>;
RunResult execute(const RunConfig& config, const std::filesystem::path& out, const SuiteCallback& on_suite = {});

}  // namespace pivotality::runner
