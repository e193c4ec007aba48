#include "pivotality/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pivotality/errors.hpp"

namespace pivotality::runner {

using nlohmann::json;
namespace fs = std::filesystem;

const char* rule_name(Rule rule) {
  switch (rule) {
    case Rule::gap_at_most: return "gap<=threshold";
    case Rule::z_at_most: return "|z|<=threshold";
    case Rule::p_above: return "p>threshold";
    case Rule::gap_above: return "gap>threshold";
    case Rule::within_budget: return "gap<=bound+z*stderr";
  }
  return "?";
}

std::size_t crofton_rhs_reps(const RunConfig& c) {
  const std::size_t reps = c.crofton.reps ? c.crofton.reps : c.reps;
  if (c.crofton.rhs_reps) return c.crofton.rhs_reps;
  return std::max<std::size_t>(reps / 10, std::min<std::size_t>(reps, 1000));
}

const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> names{"identities", "russo", "poisson-derivative", "stable", "crofton"};
  return names;
}

std::uint64_t suite_stream(const std::string& suite) {
  const auto& names = known_suites();
  const auto it = std::find(names.begin(), names.end(), suite);
  if (it == names.end()) throw ConfigError("unknown suite '" + suite + "'");
  return static_cast<std::uint64_t>(it - names.begin()) + 1;
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + ": not finite");
  return x;
}

std::uint64_t unsigned_int(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) throw ConfigError(where + ": must be non-negative");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw ConfigError(where + ": expected an integer");
}

void read(const json& obj, const char* key, double& out, const std::string& where) {
  if (obj.contains(key)) out = number(obj[key], where + "." + key);
}

void read_positive(const json& obj, const char* key, double& out, const std::string& where) {
  read(obj, key, out, where);
  if (!(out > 0.0)) throw ConfigError(where + "." + key + ": must be positive");
}

template <class Int>
void read_count(const json& obj, const char* key, Int& out, const std::string& where, bool allow_zero = false) {
  if (!obj.contains(key)) return;
  const auto v = unsigned_int(obj[key], where + "." + key);
  if (v == 0 && !allow_zero) throw ConfigError(where + "." + key + ": must be positive");
  if (v > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) {
    throw ConfigError(where + "." + key + ": too large");
  }
  out = static_cast<Int>(v);
}

void read_list(const json& obj, const char* key, std::vector<double>& out, const std::string& where) {
  if (!obj.contains(key)) return;
  const auto& v = obj[key];
  if (!v.is_array()) throw ConfigError(where + "." + key + ": expected an array");
  out.clear();
  for (const auto& x : v) out.push_back(number(x, where + "." + key));
}

template <std::size_t N>
void read_tuples(const json& obj, const char* key, std::vector<std::array<double, N>>& out, const std::string& where) {
  if (!obj.contains(key)) return;
  const auto& v = obj[key];
  const std::string w = where + "." + key;
  if (!v.is_array()) throw ConfigError(w + ": expected an array of " + std::to_string(N) + "-tuples");
  out.clear();
  for (const auto& t : v) {
    if (!t.is_array() || t.size() != N) throw ConfigError(w + ": expected " + std::to_string(N) + "-tuples");
    std::array<double, N> a{};
    for (std::size_t i = 0; i < N; ++i) a[i] = number(t[i], w);
    out.push_back(a);
  }
}

void require_int(double x, double lo, const std::string& where) {
  if (x != std::floor(x) || x < lo || x > 1e6) throw ConfigError(where + ": expected an integer >= " + std::to_string(int(lo)));
}

void require_probability(double p, const std::string& where) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(where + ": probability outside [0,1]");
}

void parse_identities(const json& b, IdentitiesParams& p) {
  const std::string w = "identities";
  check_keys(b, {"binomial", "negbin", "poisson", "erlang", "cpois_lattices", "cpois_kmax", "ode_cases", "ode_delta"}, w);
  read_tuples(b, "binomial", p.binomial, w);
  read_tuples(b, "negbin", p.negbin, w);
  read_tuples(b, "poisson", p.poisson, w);
  read_tuples(b, "erlang", p.erlang, w);
  read_count(b, "cpois_lattices", p.cpois_lattices, w, true);
  read_count(b, "cpois_kmax", p.cpois_kmax, w, true);
  read_count(b, "ode_cases", p.ode_cases, w, true);
  read_positive(b, "ode_delta", p.ode_delta, w);
  // lattice i and ODE case i draw from substreams i and 1000 + i
  if (p.cpois_lattices > 1000) throw ConfigError(w + ".cpois_lattices: at most 1000");
  for (const auto& [n, k, q] : p.binomial) {
    require_int(n, 1, w + ".binomial n");
    require_int(k, 1, w + ".binomial k");
    if (k > n) throw ConfigError(w + ".binomial: k > n");
    require_probability(q, w + ".binomial p");
  }
  for (const auto& [r, k, q] : p.negbin) {
    require_int(r, 1, w + ".negbin r");
    require_int(k, 1, w + ".negbin k");
    require_probability(q, w + ".negbin p");
  }
  for (const auto& [theta, k] : p.poisson) {
    if (!(theta >= 0.0)) throw ConfigError(w + ".poisson: θ must be >= 0");
    require_int(k, 1, w + ".poisson k");
  }
  for (const auto& [n, theta, x] : p.erlang) {
    require_int(n, 1, w + ".erlang n");
    if (!(theta > 0.0) || !(x >= 0.0)) throw ConfigError(w + ".erlang: need θ > 0 and x >= 0");
  }
}

void parse_russo(const json& b, RussoParams& p) {
  const std::string w = "russo";
  check_keys(b, {"dnf_events", "table_events", "m_max", "thetas"}, w);
  read_count(b, "dnf_events", p.dnf_events, w, true);
  read_count(b, "table_events", p.table_events, w, true);
  read_count(b, "m_max", p.m_max, w);
  read_list(b, "thetas", p.thetas, w);
  if (p.m_max < 2 || p.m_max > 16) throw ConfigError(w + ".m_max: must lie in 2..16");
  for (double t : p.thetas) require_probability(t, w + ".thetas");
}

void parse_poisson_derivative(const json& b, PoissonDerivativeParams& p) {
  const std::string w = "poisson-derivative";
  check_keys(b, {"reps", "theta", "corner", "series_thetas", "kmax"}, w);
  read_count(b, "reps", p.reps, w);
  read(b, "theta", p.theta, w);
  read_positive(b, "corner", p.corner, w);
  read_list(b, "series_thetas", p.series_thetas, w);
  read_count(b, "kmax", p.kmax, w);
  if (!(p.theta > 0.0)) throw ConfigError(w + ".theta: must be positive");
  if (p.corner > 1.0) throw ConfigError(w + ".corner: must be <= 1");
  for (double t : p.series_thetas) {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError(w + ".series_thetas: must lie in [0,1]");
  }
}

void parse_stable(const json& b, StableSuiteParams& p) {
  const std::string w = "stable";
  check_keys(b, {"reps", "ecdf_samples", "quad_points", "ks_samples", "stability_t", "scaling_factor", "homogeneity_c",
                 "radvec_samples", "radvec_r"},
             w);
  read_count(b, "reps", p.reps, w);
  read_count(b, "ecdf_samples", p.ecdf_samples, w);
  read_list(b, "quad_points", p.quad_points, w);
  read_count(b, "ks_samples", p.ks_samples, w);
  read_list(b, "stability_t", p.stability_t, w);
  read_positive(b, "scaling_factor", p.scaling_factor, w);
  read_list(b, "homogeneity_c", p.homogeneity_c, w);
  read_count(b, "radvec_samples", p.radvec_samples, w);
  read_positive(b, "radvec_r", p.radvec_r, w);
  for (double x : p.quad_points) {
    if (!(x > 0.0)) throw ConfigError(w + ".quad_points: must be positive");
  }
  // the KS rows take substreams 20, 21, ... below the radvec block at 1000
  if (p.stability_t.size() > 200) throw ConfigError(w + ".stability_t: at most 200 entries");
  for (double t : p.stability_t) {
    if (!(t > 0.0 && t < 1.0)) throw ConfigError(w + ".stability_t: must lie in (0,1)");
  }
  for (double c : p.homogeneity_c) {
    if (!(c > 0.0)) throw ConfigError(w + ".homogeneity_c: must be positive");
  }
}

void parse_crofton(const json& b, CroftonSuiteParams& p) {
  const std::string w = "crofton";
  check_keys(b, {"shape", "h", "t", "m", "reps", "rhs_reps"}, w);
  if (b.contains("shape")) p.shape = b["shape"];
  if (b.contains("h")) {
    if (!b["h"].is_string()) throw ConfigError(w + ".h: expected a string");
    p.h = b["h"].get<std::string>();
  }
  read(b, "t", p.t, w);
  read_count(b, "m", p.m, w);
  read_count(b, "reps", p.reps, w);
  read_count(b, "rhs_reps", p.rhs_reps, w);
  if (p.rhs_reps == 1) throw ConfigError(w + ".rhs_reps: need at least 2");
  if (!(p.t >= 0.0)) throw ConfigError(w + ".t: must be >= 0");
  const ConvexBody K = parse_shape(p.shape);
  parse_density(p.h, K, p.t + 0.25);
}

json resolved_json(const RunConfig& c) {
  const auto& tol = c.tol;
  json j;
  j["seed"] = c.seed;
  j["reps"] = c.reps;
  j["workers"] = c.workers;
  j["suites"] = c.suites;
  j["tolerances"] = {{"exact", tol.exact}, {"cpois", tol.cpois}, {"ode", tol.ode}, {"z", tol.z},
                     {"ks_p", tol.ks_p}, {"ecdf", tol.ecdf}, {"stable_quad", tol.stable_quad},
                     {"levy", tol.levy}, {"steiner", tol.steiner}};
  const auto& i = c.identities;
  j["identities"] = {{"binomial", i.binomial}, {"negbin", i.negbin}, {"poisson", i.poisson}, {"erlang", i.erlang},
                     {"cpois_lattices", i.cpois_lattices}, {"cpois_kmax", i.cpois_kmax},
                     {"ode_cases", i.ode_cases}, {"ode_delta", i.ode_delta}};
  const auto& r = c.russo;
  j["russo"] = {{"dnf_events", r.dnf_events}, {"table_events", r.table_events}, {"m_max", r.m_max},
                {"thetas", r.thetas}};
  const auto& pd = c.poisson_derivative;
  j["poisson-derivative"] = {{"reps", pd.reps ? pd.reps : c.reps}, {"theta", pd.theta}, {"corner", pd.corner},
                             {"series_thetas", pd.series_thetas}, {"kmax", pd.kmax}};
  const auto& s = c.stable;
  j["stable"] = {{"reps", s.reps ? s.reps : c.reps}, {"ecdf_samples", s.ecdf_samples}, {"quad_points", s.quad_points},
                 {"ks_samples", s.ks_samples}, {"stability_t", s.stability_t},
                 {"scaling_factor", s.scaling_factor}, {"homogeneity_c", s.homogeneity_c},
                 {"radvec_samples", s.radvec_samples ? s.radvec_samples : c.reps}, {"radvec_r", s.radvec_r}};
  const auto& cr = c.crofton;
  j["crofton"] = {{"shape", cr.shape}, {"h", cr.h}, {"t", cr.t}, {"m", cr.m}, {"reps", cr.reps ? cr.reps : c.reps}, {"rhs_reps", crofton_rhs_reps(c)}};
  return j;
}

std::vector<double> coords(const json& v, std::size_t lo, std::size_t hi, const std::string& where) {
  if (!v.is_array() || v.size() < lo || v.size() > hi) {
    throw ConfigError("malformed shape: " + where + " must be an array of " + std::to_string(lo) +
                      (lo == hi ? "" : "-" + std::to_string(hi)) + " numbers");
  }
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError("malformed shape: " + where + " must contain numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Vec2 point2(const json& v, const std::string& where) {
  const auto c = coords(v, 2, 2, where);
  return {c[0], c[1]};
}

}  // namespace

ConvexBody parse_shape(const json& shape) {
  if (!shape.is_object() || !shape.contains("kind") || !shape["kind"].is_string()) {
    throw ConfigError("malformed shape: expected an object with a string 'kind'");
  }
  const auto kind = shape["kind"].get<std::string>();
  const auto need = [&](const char* key) -> const json& {
    if (!shape.contains(key)) throw ConfigError("malformed shape: " + kind + " needs '" + key + "'");
    return shape[key];
  };
  try {
    if (kind == "disk" || kind == "ball") {
      check_keys(shape, {"kind", "center", "radius"}, "malformed shape");
      const auto& r = need("radius");
      if (!r.is_number()) throw ConfigError("malformed shape: radius must be a number");
      return ConvexBody::disk(coords(need("center"), 2, 3, "center"), r.get<double>());
    }
    if (kind == "box") {
      check_keys(shape, {"kind", "lo", "hi"}, "malformed shape");
      return ConvexBody::box(coords(need("lo"), 2, 3, "lo"), coords(need("hi"), 2, 3, "hi"));
    }
    if (kind == "polygon") {
      check_keys(shape, {"kind", "vertices"}, "malformed shape");
      const auto& v = need("vertices");
      if (!v.is_array()) throw ConfigError("malformed shape: vertices must be an array");
      std::vector<Vec2> pts;
      for (const auto& p : v) pts.push_back(point2(p, "vertex"));
      return ConvexBody::polygon(std::move(pts));
    }
    if (kind == "segment") {
      check_keys(shape, {"kind", "a", "b"}, "malformed shape");
      return ConvexBody::segment(point2(need("a"), "a"), point2(need("b"), "b"));
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("malformed shape: ") + e.what());
  }
  throw ConfigError("malformed shape: unknown kind '" + kind + "'");
}

Density parse_density(const std::string& spec, const ConvexBody& K, double t_max) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError("h: expected 'const:c' or 'affine:a,b,c'");
  const auto kind = spec.substr(0, colon);
  std::vector<double> values;
  std::stringstream in(spec.substr(colon + 1));
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v)) throw ConfigError("h: bad number '" + item + "'");
    values.push_back(v);
  }
  if (kind == "const") {
    if (values.size() != 1 || !(values[0] > 0.0)) throw ConfigError("h: 'const:c' needs one positive c");
    return Density::uniform(values[0]);
  }
  if (kind == "affine") {
    if (K.dim() != 2) throw ConfigError("h: affine densities are planar only");
    if (values.size() != 3) throw ConfigError("h: 'affine:a,b,c' needs three coefficients");
    const Box box = K.bounding_box(t_max);
    const double a = values[0], b = values[1], c = values[2];
    double lo = INFINITY, hi = -INFINITY;
    for (double x : {box.lo[0], box.hi[0]}) {
      for (double y : {box.lo[1], box.hi[1]}) {
        lo = std::min(lo, a + b * x + c * y);
        hi = std::max(hi, a + b * x + c * y);
      }
    }
    if (!(lo >= 0.0) || !(hi > 0.0)) throw ConfigError("h: affine density is negative near the body");
    return Density::custom([a, b, c](std::span<const double> x) { return a + b * x[0] + c * x[1]; }, hi);
  }
  throw ConfigError("h: unknown kind '" + kind + "'");
}

RunConfig parse_config(const json& config, std::optional<std::uint64_t> seed, const std::vector<std::string>& suites) {
  if (!config.is_object()) throw ConfigError("config: expected a JSON object");
  check_keys(config,
             {"seed", "reps", "workers", "tolerances", "suites", "identities", "russo", "poisson-derivative", "stable",
              "crofton"},
             "config");
  RunConfig c;
  if (seed) {
    c.seed = *seed;
  } else if (config.contains("seed")) {
    c.seed = unsigned_int(config["seed"], "seed");
  } else {
    throw ConfigError("config: seed missing (set \"seed\" or pass --seed)");
  }
  if (config.contains("reps") && unsigned_int(config["reps"], "reps") == 0) throw ConfigError("reps: must be positive");
  read_count(config, "reps", c.reps, "config");
  read_count(config, "workers", c.workers, "config");

  if (config.contains("tolerances")) {
    const auto& t = config["tolerances"];
    check_keys(t, {"exact", "cpois", "ode", "z", "ks_p", "ecdf", "stable_quad", "levy", "steiner"}, "tolerances");
    auto& tol = c.tol;
    for (auto [key, ptr] : std::initializer_list<std::pair<const char*, double*>>{
             {"exact", &tol.exact}, {"cpois", &tol.cpois}, {"ode", &tol.ode}, {"z", &tol.z}, {"ks_p", &tol.ks_p},
             {"ecdf", &tol.ecdf}, {"stable_quad", &tol.stable_quad}, {"levy", &tol.levy}, {"steiner", &tol.steiner}}) {
      read_positive(t, key, *ptr, "tolerances");
    }
  }

  if (!suites.empty()) {
    c.suites = suites;
  } else if (config.contains("suites")) {
    const auto& s = config["suites"];
    if (!s.is_array()) throw ConfigError("suites: expected an array of names");
    for (const auto& name : s) {
      if (!name.is_string()) throw ConfigError("suites: expected an array of names");
      c.suites.push_back(name.get<std::string>());
    }
  }
  if (c.suites.empty()) throw ConfigError("suites: nothing to run (empty suite list)");
  for (std::size_t i = 0; i < c.suites.size(); ++i) {
    suite_stream(c.suites[i]);
    if (std::find(c.suites.begin(), c.suites.begin() + static_cast<std::ptrdiff_t>(i), c.suites[i]) !=
        c.suites.begin() + static_cast<std::ptrdiff_t>(i)) {
      throw ConfigError("suites: '" + c.suites[i] + "' listed twice");
    }
  }

  const json empty = json::object();
  const auto block = [&](const char* key) -> const json& { return config.contains(key) ? config[key] : empty; };
  parse_identities(block("identities"), c.identities);
  parse_russo(block("russo"), c.russo);
  parse_poisson_derivative(block("poisson-derivative"), c.poisson_derivative);
  parse_stable(block("stable"), c.stable);
  parse_crofton(block("crofton"), c.crofton);
  c.resolved = resolved_json(c);
  return c;
}

RunConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed, const std::vector<std::string>& suites) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, false);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return parse_config(j, seed, suites);
}

// ---------------------------------------------------------------------------

namespace {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string csv_header() { return "suite,check_id,param_json,lhs,rhs,lhs_stderr,rhs_stderr,z_or_gap,threshold,pass"; }

std::string csv_line(const CheckRow& row) {
  json params = row.params;
  params["rule"] = rule_name(row.rule);
  std::string line = csv_field(row.suite) + "," + csv_field(row.check_id) + "," + csv_field(params.dump());
  for (double x : {row.lhs, row.rhs, row.lhs_stderr, row.rhs_stderr, row.z_or_gap, row.threshold}) {
    line += "," + format_double(x);
  }
  return line + (row.pass ? ",true" : ",false");
}

std::string to_csv(const std::vector<CheckRow>& rows) {
  std::string out = csv_header() + "\n";
  for (const auto& r : rows) out += csv_line(r) + "\n";
  return out;
}

RunResult execute(const RunConfig& config, const fs::path& out, const SuiteCallback& on_suite) {
  fs::create_directories(out);
  RunResult result;
  for (int n = 1;; ++n) {
    if (n > 999999) throw std::runtime_error("no free run directory under " + out.string());
    char name[32];
    std::snprintf(name, sizeof name, "run-%04d", n);
    if (fs::create_directory(out / name)) {
      result.directory = out / name;
      break;
    }
  }
  {
    std::ofstream cfg(result.directory / "config.json");
    cfg << config.resolved.dump(2) << "\n";
  }
  std::ofstream csv(result.directory / "results.csv", std::ios::binary);
  csv << csv_header() << "\n";
  json suites = json::array();
  std::size_t failed = 0;
  for (const auto& name : config.suites) {
    const auto start = std::chrono::steady_clock::now();
    auto rows = run_suite(name, config);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json failed_ids = json::array();
    for (const auto& r : rows) {
      csv << csv_line(r) << "\n";
      if (!r.pass) failed_ids.push_back(r.check_id);
    }
    csv.flush();
    failed += failed_ids.size();
    suites.push_back({{"suite", name},
                      {"checks", rows.size()},
                      {"passed", rows.size() - failed_ids.size()},
                      {"failed", failed_ids},
                      {"seconds", seconds}});
    if (on_suite) on_suite(name, rows, seconds);
    result.rows.insert(result.rows.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  }
  result.all_pass = failed == 0;
  json summary = {{"seed", config.seed},
                  {"checks", result.rows.size()},
                  {"failed", failed},
                  {"all_pass", result.all_pass},
                  {"suites", suites}};
  std::ofstream(result.directory / "summary.json") << summary.dump(2) << "\n";
  return result;
}

}  // namespace pivotality::runner
