// Python bindings for the main operations. Shapes and run configurations
// cross the boundary as JSON text; the package wrapper serialises dicts.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pivotality/bernoulli.hpp"
#include "pivotality/crofton.hpp"
#include "pivotality/errors.hpp"
#include "pivotality/identities.hpp"
#include "pivotality/perturbation.hpp"
#include "pivotality/runner.hpp"
#include "pivotality/stable.hpp"
#include "pivotality/statistics.hpp"

namespace py = pybind11;
using namespace pivotality;
namespace rn = pivotality::runner;

namespace {

StableParams stable_params(double alpha, const std::string& law, double theta, std::size_t dim) {
  if (law == "positive") return StableParams(alpha, SpectralMeasure::positive(theta));
  if (law == "symmetric") return StableParams(alpha, SpectralMeasure::symmetric_line(theta));
  if (law == "axes") return StableParams(alpha, SpectralMeasure::symmetric_axes(dim, theta));
  throw DomainError("law must be 'positive', 'symmetric' or 'axes'");
}

py::dict identity_dict(const IdentityCheck& c) {
  py::dict d;
  d["lhs"] = c.lhs;
  d["rhs"] = c.rhs;
  d["rhs_truncated"] = c.rhs_truncated;
  d["residual"] = c.residual();
  return d;
}

py::dict mc_dict(const McIdentityCheck& c) {
  py::dict d;
  d["lhs"] = c.lhs.mean;
  d["lhs_stderr"] = c.lhs.std_error;
  d["rhs"] = c.rhs.mean;
  d["rhs_stderr"] = c.rhs.std_error;
  d["residual"] = c.residual.mean;
  d["residual_stderr"] = c.residual.std_error;
  d["z"] = c.z();
  d["bandwidth"] = c.bandwidth;
  return d;
}

py::dict crofton_dict(const CroftonReport& r) {
  py::dict d;
  d["lhs"] = r.lhs_fd;
  d["lhs_stderr"] = r.lhs_stderr;
  d["rhs"] = r.rhs;
  d["rhs_stderr"] = r.rhs_stderr;
  d["z"] = r.z;
  d["nodes"] = r.nodes;
  return d;
}

py::dict row_dict(const rn::CheckRow& r) {
  py::dict d;
  d["suite"] = r.suite;
  d["check_id"] = r.check_id;
  d["param_json"] = r.params.dump();
  d["lhs"] = r.lhs;
  d["rhs"] = r.rhs;
  d["lhs_stderr"] = r.lhs_stderr;
  d["rhs_stderr"] = r.rhs_stderr;
  d["z_or_gap"] = r.z_or_gap;
  d["threshold"] = r.threshold;
  d["rule"] = rn::rule_name(r.rule);
  d["pass"] = r.pass;
  return d;
}

Statistic crofton_statistic(const std::string& name) {
  if (name == "count") return statistics::count();
  if (name == "nonempty") return statistics::count_at_least(1);
  if (name == "constant") return statistics::constant(1.0);
  throw DomainError("statistic must be 'count', 'nonempty' or 'constant'");
}

}  // namespace

PYBIND11_MODULE(_pivotality, m) {
  m.doc() = "Pivotal-point identities, stable laws and Crofton derivative checks";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<rn::ConfigError>(m, "ConfigError", PyExc_ValueError);

  // Bernoulli events
  py::class_<BooleanEvent>(m, "BooleanEvent")
      .def_static("at_least", &events::at_least, py::arg("m"), py::arg("k"))
      .def_static("all_ones", &events::all_ones, py::arg("m"))
      .def_static("parity", &events::parity, py::arg("m"))
      .def_static("monotone_dnf", &events::monotone_dnf, py::arg("m"), py::arg("clauses"))
      .def_static(
          "from_table",
          [](int mm, std::vector<bool> table) {
            if (mm < 1 || mm > 20 || table.size() != (std::size_t{1} << mm)) {
              throw DomainError("from_table: need 2^m entries, 1 <= m <= 20");
            }
            return BooleanEvent{mm, [table](Outcome x) { return static_cast<bool>(table[x]); }, false, "table"};
          },
          py::arg("m"), py::arg("table"))
      .def_readonly("m", &BooleanEvent::m)
      .def_readonly("name", &BooleanEvent::name)
      .def("contains", &BooleanEvent::contains)
      .def("probability", [](const BooleanEvent& A, double t) { return event_probability(A, t); })
      .def("russo_derivative", [](const BooleanEvent& A, double t) { return russo_derivative(A, t); })
      .def("pivotal_counts",
           [](const BooleanEvent& A, Outcome x) {
             const auto c = pivotal_counts(A, x);
             return py::make_tuple(c.plus, c.minus);
           })
      .def("monomial_coefficients",
           [](const BooleanEvent& A) { return enumerate_event(A).monomial_coefficients(); });

  m.def(
      "binomial_identity",
      [](int n, int k, double p) {
        const auto r = identity_report_binomial(n, k, p);
        return py::dict(py::arg("tail") = r.tail, py::arg("integral") = r.integral, py::arg("gap") = r.gap());
      },
      py::arg("n"), py::arg("k"), py::arg("p"));
  m.def(
      "negbin_identity",
      [](int r, int k, double p) {
        const auto x = identity_report_negbin(r, k, p);
        return py::dict(py::arg("event_probability") = x.event_probability, py::arg("integral") = x.integral,
                        py::arg("nb_sum_below_k") = x.nb_sum_below_k,
                        py::arg("nb_sum_through_k") = x.nb_sum_through_k);
      },
      py::arg("r"), py::arg("k"), py::arg("p"));
  m.def("poisson_tail", &poisson_tail, py::arg("theta"), py::arg("k"));
  m.def("poisson_tail_integral", &poisson_tail_integral, py::arg("theta"), py::arg("k"), py::arg("tol") = 1e-13);
  m.def(
      "erlang_cdf",
      [](int n, double theta, double x) {
        const auto e = erlang_cdf(n, theta, x);
        return py::make_tuple(e.direct, e.via_integral, e.via_poisson);
      },
      py::arg("n"), py::arg("theta"), py::arg("x"));
  m.def(
      "cpois_pmf",
      [](double theta, std::vector<double> q, int k, const std::string& method) {
        const LatticeDistribution Q(std::move(q));
        if (method == "panjer") return cpois_pmf_panjer(theta, Q, k);
        if (method == "direct") return cpois_pmf_direct(theta, Q, k);
        if (method == "polyrec") return cpois_pmf_polyrec(theta, Q, k);
        throw DomainError("method must be 'panjer', 'direct' or 'polyrec'");
      },
      py::arg("theta"), py::arg("q"), py::arg("k"), py::arg("method") = "panjer");
  m.def(
      "cpois_cdf_ode_residual",
      [](double theta, std::vector<double> q, double x, double delta) {
        return cpois_cdf_ode_residual(theta, LatticeDistribution(std::move(q)), x, delta).residual();
      },
      py::arg("theta"), py::arg("q"), py::arg("x"), py::arg("delta") = 1e-3);

  // Poisson derivative on the unit square, B = [0, corner]^2
  m.def(
      "poisson_void_derivative",
      [](double theta, double corner, std::size_t reps, std::uint64_t seed) {
        const IntensityMeasure lambda(Region::box(Box{{0, 0}, {1, 1}}), Density::uniform(), 1.0);
        const auto d = derivative_location_estimator(statistics::void_indicator(Region::box(Box{{0, 0}, {corner, corner}})),
                                                     lambda, theta, reps, RngStream(seed, 0));
        return py::make_tuple(d.total.estimate, d.total.std_error);
      },
      py::arg("theta"), py::arg("corner"), py::arg("reps"), py::arg("seed"));

  // stable laws
  m.def(
      "sample_stable",
      [](double alpha, const std::string& law, double theta, std::size_t n, std::uint64_t seed, std::size_t dim) {
        const StableSampler sampler(stable_params(alpha, law, theta, dim));
        auto xs = sampler.sample_many(n, RngStream(seed, 0));
        const auto d = static_cast<py::ssize_t>(sampler.params().dim());
        py::array_t<double> out({static_cast<py::ssize_t>(n), d});
        std::copy(xs.begin(), xs.end(), out.mutable_data());
        return out;
      },
      py::arg("alpha"), py::arg("law"), py::arg("theta"), py::arg("n"), py::arg("seed"), py::arg("dim") = 2);
  m.def("levy_half_cdf", &levy_half_cdf, py::arg("theta"), py::arg("x"));
  m.def("levy_half_pdf", &levy_half_pdf, py::arg("theta"), py::arg("x"));
  m.def("cauchy_scale", &cauchy_scale, py::arg("theta"));
  m.def(
      "dimone_closed_form", [](double theta, double x) { return identity_dict(dimone_closed_form(theta, x)); },
      py::arg("theta"), py::arg("x"));
  m.def(
      "alphadens1_closed_form", [](double theta, double x) { return identity_dict(alphadens1_closed_form(theta, x)); },
      py::arg("theta"), py::arg("x"));
  m.def(
      "radvec_residual",
      [](double alpha, const std::string& law, double theta, double r, std::size_t reps, std::uint64_t seed,
         std::size_t dim) {
        return mc_dict(radvec_residual(stable_params(alpha, law, theta, dim), r, reps, RngStream(seed, 0)));
      },
      py::arg("alpha"), py::arg("law"), py::arg("theta"), py::arg("r"), py::arg("reps"), py::arg("seed"),
      py::arg("dim") = 2);
  m.def(
      "stability_ks",
      [](double alpha, const std::string& law, double theta, double t, std::size_t n, std::uint64_t seed) {
        const auto k = stability_ks(stable_params(alpha, law, theta, 2), t, n, RngStream(seed, 0));
        return py::make_tuple(k.statistic, k.p_value);
      },
      py::arg("alpha"), py::arg("law"), py::arg("theta"), py::arg("t"), py::arg("n"), py::arg("seed"));

  // Crofton checks; shape is JSON text as in the runner config
  m.def(
      "parallel_volume",
      [](const std::string& shape, double t) { return rn::parse_shape(nlohmann::json::parse(shape)).parallel_volume(t); },
      py::arg("shape"), py::arg("t"));
  m.def(
      "crofton_poisson",
      [](const std::string& statistic, const std::string& shape, const std::string& h, double t, std::size_t reps,
         std::uint64_t seed) {
        const auto K = rn::parse_shape(nlohmann::json::parse(shape));
        CroftonOptions o;
        o.reps = reps;
        return crofton_dict(
            crofton_poisson_check(crofton_statistic(statistic), K, rn::parse_density(h, K, t + 0.25), t, o, RngStream(seed, 0)));
      },
      py::arg("statistic"), py::arg("shape"), py::arg("h"), py::arg("t"), py::arg("reps"), py::arg("seed"));

  // runner
  m.def("csv_header", &rn::csv_header);
  m.def("known_suites", &rn::known_suites);
  m.def(
      "run_suite",
      [](const std::string& config, const std::string& suite) {
        const auto c = rn::parse_config(nlohmann::json::parse(config), std::nullopt, {suite});
        py::list rows;
        for (const auto& r : rn::run_suite(suite, c)) rows.append(row_dict(r));
        return rows;
      },
      py::arg("config"), py::arg("suite"));
  m.def(
      "execute",
      [](const std::string& config, const std::string& out) {
        const auto r = rn::execute(rn::parse_config(nlohmann::json::parse(config)), out);
        return py::make_tuple(r.directory.string(), r.all_pass);
      },
      py::arg("config"), py::arg("out"));
}
