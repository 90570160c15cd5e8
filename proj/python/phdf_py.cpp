#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "phdf/error.hpp"
#include "phdf/estimate.hpp"
#include "phdf/phantom.hpp"
#include "phdf/rates.hpp"

namespace py = pybind11;
using namespace phdf;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

EstimateOptions options(bool exact, unsigned workers) { return {exact, workers}; }

}  // namespace

PYBIND11_MODULE(_phdf, m) {
  m.doc() = "Phantom distribution functions for maxima of stationary sequences";

  // messages carry the kind tag, e.g. "invalid-spec: ..."
  py::register_exception<Error>(m, "PhdfError", PyExc_RuntimeError);

  py::class_<DistFn>(m, "Law")
      .def("cdf", &DistFn::cdf)
      .def("sf", &DistFn::sf)
      .def("log_cdf", &DistFn::log_cdf)
      .def("atom_mass", &DistFn::atom_mass)
      .def("quantile", &DistFn::quantile)
      .def("isf", &DistFn::isf)
      .def("pow_n", &DistFn::pow_n, py::arg("x"), py::arg("n"))
      .def_property_readonly("right_end", &DistFn::right_end)
      .def_property_readonly("left_end", &DistFn::left_end)
      .def("__repr__", &DistFn::describe);
  m.def("parse_law", [](const std::string& text) { return parse_law(text); });

  py::class_<PhantomDistFn>(m, "Phantom")
      .def("g", &PhantomDistFn::g)
      .def("cdf", &PhantomDistFn::cdf)
      .def("sf", &PhantomDistFn::sf)
      .def("pow_n", &PhantomDistFn::pow_n, py::arg("x"), py::arg("n"))
      .def("serialize", &PhantomDistFn::serialize)
      .def_static("deserialize", &PhantomDistFn::deserialize)
      .def("as_law", &PhantomDistFn::as_distfn);
  m.def(
      "continuous_phantom",
      [](double gamma, const std::vector<double>& levels) {
        return build_continuous_phantom(DrivingSequence::from_levels(gamma, levels));
      },
      py::arg("gamma"), py::arg("levels"));
  m.def(
      "rule_phantom",
      [](double gamma, const std::string& rule, std::uint64_t prefix) {
        return build_continuous_phantom(DrivingSequence::from_rule(gamma, level_rule(rule), prefix));
      },
      py::arg("gamma"), py::arg("rule"), py::arg("prefix"));

  py::class_<ProcessSpec>(m, "Process")
      .def_property_readonly("burn_in", [](const ProcessSpec& s) { return s.burn_in; })
      .def("__repr__", &ProcessSpec::describe);
  m.def("parse_process", [](const std::string& text) { return parse_process(text); });
  m.def(
      "generate",
      [](const ProcessSpec& spec, std::uint64_t seed, std::uint64_t length) {
        const SamplePath p = generate(spec, seed, length);
        py::dict d;
        d["values"] = to_array(p.values);
        d["regeneration_marks"] = p.regeneration_marks;
        d["burn_in"] = p.burn_in;
        d["mixture_component"] = p.mixture_component;
        return d;
      },
      py::arg("spec"), py::arg("seed"), py::arg("length"));
  m.def(
      "running_maxima",
      [](const ProcessSpec& spec, std::uint64_t seed, const std::vector<std::uint64_t>& at) {
        return to_array(running_maxima(spec, seed, at));
      },
      py::arg("spec"), py::arg("seed"), py::arg("at"));
  m.def("exact_max_cdf", &exact_max_cdf, py::arg("spec"), py::arg("n"), py::arg("x"));
  m.def("exact_max_quantile", &exact_max_quantile, py::arg("spec"), py::arg("n"), py::arg("gamma"));

  m.def(
      "estimate_driving_sequence",
      [](const ProcessSpec& spec, double gamma, const std::vector<std::uint64_t>& n, std::size_t replicas,
         std::uint64_t seed, bool exact, unsigned workers) {
        const auto e = estimate_driving_sequence(spec, gamma, n, replicas, seed, options(exact, workers));
        py::dict d;
        d["method"] = e.method;
        d["n"] = e.n;
        d["v_hat"] = e.v_hat;
        d["ci_lo"] = e.ci_lo;
        d["ci_hi"] = e.ci_hi;
        d["p_at_v"] = e.p_at_v;
        return d;
      },
      py::arg("spec"), py::arg("gamma"), py::arg("n"), py::arg("replicas") = 1000, py::arg("seed") = 1,
      py::arg("exact") = false, py::arg("workers") = 1);
  m.def(
      "estimate_theta",
      [](const ProcessSpec& spec, double gamma, const std::vector<std::uint64_t>& n, std::size_t replicas,
         std::uint64_t seed, bool exact, unsigned workers) {
        const auto t = estimate_theta_single_sequence(spec, gamma, n, replicas, seed, options(exact, workers));
        py::dict d;
        d["verdict"] = t.verdict;
        d["theta_hat"] = t.theta_hat;
        d["theta_se"] = t.theta_se;
        std::vector<double> n_tail;
        for (const auto& r : t.rows) n_tail.push_back(r.n_tail);
        d["n_tail"] = n_tail;
        return d;
      },
      py::arg("spec"), py::arg("gamma"), py::arg("n"), py::arg("replicas") = 1000, py::arg("seed") = 1,
      py::arg("exact") = false, py::arg("workers") = 1);

  m.def(
      "threshold_beta",
      [](const std::string& kind, double b) { return threshold_beta(parse_dependence_kind(kind), b); },
      py::arg("kind"), py::arg("b"));
  m.def(
      "check_rate_sufficiency",
      [](const std::string& kind, double beta, double b) {
        const auto v = check_rate_sufficiency(parse_dependence_kind(kind), beta, b);
        py::dict d;
        d["kind"] = std::string(to_string(v.kind));
        d["threshold"] = v.threshold;
        d["sufficient"] = v.sufficient;
        d["margin"] = v.margin;
        d["note"] = v.note;
        return d;
      },
      py::arg("kind"), py::arg("beta"), py::arg("b"));
}
