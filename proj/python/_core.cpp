#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "psgla/diagnostics.hpp"
#include "psgla/experiments.hpp"
#include "psgla/harness.hpp"

namespace py = pybind11;
using namespace psgla;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }

SpacePoint matrix_point(const Array& m) {
  if (m.ndim() != 2 || m.shape(0) != m.shape(1)) throw DimensionError("expected a square matrix");
  const int d = static_cast<int>(m.shape(0));
  return SpacePoint::from_dense(d, std::span<const double>(m.data(), m.size()), 1e-12);
}

Array to_array(const SpacePoint& p) {
  if (!p.descriptor().is_matrix()) {
    Array out(static_cast<py::ssize_t>(p.size()));
    std::copy(p.coords().begin(), p.coords().end(), out.mutable_data());
    return out;
  }
  const DenseMatrix m = p.to_dense();
  const int d = m.size();
  Array out({d, d});
  auto* o = out.mutable_data();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) o[i * d + j] = m(i, j);
  return out;
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json py_to_json(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

RunConfig config_from(const py::dict& cfg) {
  try {
    return parse_run_config(py_to_json(cfg));
  } catch (const ConfigError& e) {
    throw py::value_error(e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = kArtifactVersion;

  m.def("prox_box", [](double gamma, const Array& x, const Array& lo, const Array& hi) {
        const auto l = to_vector(lo), h = to_vector(hi);
        return to_array(prox_box(gamma, SpacePoint::flat(to_vector(x)), l, h));
      }, py::arg("gamma"), py::arg("x"), py::arg("lo"), py::arg("hi"));
  m.def("prox_l1", [](double gamma, const Array& x, double weight) {
        const auto p = SpacePoint::flat(to_vector(x));
        return to_array(L1Norm(p.descriptor(), weight).prox(gamma, p));
      }, py::arg("gamma"), py::arg("x"), py::arg("weight"));
  m.def("prox_psd", [](double gamma, const Array& s) { return to_array(prox_psd(gamma, matrix_point(s))); },
        py::arg("gamma"), py::arg("s"));
  m.def("prox_logbarrier", &prox_logbarrier_scalar, py::arg("gamma"), py::arg("s"), py::arg("alpha"),
        py::arg("beta"));
  m.def("prox_logdet", [](double gamma, const Array& s, double alpha, double beta) {
        return to_array(prox_logdet(gamma, matrix_point(s), alpha, beta));
      }, py::arg("gamma"), py::arg("s"), py::arg("alpha"), py::arg("beta"));

  m.def("wasserstein2_1d", [](const Array& a, const Array& b) {
        return wasserstein2_1d(to_vector(a), to_vector(b));
      }, py::arg("a"), py::arg("b"));
  m.def("gamma_quantile", [](double shape, double rate, double u) { return gamma_quantile({shape, rate}, u); },
        py::arg("shape"), py::arg("rate"), py::arg("u"));
  m.def("trunc_gauss_quantile", [](double mean, double a, double b, double u) {
        return trunc_gauss_quantile({mean, a, b}, u);
      }, py::arg("mean"), py::arg("a"), py::arg("b"), py::arg("u"));
  m.def("posterior_mean", [](int d, double nu, int n, std::uint64_t data_seed) {
        return to_array(posterior_ground_truth(make_wishart_spec(d, nu, n, data_seed)).m_star);
      }, py::arg("d"), py::arg("nu"), py::arg("n"), py::arg("data_seed"),
      "Posterior mean of the precision experiment's data set.");
  m.def("tune_for_epsilon", [](double eps, double L, double lambda_F, double C, double w0_sq) {
        const auto t = tune_for_epsilon(eps, L, lambda_F, C, w0_sq);
        return py::make_tuple(t.gamma, t.k);
      }, py::arg("eps"), py::arg("L"), py::arg("lambda_F"), py::arg("C"), py::arg("w0_sq"));

  m.def("sample", [](const py::dict& cfg_dict, std::uint64_t chain) {
        const RunConfig cfg = config_from(cfg_dict);
        ChainTrace trace;
        {
          py::gil_scoped_release release;
          const auto prep = prepare_run(cfg);
          trace = run_chain(cfg.sampler, prep.problem, cfg.sampler_cfg, chain);
        }
        py::list points;
        for (const auto& p : trace.primal) points.append(to_array(p));
        py::dict out;
        out["steps"] = trace.steps;
        out["points"] = points;
        out["feasible"] = std::vector<bool>(trace.feasible.begin(), trace.feasible.end());
        return out;
      }, py::arg("config"), py::arg("chain") = 0,
      "Runs one chain of a run configuration and returns its recorded iterates.");
  m.def("run_experiment", [](const py::dict& cfg_dict, const std::string& out_dir) {
        const RunConfig cfg = config_from(cfg_dict);
        RunManifest man;
        {
          py::gil_scoped_release release;
          man = cmd_experiment(cfg, out_dir);
        }
        return json_to_py(man.to_json());
      }, py::arg("config"), py::arg("out_dir"),
      "Writes report.json and companions to out_dir; returns the manifest.");
  m.def("verify", [](const std::string& suite, std::size_t trials, std::uint64_t seed) {
        VerifyOptions o;
        o.suite = suite;
        o.trials = trials;
        o.seed = seed;
        std::vector<SuiteResult> res;
        try {
          py::gil_scoped_release release;
          res = run_verify(o);
        } catch (const ConfigError& e) {
          throw py::value_error(e.what());
        }
        py::list out;
        for (const auto& r : res) {
          py::dict d;
          d["name"] = r.name;
          d["passed"] = r.passed;
          d["trials"] = r.trials;
          d["worst"] = r.worst;
          d["failures"] = r.failures;
          out.append(d);
        }
        return out;
      }, py::arg("suite") = "all", py::arg("trials") = 0, py::arg("seed") = 0);

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
}
