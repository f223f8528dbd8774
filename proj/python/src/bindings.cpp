#include "iclab/approxloss.hpp"
#include "iclab/cli.hpp"
#include "iclab/estimators.hpp"
#include "iclab/gradflow.hpp"
#include "iclab/risk.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace iclab;

namespace {

EmbeddedSequence make_seq(const MatrixXd& X, const VectorXd& y, const VectorXd& xq) {
  require(X.rows() == y.size() && X.cols() == xq.size(), ErrorKind::dimension, "X must be L x d, y length L, xq length d");
  EmbeddedSequence s;
  s.X = X;
  s.y = y;
  s.xq = xq;
  return s;
}

// JSON documents cross the boundary as Python objects via the json module.
py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }
json from_py(const py::object& o) {
  return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "In-context regression with multi-head softmax attention";
  m.attr("__version__") = version_string();

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  // ---- data ----
  m.def(
      "sample_sequences",
      [](std::uint64_t seed, long n, int d, int L, double sigma2, double kms_rho) {
        const CovSpec cov = kms_rho > 0.0 ? CovSpec::kms(kms_rho) : CovSpec::isotropic();
        const CovSampler cs(cov, d);
        const Rng root(seed);
        py::list out;
        for (long i = 0; i < n; ++i) {
          Rng r = root.stream(static_cast<std::uint64_t>(i));
          const EmbeddedSequence s = draw_instance(r, d, L, sigma2, cs);
          out.append(py::dict(py::arg("X") = s.X, py::arg("y") = s.y, py::arg("xq") = s.xq, py::arg("yq") = s.yq,
                              py::arg("beta") = s.task.beta));
        }
        return out;
      },
      py::arg("seed"), py::arg("n"), py::arg("d") = 5, py::arg("L") = 40, py::arg("sigma2") = 0.1,
      py::arg("kms_rho") = 0.0, "Draw n sequences; stream i of the seed gives sequence i.");

  // ---- predictors ----
  m.def(
      "predict_simplified",
      [](const VectorXd& omega, const VectorXd& mu, const MatrixXd& X, const VectorXd& y, const VectorXd& xq) {
        return predict_simplified({omega, mu}, make_seq(X, y, xq));
      },
      py::arg("omega"), py::arg("mu"), py::arg("X"), py::arg("y"), py::arg("xq"));
  m.def("vanilla_gd", [](const MatrixXd& X, const VectorXd& y, const VectorXd& xq, double eta) {
    return vanilla_gd(make_seq(X, y, xq), eta);
  });
  m.def("debiased_gd", [](const MatrixXd& X, const VectorXd& y, const VectorXd& xq, double eta) {
    return debiased_gd(make_seq(X, y, xq), eta);
  });
  m.def("ridge", [](const MatrixXd& X, const VectorXd& y, const VectorXd& xq, double lam) {
    return ridge(make_seq(X, y, xq), lam);
  });
  m.def("kernel_regressor", [](const MatrixXd& X, const VectorXd& y, const VectorXd& xq, double omega, double mu) {
    return kernel_regressor(make_seq(X, y, xq), omega, mu);
  });

  // ---- approximate loss ----
  m.def(
      "approx_loss",
      [](const VectorXd& omega, const VectorXd& mu, int d, int L, double sigma2) {
        return approx_loss(omega, mu, {d, L, sigma2, true});
      },
      py::arg("omega"), py::arg("mu"), py::arg("d") = 5, py::arg("L") = 40, py::arg("sigma2") = 0.1);
  m.def(
      "approx_loss_grad",
      [](const VectorXd& omega, const VectorXd& mu, int d, int L, double sigma2) {
        const ApproxGrad g = approx_loss_grad(omega, mu, {d, L, sigma2, true});
        return py::make_tuple(g.d_omega, g.d_mu);
      },
      py::arg("omega"), py::arg("mu"), py::arg("d") = 5, py::arg("L") = 40, py::arg("sigma2") = 0.1);
  m.def(
      "mu_gamma", [](double g, int d, int L, double sigma2) { return mu_gamma(g, {d, L, sigma2, true}); },
      py::arg("gamma"), py::arg("d") = 5, py::arg("L") = 40, py::arg("sigma2") = 0.1);
  m.def(
      "optimal_eta_star", [](int d, int L, double sigma2) { return optimal_eta_star({d, L, sigma2, true}); },
      py::arg("d") = 5, py::arg("L") = 40, py::arg("sigma2") = 0.1);

  // ---- risk ----
  m.def("vgd_risk_closed", &vgd_risk_closed, py::arg("eta"), py::arg("d"), py::arg("L"), py::arg("sigma2"));
  m.def("vgd_optimal_eta", &vgd_optimal_eta, py::arg("d"), py::arg("L"), py::arg("sigma2"));
  m.def("gd_risk_asymptotic", &gd_risk_asymptotic, py::arg("xi"), py::arg("sigma2"));
  m.def("bayes_risk_asymptotic", &bayes_risk_asymptotic, py::arg("xi"), py::arg("sigma2"));
  m.def(
      "bayes_ratio_bound",
      [](double xi, double s2) {
        const BayesRatio b = bayes_ratio_bound(xi, s2);
        return py::make_tuple(b.ratio, b.bound);
      },
      py::arg("xi"), py::arg("sigma2"));

  // ---- gradient flow ----
  m.def(
      "gradflow",
      [](double alpha, int d, int L, double sigma2, double t_end, double dt, int sample_every) {
        const PhaseReport r = integrate({alpha, d, L, sigma2, t_end, dt, sample_every});
        const auto n = static_cast<Eigen::Index>(r.trajectory.size());
        VectorXd t(n), phi(n), rho(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          t[i] = r.trajectory[i].t;
          phi[i] = r.trajectory[i].phi;
          rho[i] = r.trajectory[i].rho;
        }
        return py::dict(py::arg("t") = t, py::arg("phi") = phi, py::arg("rho") = rho, py::arg("tau1") = r.tau1,
                        py::arg("tau2") = r.tau2, py::arg("rho_peak") = r.rho_peak,
                        py::arg("limit_product") = r.limit_product);
      },
      py::arg("alpha") = 1e-3, py::arg("d") = 5, py::arg("L") = 40, py::arg("sigma2") = 0.1, py::arg("t_end") = 200.0,
      py::arg("dt") = 1e-3, py::arg("sample_every") = 100);

  // ---- experiment runner ----
  m.def(
      "default_config", [](const std::string& sub) { return to_py(default_config(sub)); }, py::arg("subcommand"));
  m.def("subcommands", &subcommands);
  m.def(
      "run",
      [](const std::string& sub, const py::object& overrides) {
        json cfg = default_config(sub);
        if (!overrides.is_none()) cfg = merge_config(cfg, from_py(overrides));
        json out;
        {
          py::gil_scoped_release nogil;
          out = run_subcommand(sub, cfg);
        }
        return to_py(out);
      },
      py::arg("subcommand"), py::arg("config") = py::none(),
      "Run a subcommand with a (partial) config dict; artifacts go to config['out'].");
}
