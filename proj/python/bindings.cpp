#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fracstab/criteria.hpp"
#include "fracstab/error.hpp"
#include "fracstab/moments.hpp"
#include "fracstab/simulator.hpp"
#include "fracstab/spectral.hpp"

namespace py = pybind11;
using namespace fracstab;

namespace {

CoefficientSet coefficients_from(const std::string& family, int dim, const py::dict& params) {
  const auto mat = [&](const char* key) {
    return params.contains(key) ? params[key].cast<Matrix>() : Matrix(Matrix::Zero(dim, dim));
  };
  const auto num = [&](const char* key) { return params.contains(key) ? params[key].cast<double>() : 0.0; };
  if (family == "zero") return make_zero(dim);
  if (family == "linear") return make_linear(mat("G"), mat("B"), mat("S"));
  if (family == "bounded_smooth") return make_bounded_smooth(dim, num("c_g"), num("c_b"), num("c_s"));
  if (family == "additive_noise") return make_additive_noise(dim, num("s"));
  throw Error(ErrorKind::config, "unknown coefficient family '" + family + "'", "family");
}

// (n_paths, N + 1, dim) view over a flat ensemble buffer, copied out
py::array_t<double> cube(const PathEnsemble& e, const std::vector<double>& data) {
  py::array_t<double> out({e.n_paths, e.grid.N + 1, e.dim});
  std::copy(data.begin(), data.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stability certificates and Monte Carlo for fractional stochastic neutral equations";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&]() { return py::object(py::exception<Error>(m, "FracstabError", PyExc_ValueError)); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object& type = error_type.get_stored();
      py::object instance = type(e.what());
      instance.attr("kind") = to_string(e.kind());
      instance.attr("field") = e.field();
      py::set_error(type, instance);
    }
  });

  m.def("gamma", &gamma_fn, py::arg("x"));
  m.def("beta", &beta_fn, py::arg("a"), py::arg("b"));
  m.def(
      "ml",
      [](double alpha, double beta, std::complex<double> z) -> py::object {
        const auto v = ml_scalar(alpha, beta, z).value;
        if (z.imag() == 0.0) return py::float_(v.real());
        return py::cast(v);
      },
      py::arg("alpha"), py::arg("beta"), py::arg("z"), "Mittag-Leffler function E_{alpha,beta}(z).");
  m.def(
      "ml_matrix", [](double alpha, double beta, const Matrix& a) { return ml_matrix(alpha, beta, a).value; },
      py::arg("alpha"), py::arg("beta"), py::arg("M"));

  m.def(
      "eigenvalues", [](const Matrix& a) { return eigenvalues(a).eigenvalues; }, py::arg("A"));
  m.def(
      "sector_check",
      [](const Matrix& a, double alpha) {
        const auto v = sector_check(eigenvalues(a), alpha);
        return py::make_tuple(v.in_sector, v.margin);
      },
      py::arg("A"), py::arg("alpha"), "(in_sector, margin in radians)");
  m.def(
      "ml_norm_sup", [](const Matrix& a, double alpha, double T, int n) { return ml_norm_sup(a, alpha, T, n); },
      py::arg("A"), py::arg("alpha"), py::arg("T"), py::arg("n_nodes"));

  py::class_<FractionalOrder>(m, "FractionalOrder")
      .def(py::init<double, int>(), py::arg("alpha") = 0.75, py::arg("p") = 2)
      .def_readwrite("alpha", &FractionalOrder::alpha)
      .def_readwrite("p", &FractionalOrder::p);

  py::class_<CriterionInputs>(m, "CriterionInputs")
      .def(py::init([](double alpha, int p, double T, double L_g, double L_b, double L_sigma, double A_norm, double M) {
             CriterionInputs in;
             in.order = {alpha, p};
             in.T = T;
             in.L_g = L_g;
             in.L_b = L_b;
             in.L_sigma = L_sigma;
             in.A_norm = A_norm;
             in.M = M;
             in.validate();
             return in;
           }),
           py::arg("alpha") = 0.75, py::arg("p") = 2, py::arg("T") = 1.0, py::arg("L_g") = 0.0,
           py::arg("L_b") = 0.0, py::arg("L_sigma") = 0.0, py::arg("A_norm") = 0.0, py::arg("M") = 1.0)
      .def_readwrite("T", &CriterionInputs::T)
      .def_readwrite("L_g", &CriterionInputs::L_g)
      .def_readwrite("L_b", &CriterionInputs::L_b)
      .def_readwrite("L_sigma", &CriterionInputs::L_sigma)
      .def_readwrite("A_norm", &CriterionInputs::A_norm)
      .def_readwrite("M", &CriterionInputs::M);

  m.def("theta", &theta, py::arg("inputs"));
  m.def("contraction_constant", &contraction_constant, py::arg("inputs"));
  m.def("k_stab", &k_stab, py::arg("inputs"));
  m.def("delta_for_epsilon", &delta_for_epsilon, py::arg("inputs"), py::arg("epsilon"));
  m.def("caputo_ms_criterion", &caputo_ms_criterion, py::arg("inputs"));

  py::class_<SystemSpec>(m, "System")
      .def(py::init([](const Matrix& A, const Vector& rho, double alpha, int p, const std::string& family,
                       const py::dict& params) {
             SystemSpec s{A, rho, coefficients_from(family, static_cast<int>(A.rows()), params), {alpha, p}};
             s.validate();
             return s;
           }),
           py::arg("A"), py::arg("rho"), py::arg("alpha") = 0.75, py::arg("p") = 2, py::arg("family") = "zero",
           py::arg("params") = py::dict())
      .def_property_readonly("dim", &SystemSpec::dim)
      .def("digest", &SystemSpec::digest);

  m.def(
      "certify",
      [](const SystemSpec& system, double T, double epsilon, std::optional<double> M_override) {
        CertifyOptions o;
        o.epsilon = epsilon;
        o.M_override = M_override;
        const Certificate c = certify(system, T, o);
        py::dict d;
        d["theta"] = c.theta;
        d["contraction"] = c.contraction;
        d["k_stab"] = c.k_stab;
        d["k_stab_beta"] = c.k_stab_beta;
        d["delta"] = c.delta;
        d["caputo_ms"] = c.caputo_ms;
        d["M"] = c.inputs.M;
        d["in_sector"] = c.sector.in_sector;
        d["verdict_existence"] = c.verdict_existence;
        d["verdict_stability"] = c.verdict_stability;
        d["note"] = c.note;
        d["text"] = c.to_text();
        return d;
      },
      py::arg("system"), py::arg("T"), py::arg("epsilon") = 1.0, py::arg("M_override") = py::none());

  m.def(
      "simulate",
      [](const SystemSpec& system, double T, int N, int n_paths, std::uint64_t seed, const std::string& scheme,
         bool as_printed) {
        const TimeGrid grid{T, N};
        grid.validate();
        const auto noise = brownian_increments(grid, n_paths, seed);
        SimulationOptions o;
        o.as_printed = as_printed;
        PathEnsemble e;
        {
          py::gil_scoped_release release;
          const Scheme s = scheme_from_string(scheme);
          if (s == Scheme::mild) e = simulate_mild(system, grid, noise, o);
          else if (s == Scheme::integral_form) e = simulate_integral_form(system, grid, noise, o);
          else throw Error(ErrorKind::config, "simulate supports mild and integral_form", "scheme");
        }
        if (const int bad = e.first_failure(); bad >= 0)
          throw Error(ErrorKind::numeric, "path " + std::to_string(bad) + ": " + e.diagnostics[bad], "simulate");
        py::array_t<double> t(N + 1);
        for (int j = 0; j <= N; ++j) t.mutable_at(j) = grid.t(j);
        py::dict d;
        d["t"] = t;
        d["values"] = cube(e, e.values);
        d["weighted"] = cube(e, e.weighted);
        for (bool weighted : {false, true}) {
          const auto c = pth_moment_curve(e, system.order.p, weighted);
          d[weighted ? "moments_weighted" : "moments"] = py::array_t<double>(c.m.size(), c.m.data());
        }
        d["digest"] = e.system_digest;
        return d;
      },
      py::arg("system"), py::arg("T"), py::arg("N"), py::arg("n_paths"), py::arg("seed") = 1,
      py::arg("scheme") = "mild", py::arg("as_printed") = false,
      "Returns t, values and weighted arrays of shape (n_paths, N + 1, dim) and the moment curves.");

  m.def(
      "closed_form",
      [](const Matrix& A, const Vector& rho, double alpha, double T, int N) {
        const auto e = closed_form_homogeneous(A, rho, alpha, TimeGrid{T, N});
        return cube(e, e.weighted);
      },
      py::arg("A"), py::arg("rho"), py::arg("alpha"), py::arg("T"), py::arg("N"),
      "Weighted homogeneous solution, shape (1, N + 1, dim).");
}
