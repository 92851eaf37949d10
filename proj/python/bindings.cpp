#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "app.hpp"

namespace py = pybind11;
using namespace papm;

namespace {

template <std::size_t Rank>
py::array_t<double> to_numpy(const Tensor<Rank>& t) {
  std::vector<py::ssize_t> shape(Rank, t.dim());
  py::array_t<double> out(shape);
  std::copy(t.flat_data().begin(), t.flat_data().end(), out.mutable_data());
  return out;
}

ConnectionParams params(double lambda, double mu) { return {lambda, mu}; }

py::dict to_dict(const ClassificationVerdict& v) {
  py::dict d;
  d["case"] = to_string(v.case_id);
  d["clause"] = to_string(v.theorem43_clause);
  d["p_tensor_expected"] = to_string(v.p_tensor_expected);
  d["delta"] = v.delta;
  d["notes"] = v.notes;
  return d;
}

py::dict to_dict(const ClassFlags& f) {
  py::dict d;
  d["is_W0"] = f.is_W0;
  d["in_W3bar"] = f.in_W3bar;
  d["in_W6bar"] = f.in_W6bar;
  d["theta_parity"] = to_string(f.theta_parity);
  d["shape_residual"] = f.shape_residual;
  return d;
}

py::dict to_dict(const CurvaturePack& c) {
  py::dict d;
  d["R"] = to_numpy(c.R);
  d["ricci"] = c.ricci;
  d["tau"] = c.tau;
  return d;
}

double verify(const ChartManifold& M, const std::string& identity, const Coordinates& u, double lambda, double mu) {
  const ConnectionParams cp{lambda, mu};
  if (identity == "eq12") return verify_identity12(M, u, cp);
  if (identity == "eq19") return verify_identity19(M, u, cp);
  if (identity == "eq21") return verify_theorem31(M, u, cp);
  if (identity == "eq26p") return verify_26prime(M, u, cp);
  if (identity == "cor32") {
    const Cor32Residuals r = verify_cor32(M, u, cp);
    return std::max(r.ricci_residual, r.tau_residual);
  }
  if (identity == "naturality") {
    const ParallelResiduals r = natural_parallel_residuals(M, u, cp);
    return std::max(r.metric, r.structure);
  }
  throw py::value_error("unknown identity '" + identity + "'");
}

}  // namespace

PYBIND11_MODULE(_papm, m) {
  m.doc() = "Natural connections on Riemannian almost product manifolds";

  // The module attributes own the exception types; the translator only borrows them.
  static PyObject* base = py::exception<Error>(m, "Error", PyExc_RuntimeError).ptr();
  static PyObject* geometry = py::exception<GeometryError>(m, "GeometryError", base).ptr();
  static PyObject* parse_error = py::exception<dsl::ParseError>(m, "ParseError", PyExc_ValueError).ptr();
  static PyObject* domain_error = py::exception<dsl::DomainError>(m, "DomainError", PyExc_ArithmeticError).ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const dsl::ParseError& e) {
      const py::tuple args = py::make_tuple(e.what(), dsl::to_string(e.kind()), e.line(), e.column(), e.expected());
      PyErr_SetObject(parse_error, args.ptr());
    } catch (const dsl::DomainError& e) {
      PyErr_SetObject(domain_error, py::make_tuple(e.what(), e.subexpression()).ptr());
    } catch (const GeometryError& e) {
      PyErr_SetObject(geometry, py::make_tuple(e.what(), e.check()).ptr());
    } catch (const Error& e) {
      PyErr_SetString(base, e.what());
    }
  });

  // expressions
  py::class_<dsl::Expr, std::shared_ptr<dsl::Expr>>(m, "Expr")
      .def("__str__", [](const dsl::Expr& e) { return dsl::print(e); })
      .def("__repr__", [](const dsl::Expr& e) { return "Expr('" + dsl::print(e) + "')"; })
      .def("__eq__", [](const dsl::Expr& a, const dsl::Expr& b) { return dsl::equal(a, b); })
      .def("eval", [](const dsl::Expr& e, const std::vector<double>& u) { return dsl::eval(e, u); }, py::arg("u"))
      .def_property_readonly("max_variable", [](const dsl::Expr& e) { return dsl::max_variable(e); });
  m.def(
      "parse", [](const std::string& src) { return std::const_pointer_cast<dsl::Expr>(dsl::parse(src)); },
      py::arg("src"));

  // pointwise structure
  py::class_<StructuredPoint>(m, "StructuredPoint")
      .def(py::init([](int n, Bilinear g, Endomorphism P, Covector theta) {
             return StructuredPoint{n, std::move(g), std::move(P), std::move(theta)};
           }),
           py::arg("n"), py::arg("g"), py::arg("P"), py::arg("theta"))
      .def_readwrite("n", &StructuredPoint::n)
      .def_readwrite("g", &StructuredPoint::g)
      .def_readwrite("P", &StructuredPoint::P)
      .def_readwrite("theta", &StructuredPoint::theta);

  m.def("validate", [](const StructuredPoint& pt, double tol) {
    py::list out;
    for (const Violation& v : validate(pt, tol)) out.append(py::make_tuple(v.check, v.residual, v.message));
    return out;
  }, py::arg("pt"), py::arg("tol") = kStructureTolerance);
  m.def("build_F", [](const StructuredPoint& pt) { return to_numpy(build_F(pt)); }, py::arg("pt"));
  m.def("class_flags", [](const StructuredPoint& pt, double tol) { return to_dict(class_flags(pt, tol)); },
        py::arg("pt"), py::arg("tol") = kStructureTolerance);
  m.def("torsion", [](const StructuredPoint& pt, double l, double mu) { return to_numpy(torsion(pt, params(l, mu))); },
        py::arg("pt"), py::arg("lam"), py::arg("mu"));
  m.def("q_tensor", [](const StructuredPoint& pt, double l, double mu) { return to_numpy(q_tensor(pt, params(l, mu))); },
        py::arg("pt"), py::arg("lam"), py::arg("mu"));
  m.def("w_bilinear", &w_bilinear, py::arg("pt"));

  // connection family
  m.def("named_connection", [](const std::string& name, int n) {
    const auto c = parse_named_connection(name);
    if (!c) throw py::value_error("unknown named connection '" + name + "'");
    const ConnectionParams cp = params_of(*c, n);
    return py::make_tuple(cp.lambda, cp.mu);
  }, py::arg("name"), py::arg("n"));
  m.def("discriminant", [](double l, double mu, int n) { return discriminant(params(l, mu), n); }, py::arg("lam"),
        py::arg("mu"), py::arg("n"));

  // charts
  py::class_<ChartManifold>(m, "Manifold")
      .def_readonly("n", &ChartManifold::n)
      .def_readwrite("fd_step", &ChartManifold::fd_step)
      .def_readwrite("curvature_step", &ChartManifold::curvature_step)
      .def("point", [](const ChartManifold& M, const Coordinates& u) { return point_of(M, u).point; }, py::arg("u"))
      .def("w1_residual", [](const ChartManifold& M, const Coordinates& u) { return point_of(M, u).w1_residual; },
           py::arg("u"))
      .def("christoffels", [](const ChartManifold& M, const Coordinates& u) { return to_numpy(christoffels(M, u).gamma); },
           py::arg("u"))
      .def("curvature", [](const ChartManifold& M, const Coordinates& u) { return to_dict(metric_curvature(M, u)); },
           py::arg("u"))
      .def("natural_curvature",
           [](const ChartManifold& M, const Coordinates& u, double l, double mu) {
             return to_dict(natural_curvature(M, u, params(l, mu)));
           },
           py::arg("u"), py::arg("lam"), py::arg("mu"))
      .def("p_tensor_residual",
           [](const ChartManifold& M, const Coordinates& u, double l, double mu) {
             return curvature_identity_residuals(natural_curvature(M, u, params(l, mu)).R, M.P_field(u)).p_tensor();
           },
           py::arg("u"), py::arg("lam"), py::arg("mu"))
      .def("closedness",
           [](const ChartManifold& M, const Coordinates& u, double tol) {
             const NablaTheta nt = nabla_theta(M, u, levi_civita_field(M), tol);
             py::dict d;
             d["theta_closed"] = nt.theta_closed;
             d["theta_P_closed"] = nt.theta_P_closed;
             d["residual_theta"] = nt.residual_theta;
             d["residual_theta_P"] = nt.residual_theta_P;
             return d;
           },
           py::arg("u"), py::arg("tol") = 1e-6)
      .def("torsion_parallel",
           [](const ChartManifold& M, const Coordinates& u, double l, double mu) {
             const TorsionParallel t = torsion_parallel_residual(M, u, params(l, mu));
             return py::make_tuple(t.nabla_T, t.nabla_theta_prime);
           },
           py::arg("u"), py::arg("lam"), py::arg("mu"))
      .def("verify", &verify, py::arg("identity"), py::arg("u"), py::arg("lam") = 0.0, py::arg("mu") = 0.0);

  m.def("conformal_manifold", [](int n, const std::string& u, double fd_step) {
    return build_manifold(conformal_spec(n, u), sample_points(n, kDefaultSeed), fd_step);
  }, py::arg("n"), py::arg("u"), py::arg("fd_step") = 1e-5);
  m.def("explicit_manifold",
        [](int n, const std::vector<std::vector<std::string>>& g, const Endomorphism& P, double fd_step) {
          return build_manifold(explicit_spec(n, g, P), sample_points(n, kDefaultSeed), fd_step);
        },
        py::arg("n"), py::arg("g"), py::arg("P"), py::arg("fd_step") = 1e-5);
  m.def("sample_points", &sample_points, py::arg("n"), py::arg("seed") = kDefaultSeed,
        py::arg("count") = kDefaultSampleCount);

  // decision procedures
  m.def("classify_connection",
        [](double l, double mu, int n, double residual_theta, double residual_theta_P, double tol) {
          return to_dict(classify_connection(params(l, mu), n, make_evidence(residual_theta, residual_theta_P, tol)));
        },
        py::arg("lam"), py::arg("mu"), py::arg("n"), py::arg("residual_theta"), py::arg("residual_theta_P"),
        py::arg("tol") = 1e-6);
  m.def("classify_parallel_torsion",
        [](double l, double mu, const Bilinear& W, bool in_W3bar, bool in_W6bar, double tol) {
          ClassFlags f;
          f.in_W3bar = in_W3bar;
          f.in_W6bar = in_W6bar;
          f.theta_parity = in_W3bar ? Parity::odd : (in_W6bar ? Parity::even : Parity::mixed);
          const TorsionVerdict v = classify_parallel_torsion(params(l, mu), W, f, tol);
          py::dict d;
          d["case"] = to_string(v.case_id);
          d["requires"] = v.requires_text;
          d["requirements_met"] = v.requirements_met;
          return d;
        },
        py::arg("lam"), py::arg("mu"), py::arg("W"), py::arg("in_W3bar"), py::arg("in_W6bar"), py::arg("tol") = 1e-9);

  // command line
  m.def("run_cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "papm");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = app::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"));
}
