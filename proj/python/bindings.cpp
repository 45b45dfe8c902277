// Python module: the problem and estimator documents cross the boundary as
// canonical JSON text; the Python package converts to and from dicts.

#include "optrec/error.hpp"
#include "optrec/io.hpp"
#include "optrec/synthesis.hpp"
#include "optrec/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace optrec;

namespace {

struct Parsed {
  Json document;
  Problem problem;
  std::string hash;
};

Parsed parse_problem(const std::string& text) {
  Json doc = parse_json(text);
  Problem p = problem_from_json(doc);
  std::string hash = problem_hash(doc);
  return {std::move(doc), std::move(p), std::move(hash)};
}

SolverSettings settings(double tol) { return SolverSettings::from_environment(tol); }

py::tuple build(const std::string& problem, double tol, std::uint64_t seed) {
  const Parsed p = parse_problem(problem);
  SynthesisResult r;
  {
    py::gil_scoped_release release;
    r = synthesize(p.problem, settings(tol));
  }
  const EstimatorFile file{r.estimator, {r.e_hat, tol, p.hash, kToolVersion, seed}};
  return py::make_tuple(r.e_hat, canonical_json(estimator_to_json(file)));
}

double eval_error(const std::string& problem, const std::string& estimator, double tol) {
  const Parsed p = parse_problem(problem);
  const EstimatorFile est = estimator_from_json(parse_json(estimator));
  py::gil_scoped_release release;
  return eval_error_fixed(p.problem, est.estimator, settings(tol));
}

py::dict compare_plugin(const std::string& problem, double tol) {
  const Parsed p = parse_problem(problem);
  if (p.problem.target.kind() != TargetFunctional::Kind::Sup) throw InputError("compare_plugin needs a sup target");
  double e_opt, e_plug;
  {
    py::gil_scoped_release release;
    e_opt = synthesize(p.problem, settings(tol)).e_hat;
    const SupAffineEstimator plug =
        plugin_estimator(recovery_map(p.problem, settings(tol)), p.problem.target, p.problem.model);
    e_plug = eval_error_fixed(p.problem, plug, settings(tol));
  }
  py::dict d;
  d["e_opt"] = e_opt;
  d["e_plug"] = e_plug;
  d["gap"] = e_plug - e_opt;
  return d;
}

std::string verify(const std::string& problem, const std::string& estimator, std::size_t samples, std::uint64_t seed,
                   double tol) {
  const Parsed p = parse_problem(problem);
  const EstimatorFile est = estimator_from_json(parse_json(estimator));
  ReportOptions ro;
  ro.samples = samples;
  ro.seed = seed;
  ro.solver = settings(tol);
  py::gil_scoped_release release;
  return canonical_json(consistency_report(p.problem, est, p.hash, ro));
}

std::string program_text(const std::string& problem, const std::optional<std::string>& estimator) {
  const Parsed p = parse_problem(problem);
  if (!estimator) return program_to_string(synthesis_program(p.problem));
  return program_to_string(fixed_error_program(p.problem, estimator_from_json(parse_json(*estimator)).estimator));
}

py::dict hb_check(const Matrix& mu, const Matrix& rho, const Matrix& eta, double tol) {
  const HbResult r = hb_extension_check(mu, rho, eta, settings(tol));
  py::dict d;
  d["certified"] = r.certified;
  d["c"] = r.certified ? py::cast(r.c) : py::none();
  d["witness"] = r.witness;
  d["hypothesis_gap"] = r.hypothesis_gap;
  d["message"] = r.message;
  return d;
}

}  // namespace

PYBIND11_MODULE(_optrec, m) {
  m.doc() = "Optimal estimators of sup-linear functionals from linear observations";
  m.attr("__version__") = kToolVersion;

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  // Carries the diagnostic (certificate direction, offending block) along.
  static py::exception<ProgramFailure> failure(m, "ProgramFailure", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ProgramFailure& e) {
      std::string text = e.what();
      if (!e.diagnostic().empty()) text += ": " + e.diagnostic();
      py::set_error(failure, text.c_str());
    }
  });

  m.def("build", &build, py::arg("problem"), py::arg("tol") = 1e-8, py::arg("seed") = 0);
  m.def("eval_error", &eval_error, py::arg("problem"), py::arg("estimator"), py::arg("tol") = 1e-8);
  m.def("compare_plugin", &compare_plugin, py::arg("problem"), py::arg("tol") = 1e-8);
  m.def("verify", &verify, py::arg("problem"), py::arg("estimator"), py::arg("samples") = 100000,
        py::arg("seed") = 0, py::arg("tol") = 1e-8);
  m.def("program_text", &program_text, py::arg("problem"), py::arg("estimator") = std::nullopt);
  m.def("problem_hash", [](const std::string& text) { return problem_hash(parse_json(text)); });
  m.def("canonical_json", [](const std::string& text) { return canonical_json(parse_json(text)); });
  m.def("hb_extension_check", &hb_check, py::arg("mu"), py::arg("rho"), py::arg("eta"), py::arg("tol") = 1e-8);
}
