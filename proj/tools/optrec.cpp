// optrec: build, evaluate and verify optimal estimators from problem files.

#include "optrec/error.hpp"
#include "optrec/format.hpp"
#include "optrec/io.hpp"
#include "optrec/synthesis.hpp"
#include "optrec/verify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace optrec;

namespace {

enum Exit { kOk = 0, kInput = 1, kInfeasible = 2, kNumerical = 3, kVerification = 4 };

struct Options {
  double tol = 1e-8;
  std::uint64_t seed = 0;
  std::size_t samples = 100000;
  bool force = false;
  std::string csv;
  std::string out;
  std::string report;
  std::string problem;
  std::string estimator;
};

SolverSettings settings(const Options& o) { return SolverSettings::from_environment(o.tol); }

void emit_csv(const std::string& path, const std::string& header, const std::vector<std::vector<double>>& rows) {
  if (path.empty()) return;
  std::string text = header + "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) text += (i ? "," : "") + format_real(r[i]);
    text += "\n";
  }
  write_file(path, text);
}

void write_output(const std::string& path, const std::string& bytes) {
  if (path.empty() || path == "-") {
    std::cout << bytes;
  } else {
    write_file(path, bytes);
  }
}

EstimatorFile load_checked_estimator(const Options& o, const LoadedProblem& lp) {
  EstimatorFile est = load_estimator(o.estimator);
  if (est.metadata.problem_hash != lp.hash && !o.force) {
    throw InputError("estimator was built for problem " + est.metadata.problem_hash + ", not " + lp.hash +
                     " (use --force to evaluate anyway)");
  }
  return est;
}

int cmd_build(const Options& o) {
  const LoadedProblem lp = load_problem(o.problem);
  const SynthesisResult r = synthesize(lp.problem, settings(o));
  const EstimatorFile file{r.estimator, {r.e_hat, o.tol, lp.hash, kToolVersion, o.seed}};
  write_output(o.out, canonical_json(estimator_to_json(file)));
  std::cout << "e_hat=" << format_real(r.e_hat) << "\n";
  if (!o.csv.empty()) {
    // Optimal error against the noise radius.
    std::vector<std::vector<double>> rows;
    Problem p = lp.problem;
    const NoiseModel::Norm norm = p.noise ? p.noise->p : NoiseModel::Norm::Inf;
    for (double radius : {0.0, 0.05, 0.1, 0.2, 0.5, 1.0}) {
      p.noise = NoiseModel{norm, radius};
      rows.push_back({radius, synthesize(p, settings(o)).e_hat});
    }
    emit_csv(o.csv, "radius,e_hat", rows);
  }
  return kOk;
}

int cmd_eval(const Options& o) {
  const LoadedProblem lp = load_problem(o.problem);
  const EstimatorFile est = load_checked_estimator(o, lp);
  const double e = eval_error_fixed(lp.problem, est.estimator, settings(o));
  std::cout << "e_delta=" << format_real(e) << "\n";
  emit_csv(o.csv, "e_delta,e_hat_file", {{e, est.metadata.e_hat}});
  return kOk;
}

int cmd_compare_plugin(const Options& o) {
  const LoadedProblem lp = load_problem(o.problem);
  const Problem& p = lp.problem;
  if (p.target.kind() != TargetFunctional::Kind::Sup) throw InputError("compare-plugin needs a sup target");
  const double e_opt = synthesize(p, settings(o)).e_hat;
  const AffineRecoveryMap map = recovery_map(p, settings(o));
  const double e_plug = eval_error_fixed(p, plugin_estimator(map, p.target, p.model), settings(o));
  std::cout << "e_opt=" << format_real(e_opt) << " e_plug=" << format_real(e_plug)
            << " gap=" << format_real(e_plug - e_opt) << "\n";
  emit_csv(o.csv, "e_opt,e_plug,gap", {{e_opt, e_plug, e_plug - e_opt}});
  return kOk;
}

int cmd_verify(const Options& o) {
  const LoadedProblem lp = load_problem(o.problem);
  const EstimatorFile est = load_checked_estimator(o, lp);
  ReportOptions ro;
  ro.samples = o.samples;
  ro.seed = o.seed;
  ro.solver = settings(o);
  const Json report = consistency_report(lp.problem, est, lp.hash, ro);
  const std::string target = !o.report.empty() ? o.report : o.out;
  write_output(target, canonical_json(report));
  std::vector<std::vector<double>> rows;
  bool passed = report["passed"].get<bool>();
  for (const auto& c : report["checks"]) {
    const bool ok = c["passed"].get<bool>();
    if (!target.empty() && target != "-") {
      std::cout << (ok ? "pass " : "FAIL ") << c["name"].get<std::string>() << "\n";
    }
    if (!ok) std::cerr << "check failed: " << c["name"].get<std::string>() << "\n";
    if (c["lhs"].is_number()) rows.push_back({c["lhs"].get<double>(), c["rhs"].get<double>(), ok ? 1.0 : 0.0});
  }
  emit_csv(o.csv, "lhs,rhs,passed", rows);
  return passed ? kOk : kVerification;
}

int cmd_dump_program(const Options& o) {
  const LoadedProblem lp = load_problem(o.problem);
  const ConicProgram program = o.estimator.empty()
                                   ? synthesis_program(lp.problem)
                                   : fixed_error_program(lp.problem, load_checked_estimator(o, lp).estimator);
  write_output(o.out, program_to_string(program));
  return kOk;
}

int run(const std::function<int()>& command) {
  try {
    return command();
  } catch (const ProgramFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!e.diagnostic().empty()) std::cerr << "diagnostic: " << e.diagnostic() << "\n";
    return e.status() == SolveStatus::NumericalTrouble ? kNumerical : kInfeasible;
  } catch (const std::invalid_argument& e) {  // InputError, DimensionError
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::length_error& e) {  // LimitError
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const SamplingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal estimation of sup-linear functionals from linear observations"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--tol", o.tol, "solver tolerance")->check(CLI::PositiveNumber);

  CLI::App* build = app.add_subcommand("build", "synthesize the optimal estimator");
  build->add_option("problem", o.problem, "problem file")->required();
  build->add_option("-o,--output", o.out, "estimator file")->required();
  build->add_option("--seed", o.seed, "seed recorded in the estimator metadata");
  build->add_option("--emit-csv", o.csv, "write e_hat against the noise radius");

  CLI::App* eval = app.add_subcommand("eval", "worst-case error of a stored estimator");
  eval->add_option("problem", o.problem, "problem file")->required();
  eval->add_option("estimator", o.estimator, "estimator file")->required();
  eval->add_flag("--force", o.force, "ignore a problem hash mismatch");
  eval->add_option("--emit-csv", o.csv, "write the value as CSV");

  CLI::App* compare = app.add_subcommand("compare-plugin", "optimal against plug-in estimator");
  compare->add_option("problem", o.problem, "problem file")->required();
  compare->add_option("--emit-csv", o.csv, "write the comparison as CSV");

  CLI::App* verify = app.add_subcommand("verify", "cross-check an estimator with sampling oracles");
  verify->add_option("problem", o.problem, "problem file")->required();
  verify->add_option("estimator", o.estimator, "estimator file")->required();
  verify->add_option("--samples", o.samples, "samples per oracle");
  verify->add_option("--seed", o.seed, "oracle seed");
  verify->add_option("--report,-o", o.report, "JSON report path (stdout when omitted)");
  verify->add_flag("--force", o.force, "ignore a problem hash mismatch");
  verify->add_option("--emit-csv", o.csv, "write the checks as CSV");

  CLI::App* dump = app.add_subcommand("dump-program", "print the conic program");
  dump->add_option("problem", o.problem, "problem file")->required();
  dump->add_option("--estimator", o.estimator, "dump the fixed-estimator program instead");
  dump->add_option("-o,--output", o.out, "output path (stdout when omitted)");
  dump->add_flag("--force", o.force, "ignore a problem hash mismatch");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  if (*build) return run([&] { return cmd_build(o); });
  if (*eval) return run([&] { return cmd_eval(o); });
  if (*compare) return run([&] { return cmd_compare_plugin(o); });
  if (*verify) return run([&] { return cmd_verify(o); });
  return run([&] { return cmd_dump_program(o); });
}
