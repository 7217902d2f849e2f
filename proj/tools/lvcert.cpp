// lvcert: certification toolkit for interior equilibria of Lotka-Volterra
// systems. Subcommands: equilibrium, certify, simulate, lyapunov-check,
// reproduce.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lvcert/certificates.hpp"
#include "lvcert/io.hpp"
#include "lvcert/lyapunov.hpp"
#include "lvcert/model.hpp"
#include "lvcert/search.hpp"
#include "lvcert/sim.hpp"
#include "lvcert/validate.hpp"

namespace {

using namespace lvcert;

constexpr int kExitCertified = 0;
constexpr int kExitInconclusive = 1;
constexpr int kExitNotInterior = 2;
constexpr int kExitSingular = 3;
constexpr int kExitBlowUp = 4;
constexpr int kExitUnderflow = 5;
constexpr int kExitBadInput = 64;

struct NormalizedInput {
  Mat A;
  std::optional<Vec> equilibrium;
  Json echo;
};

NormalizedInput normalize_input(const SystemFile& sf) {
  NormalizedInput out;
  out.echo = serialize_system(sf);
  if (sf.is_raw()) {
    LVSystem sys{*sf.r, *sf.B};
    InteriorEquilibrium eq = find_interior_equilibrium(sys);
    out.A = normalize(sys, eq).A;
    out.equilibrium = eq.y_star;
  } else {
    out.A = *sf.A;
  }
  return out;
}

std::string format_vec(const Vec& v) {
  std::string s = "(";
  for (Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_double(v[i]);
  }
  return s + ")";
}

Vec parse_vector_option(const std::string& text, Index n) {
  std::vector<double> vals;
  std::string token;
  std::stringstream ss(text);
  while (std::getline(ss, token, ',')) vals.push_back(parse_number_string(token));
  if (static_cast<Index>(vals.size()) != n)
    throw ParseError("expected " + std::to_string(n) + " comma-separated values, got " +
                     std::to_string(vals.size()));
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = vals[static_cast<std::size_t>(i)];
  return v;
}

SystemFile fixture_example1() {
  SystemFile sf;
  sf.name = "example1";
  sf.n = 3;
  Vec r(3);
  r << 1.0, 3.0, parse_rational_string("19/6");
  Mat B(3, 3);
  B << -1, 0, 9, -1, -1, 0, -1, -1, -1;
  sf.r = r;
  sf.B = B;
  return sf;
}

SystemFile fixture_example2() {
  SystemFile sf;
  sf.name = "example2";
  sf.n = 3;
  Mat A(3, 3);
  A << -5, -10, -2, -4, -7, -11, -10, -2, -8;
  sf.A = A;
  return sf;
}

StructuredFamilyParams fixture_structured_params() {
  StructuredFamilyParams sf;
  sf.lambda1 = 0.5;
  sf.lambda2 = 0.75;
  sf.lambda3 = 2.0;
  sf.delta = 0.1;
  return sf;
}

int cmd_equilibrium(const std::string& input_path) {
  SystemFile sf = load_system_file(input_path);
  if (!sf.is_raw()) {
    std::cout << "input is already normalized; equilibrium is the all-ones point\n";
    std::cout << "y* = " << format_vec(Vec::Ones(sf.n)) << "\n";
    return kExitCertified;
  }
  LVSystem sys{*sf.r, *sf.B};
  try {
    InteriorEquilibrium eq = find_interior_equilibrium(sys);
    const double residual = inf_norm(Vec(sys.r + sys.B * eq.y_star));
    std::cout << "y* = " << format_vec(eq.y_star) << "\n";
    std::cout << "residual = " << format_double(residual) << "\n";
    return kExitCertified;
  } catch (const NotInteriorError& e) {
    std::cerr << "no interior equilibrium: " << e.what() << "\n";
    return kExitNotInterior;
  } catch (const SingularMatrixError& e) {
    std::cerr << "singular interaction matrix: " << e.what() << "\n";
    return kExitSingular;
  }
}

int cmd_certify(const SystemFile& sf, const SearchBudget& budget, const std::string& out_path) {
  NormalizedInput in = normalize_input(sf);
  AutoCertifyResult result = auto_certify(in.A, budget);

  CertificateReport rep;
  rep.status = result.certificate ? "certified" : "inconclusive";
  rep.stage = result.stage;
  rep.input_echo = in.echo;
  rep.equilibrium = in.equilibrium;
  rep.A = in.A;
  rep.certificate = result.certificate;
  rep.stage_best = result.stage_best;
  rep.budget = budget;
  rep.evals_used = result.evals_used;

  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot write report to " << out_path << "\n";
    return kExitBadInput;
  }
  out << report_to_json(rep).dump(2) << "\n";

  std::cout << "status: " << rep.status << "\n";
  if (result.certificate) {
    std::cout << "family: " << to_string(result.certificate->family) << " (stage " << result.stage
              << ")\n";
    for (const auto& [name, value] : result.certificate->margins)
      std::cout << "  margin " << name << " = " << format_double(value) << "\n";
    for (const std::string& side : result.certificate->side_conditions)
      std::cout << "  side condition: " << side << "\n";
  } else {
    for (const auto& [name, value] : result.stage_best)
      std::cout << "  best " << name << " = " << format_double(value) << "\n";
    std::cout << "inconclusive: no certificate found within budget (not a disproof)\n";
  }
  std::cout << "report written to " << out_path << "\n";
  return result.certificate ? kExitCertified : kExitInconclusive;
}

int cmd_simulate(const SystemFile& sf, const std::string& x0_text, double t_end,
                 const IntegrateOptions& iopts, const std::string& out_path) {
  NormalizedInput in = normalize_input(sf);
  const Vec x0 = parse_vector_option(x0_text, in.A.rows());
  try {
    Trajectory traj = integrate(in.A, x0, t_end, iopts);
    if (out_path.empty()) {
      write_trajectory_csv(traj, std::cout);
    } else {
      std::ofstream out(out_path);
      if (!out) {
        std::cerr << "cannot write " << out_path << "\n";
        return kExitBadInput;
      }
      write_trajectory_csv(traj, out);
    }
    std::cerr << "steps: " << traj.step_stats.accepted << " accepted, "
              << traj.step_stats.rejected << " rejected, max error estimate "
              << format_double(traj.step_stats.max_error_estimate) << "\n";
    return kExitCertified;
  } catch (const BlowUpError& e) {
    std::cerr << e.what() << "\n";
    return kExitBlowUp;
  } catch (const StepSizeUnderflowError& e) {
    std::cerr << e.what() << "\n";
    return kExitUnderflow;
  }
}

int cmd_lyapunov_check(const SystemFile& sf, const std::string& report_path,
                       const std::string& x0_text, double t_end, const IntegrateOptions& iopts) {
  NormalizedInput in = normalize_input(sf);
  CertificateReport rep = load_report(report_path);
  if (!rep.certificate) {
    std::cerr << "report carries no certificate (status " << rep.status << ")\n";
    return kExitBadInput;
  }
  if (inf_norm(Mat(rep.A - in.A)) > 1e-9 * (1.0 + inf_norm(in.A))) {
    std::cerr << "report was produced for a different system\n";
    return kExitBadInput;
  }
  // the serialized parameters must still verify
  CheckResult recheck =
      check_theorem1(in.A, rep.certificate->params, rep.certificate->invariant_set);
  if (!recheck.passed()) {
    std::cerr << "serialized certificate no longer verifies:\n";
    for (const std::string& f : recheck.failures) std::cerr << "  " << f << "\n";
    return kExitInconclusive;
  }

  const Vec x0 = parse_vector_option(x0_text, in.A.rows());
  LyapunovCheckResult check = lyapunov_check(in.A, *rep.certificate, x0, t_end, iopts);
  std::cout << "c = " << format_double(check.c_used)
            << ", trajectory sup p^T(x-1) = " << format_double(check.trajectory_sup) << "\n";
  if (check.passed) {
    std::cout << "U_c nonincreasing along the trajectory (max step increase "
              << format_double(check.max_monotone_violation) << ")\n";
    std::cout << "finite-difference agreement at " << check.fd_checked
              << " points (max relative error " << format_double(check.max_fd_rel_err) << ")\n";
    return kExitCertified;
  }
  std::cerr << "violation: " << check.failure << "\n";
  if (check.violation_time >= 0.0)
    std::cerr << "  at t = " << format_double(check.violation_time) << "\n";
  return kExitInconclusive;
}

struct ReproduceChecker {
  int failures = 0;

  void expect(bool ok, const std::string& what, const std::string& detail = {}) {
    if (ok) {
      std::cout << "ok: " << what << "\n";
    } else {
      std::cout << "MISMATCH: " << what;
      if (!detail.empty()) std::cout << " (" << detail << ")";
      std::cout << "\n";
      ++failures;
    }
  }
};

int cmd_reproduce(const std::string& which, const SearchBudget& budget) {
  ReproduceChecker check;
  if (which == "example1") {
    SystemFile sf = fixture_example1();
    LVSystem sys{*sf.r, *sf.B};
    InteriorEquilibrium eq = find_interior_equilibrium(sys);
    Vec expected_y(3);
    expected_y << 2.5, 0.5, 1.0 / 6.0;
    check.expect(inf_norm(Vec(eq.y_star - expected_y)) <= 1e-12,
                 "interior equilibrium (5/2, 1/2, 1/6)",
                 "got " + format_vec(eq.y_star));

    const Mat A = normalize(sys, eq).A;
    Mat expected_A(3, 3);
    expected_A << -5, 0, 3, -5, -1, 0, -5, -1, -1.0 / 3.0;
    expected_A *= 0.5;
    check.expect(inf_norm(Mat(A - expected_A)) <= 1e-12, "normalized interaction matrix");

    Theorem1Params tp = Theorem1Params::zeros(3);
    tp.k = Vec(3);
    tp.k << 1.0, 0.5, 1.25;
    tp.b = -0.25;
    const Mat R = theorem1_R(A, tp);
    Mat expected_R(3, 3);
    expected_R << 600, 66, -77, 66, 108, 197, -77, 197, 470;
    expected_R *= -1.0 / 768.0;
    check.expect(inf_norm(Mat(R - expected_R)) <= 1e-12, "certificate matrix R");
    check.expect(classify_definiteness(R).cls == Definiteness::negative_definite,
                 "R negative definite");
    CheckResult t1 = check_theorem1(A, tp, InvariantSetArgument::r_definite());
    check.expect(t1.passed() && t1.certificate->family == CertificateFamily::theorem1_c,
                 "certificate verifies as theorem1_c");

    AutoCertifyResult ac = auto_certify(A, budget);
    check.expect(ac.certificate.has_value(), "automatic search certifies the system");
    if (ac.certificate)
      std::cout << "  (search found family " << to_string(ac.certificate->family) << " at stage "
                << ac.stage << ")\n";
  } else if (which == "example2") {
    SystemFile sf = fixture_example2();
    const Mat A = *sf.A;
    VolterraSearchOutcome vl = search_volterra_lyapunov(A, budget);
    check.expect(vl.status == SearchStatus::inconclusive,
                 "no diagonal scaling found (best lambda_max " +
                     format_double(vl.best_objective) + ")");
    CheckResult ev = check_eigenvector_conditions(A);
    check.expect(!ev.passed(), "eigenvector conditions fail");
    std::vector<LinearConditionsCandidate> cands = solve_linear_conditions(A);
    check.expect(cands.size() == 1 && cands[0].trivial,
                 "only the trivial solution of the linear conditions");
    AutoCertifyResult ac = auto_certify(A, budget);
    check.expect(!ac.certificate.has_value(), "automatic search stays inconclusive");

    EnsembleOptions eopts;
    EnsembleReport rep = ensemble_diagnostics(A, 100, budget.seed, eopts);
    std::cout << "empirical: " << rep.n_converged << "/" << rep.n_samples
              << " trajectories converged to the interior equilibrium, min liminf "
              << format_double(rep.min_liminf) << ", max limsup "
              << format_double(rep.max_limsup) << "\n";
    std::cout << "note: inconclusive is not a disproof; the attractivity status of this system "
                 "is open\n";
  } else if (which == "structured") {
    StructuredFamilyParams sfp = fixture_structured_params();
    StructuredBuild build = build_structured_family(sfp);
    CheckResult t1 = check_theorem1(build.A, build.params, build.invariant_set);
    check.expect(t1.passed() && t1.certificate->family == CertificateFamily::theorem1_b,
                 "built family verifies as theorem1_b");
    check.expect(verify_invariant_set_structured(build.A, sfp),
                 "two-point invariant set verified");

    std::vector<LinearConditionsCandidate> cands = solve_linear_conditions(build.A);
    bool recovered = false;
    const Vec y = sfp.y_star();
    for (const LinearConditionsCandidate& cand : cands) {
      if (cand.trivial) continue;
      const double s = y.norm();  // candidates are unit-norm; (p, kappa) scale jointly
      if (inf_norm(Vec(s * cand.p + y)) <= 1e-8 &&
          std::abs(s * cand.kappa - sfp.lambda2) <= 1e-8 &&
          std::abs(cand.mu - 1.0 / sfp.lambda2) <= 1e-8)
        recovered = true;
    }
    check.expect(recovered, "linear conditions recover (p, beta, kappa, mu)");

    AutoCertifyResult ac = auto_certify(build.A, budget);
    check.expect(ac.certificate.has_value() &&
                     ac.certificate->family == CertificateFamily::theorem1_b,
                 "automatic search certifies via the structured route");
    if (ac.certificate) std::cout << "  (stage " << ac.stage << ")\n";
  } else {
    std::cerr << "unknown reproduction id: " << which << "\n";
    return kExitBadInput;
  }
  if (check.failures == 0) {
    std::cout << "all checks passed\n";
    return kExitCertified;
  }
  std::cout << check.failures << " check(s) failed\n";
  return kExitInconclusive;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lyapunov certification toolkit for Lotka-Volterra interior equilibria"};
  app.require_subcommand(1);

  std::string input_path, out_path, report_path, x0_text, reproduce_id;
  SearchBudget budget;
  IntegrateOptions iopts;
  double t_end = 100.0;
  int n_samples = 201;

  auto add_budget_flags = [&budget](CLI::App* cmd) {
    cmd->add_option("--budget-restarts", budget.max_restarts, "search restarts");
    cmd->add_option("--budget-evals", budget.max_evals_per_restart,
                    "objective evaluations per restart");
    cmd->add_option("--seed", budget.seed, "search seed");
  };
  auto add_integration_flags = [&](CLI::App* cmd) {
    cmd->add_option("--rtol", iopts.rtol, "relative tolerance");
    cmd->add_option("--atol", iopts.atol, "absolute tolerance");
    cmd->add_option("--t-end", t_end, "integration horizon");
    cmd->add_option("--samples", n_samples, "number of output samples");
  };

  CLI::App* eq = app.add_subcommand("equilibrium", "solve for the interior equilibrium");
  eq->add_option("input", input_path, "system file (JSON)")->required();

  CLI::App* certify = app.add_subcommand("certify", "search for a global-attractivity certificate");
  certify->add_option("input", input_path, "system file (JSON)")->required();
  certify->add_option("--out", out_path, "report path (JSON)")->default_val("lvcert_report.json");
  add_budget_flags(certify);

  CLI::App* simulate = app.add_subcommand("simulate", "integrate the system and export CSV");
  simulate->add_option("input", input_path, "system file (JSON)")->required();
  simulate->add_option("--x0", x0_text, "initial state, comma separated")->required();
  simulate->add_option("--out", out_path, "CSV path (stdout when omitted)");
  add_integration_flags(simulate);

  CLI::App* lyap = app.add_subcommand("lyapunov-check",
                                      "validate a certificate along a trajectory");
  lyap->add_option("input", input_path, "system file (JSON)")->required();
  lyap->add_option("--report", report_path, "certificate report (JSON)")->required();
  lyap->add_option("--x0", x0_text, "initial state, comma separated")->required();
  add_integration_flags(lyap);

  CLI::App* repro = app.add_subcommand("reproduce", "re-run a built-in reference system");
  repro->add_option("id", reproduce_id, "example1 | example2 | structured")->required();
  add_budget_flags(repro);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*eq) return cmd_equilibrium(input_path);
    if (*certify) return cmd_certify(load_system_file(input_path), budget, out_path);
    if (*simulate) {
      iopts.n_samples = n_samples;
      return cmd_simulate(load_system_file(input_path), x0_text, t_end, iopts, out_path);
    }
    if (*lyap) {
      iopts.n_samples = n_samples;
      return cmd_lyapunov_check(load_system_file(input_path), report_path, x0_text, t_end, iopts);
    }
    if (*repro) return cmd_reproduce(reproduce_id, budget);
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const NotInteriorError& e) {
    std::cerr << e.what() << "\n";
    return kExitNotInterior;
  } catch (const SingularMatrixError& e) {
    std::cerr << e.what() << "\n";
    return kExitSingular;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitBadInput;
}
