#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "lvcert/sim.hpp"

using namespace lvcert;
using namespace lvcert::testing;

namespace {

/// Closed form of the one-dimensional case with A = (-1):
/// dx/dt = -x(x-1), x(t) = x0 / (x0 + (1-x0) e^{-t}).
/// Check by differentiation: d/dt [x0/D] = x0 (1-x0) e^{-t} / D^2 with
/// D = x0 + (1-x0) e^{-t}, and -x(x-1) = x0 (D - x0)/D^2 = same value.
double logistic_closed_form(double x0, double t) {
  return x0 / (x0 + (1.0 - x0) * std::exp(-t));
}

}  // namespace

TEST_CASE("equilibrium initial condition stays put") {
  const Trajectory traj = integrate(example1_A(), Vec::Ones(3), 10.0);
  for (const Vec& x : traj.states) REQUIRE(inf_norm(Vec(x - Vec::Ones(3))) == 0.0);
  REQUIRE(traj.step_stats.rejected == 0);
}

TEST_CASE("reference trajectory against a tighter reference integration") {
  Vec x0(3);
  x0 << 0.5, 2.0, 1.5;
  IntegrateOptions ref_opts;
  ref_opts.rtol = 1e-12;
  ref_opts.atol = 1e-14;
  const Trajectory reference = integrate(example1_A(), x0, 200.0, ref_opts);
  const Trajectory traj = integrate(example1_A(), x0, 200.0);
  REQUIRE(inf_norm(Vec(traj.states.back() - reference.states.back())) <= 1e-6);
  // the slow mode of this system decays like exp(-0.0387 t): still about
  // 1e-4 from the equilibrium at t = 200, inside 1e-6 only near t = 360
  const double dist200 = inf_norm(Vec(reference.states.back() - Vec::Ones(3)));
  REQUIRE(dist200 < 1e-3);
  REQUIRE(dist200 > 1e-5);

  const Trajectory longer = integrate(example1_A(), x0, 500.0);
  REQUIRE(inf_norm(Vec(longer.states.back() - Vec::Ones(3))) <= 1e-6);
}

TEST_CASE("scalar logistic case matches the closed form") {
  Mat A(1, 1);
  A << -1.0;
  Vec x0(1);
  x0 << 2.0;
  IntegrateOptions opts;
  opts.rtol = 1e-10;
  opts.atol = 1e-12;
  const Trajectory traj = integrate(A, x0, 10.0, opts);
  for (std::size_t s = 0; s < traj.states.size(); ++s)
    REQUIRE(traj.states[s][0] ==
            Catch::Approx(logistic_closed_form(2.0, traj.times[s])).margin(1e-8));
}

TEST_CASE("observed convergence order on the closed-form case") {
  Mat A(1, 1);
  A << -1.0;
  Vec x0(1);
  x0 << 2.0;
  std::vector<double> log_h, log_err;
  for (double rtol : {1e-4, 1e-6, 1e-8, 1e-10}) {
    IntegrateOptions opts;
    opts.rtol = rtol;
    opts.atol = 1e-14;
    const Trajectory traj = integrate(A, x0, 10.0, opts);
    const double err =
        std::abs(traj.states.back()[0] - logistic_closed_form(2.0, 10.0));
    if (err < 1e-14) continue;  // at the rounding floor
    const double mean_h = 10.0 / static_cast<double>(traj.step_stats.accepted);
    log_h.push_back(std::log(mean_h));
    log_err.push_back(std::log(err));
  }
  REQUIRE(log_h.size() >= 3);
  // least-squares slope of log err against log h
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(log_h.size());
  for (std::size_t i = 0; i < log_h.size(); ++i) {
    sx += log_h[i];
    sy += log_err[i];
    sxx += log_h[i] * log_h[i];
    sxy += log_h[i] * log_err[i];
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  INFO("observed order " << slope);
  REQUIRE(slope >= 4.0);
}

TEST_CASE("unbounded escape raises the overflow guard") {
  SECTION("finite-time escape") {
    // dx/dt = x(x-1) from 2 blows up around t = ln 2; the step size collapses
    // there with the state already far out
    Mat A = Mat::Identity(2, 2);
    Vec x0(2);
    x0 << 2.0, 2.0;
    REQUIRE_THROWS_AS(integrate(A, x0, 100.0), BlowUpError);
  }
  SECTION("exponential escape reaches the overflow guard itself") {
    // x2 stays fixed at 2, so x1 grows like e^t and crosses 1e150 near t=345
    Mat A(2, 2);
    A << 0, 1, 0, 0;
    Vec x0(2);
    x0 << 2.0, 2.0;
    REQUIRE_THROWS_AS(integrate(A, x0, 400.0), BlowUpError);
  }
}

TEST_CASE("input validation") {
  REQUIRE_THROWS_AS(integrate(example1_A(), Vec::Zero(3), 1.0), NotInteriorError);
  REQUIRE_THROWS_AS(integrate(example1_A(), Vec::Ones(3), -1.0), InvalidParamsError);
  IntegrateOptions opts;
  opts.sample_times = {0.5, 0.4};
  REQUIRE_THROWS_AS(integrate(example1_A(), Vec::Ones(3), 1.0, opts), InvalidParamsError);
}

TEST_CASE("trajectories are deterministic and interior") {
  Vec x0(3);
  x0 << 0.5, 2.0, 1.5;
  const Trajectory a = integrate(example1_A(), x0, 50.0);
  const Trajectory b = integrate(example1_A(), x0, 50.0);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t s = 0; s < a.states.size(); ++s) {
    REQUIRE(a.times[s] == b.times[s]);
    for (Index i = 0; i < 3; ++i) {
      REQUIRE(a.states[s][i] == b.states[s][i]);
      REQUIRE(a.states[s][i] > 0.0);
    }
    if (s > 0) REQUIRE(a.times[s] > a.times[s - 1]);
  }
}

TEST_CASE("persistence analysis") {
  SECTION("constant trajectory converges immediately") {
    const Trajectory traj = integrate(example1_A(), Vec::Ones(3), 5.0);
    const PersistenceReport rep = analyze(traj);
    REQUIRE(rep.converged_to.has_value());
    REQUIRE(inf_norm(Vec(*rep.converged_to - Vec::Ones(3))) == 0.0);
    REQUIRE(rep.convergence_time.has_value());
    REQUIRE(*rep.convergence_time == 0.0);
  }
  SECTION("reference trajectory persists and converges") {
    Vec x0(3);
    x0 << 0.5, 2.0, 1.5;
    const Trajectory traj = integrate(example1_A(), x0, 500.0);
    const PersistenceReport rep = analyze(traj);
    REQUIRE(rep.liminf_estimates.minCoeff() > 0.1);
    REQUIRE(rep.converged_to.has_value());
    REQUIRE(rep.uniform_bound_estimate < 2.0);
  }
  SECTION("escaping trajectory does not converge") {
    // dx/dt = x(x-1) from x0 = 2 escapes in finite time (around t = ln 2);
    // stop well before that
    Mat A = Mat::Identity(2, 2);
    Vec x0(2);
    x0 << 2.0, 2.0;
    IntegrateOptions opts;
    opts.n_samples = 50;
    const Trajectory traj = integrate(A, x0, 0.5, opts);
    const PersistenceReport rep = analyze(traj);
    REQUIRE_FALSE(rep.converged_to.has_value());
    REQUIRE(rep.limsup_estimates.minCoeff() > 2.0);
  }
  SECTION("needs at least two samples") {
    Trajectory tiny;
    tiny.times = {0.0};
    tiny.states = {Vec::Ones(2)};
    REQUIRE_THROWS_AS(analyze(tiny), InvalidParamsError);
  }
}

TEST_CASE("ensemble diagnostics") {
  SECTION("decoupled logistic components all converge") {
    const EnsembleReport rep = ensemble_diagnostics(Mat(-Mat::Identity(3, 3)), 10, 7);
    REQUIRE(rep.n_samples == 10);
    REQUIRE(rep.n_converged == 10);
    REQUIRE(rep.n_unbounded == 0);
    REQUIRE(rep.min_liminf > 0.9);
  }
  SECTION("reference system converges from a wide box") {
    EnsembleOptions opts;
    opts.t_end = 500.0;
    const EnsembleReport rep = ensemble_diagnostics(example1_A(), 20, 1, opts);
    REQUIRE(rep.n_converged == 20);
    REQUIRE(rep.max_terminal_error <= 1e-6);
  }
  SECTION("open-conjecture system: statistics reported, nothing claimed") {
    EnsembleOptions opts;
    opts.t_end = 200.0;
    const EnsembleReport rep = ensemble_diagnostics(example2_A(), 20, 3, opts);
    REQUIRE(rep.n_samples == 20);
    REQUIRE(rep.n_converged + rep.n_unbounded + rep.n_failed <= 20);
    REQUIRE(static_cast<int>(rep.reports.size()) == rep.n_samples - rep.n_unbounded - rep.n_failed);
  }
  SECTION("blow-ups are recorded without aborting") {
    // any sample with a component above 1 escapes (blow-up); samples fully
    // below 1 decay to the extinction boundary and stop on the positivity
    // floor instead
    const EnsembleReport rep = ensemble_diagnostics(Mat::Identity(2, 2), 5, 11);
    REQUIRE(rep.n_converged == 0);
    REQUIRE(rep.n_unbounded >= 1);
    REQUIRE(rep.n_unbounded + rep.n_failed == 5);
  }
  SECTION("deterministic given the seed") {
    const EnsembleReport a = ensemble_diagnostics(example1_A(), 5, 99);
    const EnsembleReport b = ensemble_diagnostics(example1_A(), 5, 99);
    REQUIRE(a.max_terminal_error == b.max_terminal_error);
    REQUIRE(a.min_liminf == b.min_liminf);
  }
}
