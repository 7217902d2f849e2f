#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "lvcert/common.hpp"
#include "lvcert/model.hpp"
#include "lvcert/parallel.hpp"

namespace lvcert {

struct IntegrateOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double h_init = 0.0;  // 0 = automatic
  double h_min = 1e-14;
  double blowup_norm = 1e150;
  long max_steps = 50'000'000;
  std::vector<double> sample_times;  // empty = uniform grid with n_samples points
  int n_samples = 201;
};

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  double max_error_estimate = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<double> field_norms;  // ||diag(x)A(x-1)||_inf at each sample
  StepStats step_stats;
};

namespace detail {

// Dormand-Prince 5(4) tableau with the standard quartic dense-output
// interpolant.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                          a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  Vec r1, r2, r3, r4, r5;

  Vec eval(double t) const {
    const double theta = (t - t0) / h;
    const double om = 1.0 - theta;
    return r1 + theta * (r2 + om * (r3 + theta * (r4 + om * r5)));
  }
};

}  // namespace detail

/// Integrates dx/dt = diag(x) A (x - 1) with an adaptive embedded 4(5) pair.
/// Dense output is emitted at the requested sample times. A step whose
/// endpoint would cross the positivity floor is rejected and retried smaller,
/// so accepted states stay interior. States exceeding the overflow guard
/// raise BlowUpError (unbounded solution); a vanishing step size raises
/// StepSizeUnderflowError.
inline Trajectory integrate(const Mat& A, const Vec& x0, double t_end,
                            const IntegrateOptions& opts = {}) {
  using D = detail::Dopri5;
  const Index n = A.rows();
  if (x0.size() != n) throw DimensionError("integrate: x0 dimension mismatch");
  if (!(t_end > 0.0)) throw InvalidParamsError("integrate: t_end must be > 0");
  for (Index i = 0; i < n; ++i)
    if (!(x0[i] > 0.0)) throw NotInteriorError("integrate: x0 must be componentwise > 0");

  std::vector<double> samples = opts.sample_times;
  if (samples.empty()) {
    samples.resize(static_cast<std::size_t>(std::max(2, opts.n_samples)));
    const double dt = t_end / static_cast<double>(samples.size() - 1);
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = dt * static_cast<double>(i);
    samples.back() = t_end;
  } else {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i] < 0.0 || samples[i] > t_end || (i > 0 && samples[i] <= samples[i - 1]))
        throw InvalidParamsError("integrate: sample times must be increasing within [0, t_end]");
    }
  }

  auto field = [&A](const Vec& x) { return normalized_field(A, x); };

  Trajectory traj;
  traj.times.reserve(samples.size());
  traj.states.reserve(samples.size());

  Vec x = x0;
  double t = 0.0;
  Vec k1 = field(x);

  std::size_t next_sample = 0;
  auto emit_upto = [&](double t_seg_end, const detail::DenseSegment* seg) {
    while (next_sample < samples.size() && samples[next_sample] <= t_seg_end + 1e-300) {
      const double ts = samples[next_sample];
      Vec xs = seg ? seg->eval(ts) : x;
      traj.times.push_back(ts);
      traj.field_norms.push_back(inf_norm(field(xs)));
      traj.states.push_back(std::move(xs));
      ++next_sample;
    }
  };
  if (!samples.empty() && samples[0] == 0.0) emit_upto(0.0, nullptr);

  double h = opts.h_init;
  if (!(h > 0.0)) {
    const double fn = std::max(inf_norm(k1), 1e-12);
    h = std::min(0.01 * (1.0 + inf_norm(x)) / fn, t_end);
    h = std::max(h, 16.0 * opts.h_min);
  }

  // finite-time escapes collapse the step size long before the state can
  // represent the overflow guard; a state this far out with a vanishing step
  // is an unbounded solution, not a solver failure
  const double escape_norm = 1e6 * (1.0 + inf_norm(x0));

  Vec k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), x_new(n), err(n);
  for (long step = 0; step < opts.max_steps && t < t_end; ++step) {
    h = std::min(h, t_end - t);
    if (!(h >= opts.h_min)) {
      if (inf_norm(x) > escape_norm)
        throw BlowUpError("integrate: finite-time escape at t=" + std::to_string(t) +
                          " (unbounded solution)");
      throw StepSizeUnderflowError("integrate: step size underflow at t=" + std::to_string(t));
    }

    k2 = field(Vec(x + h * (D::a21 * k1)));
    k3 = field(Vec(x + h * (D::a31 * k1 + D::a32 * k2)));
    k4 = field(Vec(x + h * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3)));
    k5 = field(Vec(x + h * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4)));
    k6 = field(Vec(x + h * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 + D::a64 * k4 + D::a65 * k5)));
    x_new = x + h * (D::a71 * k1 + D::a73 * k3 + D::a74 * k4 + D::a75 * k5 + D::a76 * k6);
    k7 = field(x_new);

    err = h * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 + D::e6 * k6 + D::e7 * k7);
    double err_norm = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double sc = opts.atol + opts.rtol * std::max(std::abs(x[i]), std::abs(x_new[i]));
      const double q = err[i] / sc;
      err_norm += q * q;
    }
    err_norm = std::sqrt(err_norm / static_cast<double>(n));

    bool positive = true;
    for (Index i = 0; i < n; ++i)
      if (!(x_new[i] > opts.atol)) positive = false;

    if (err_norm <= 1.0 && positive) {
      if (inf_norm(x_new) > opts.blowup_norm)
        throw BlowUpError("integrate: state norm exceeded overflow guard at t=" +
                          std::to_string(t + h) + " (unbounded solution)");
      detail::DenseSegment seg;
      seg.t0 = t;
      seg.h = h;
      seg.r1 = x;
      seg.r2 = x_new - x;
      seg.r3 = h * k1 - seg.r2;
      seg.r4 = seg.r2 - h * k7 - seg.r3;
      seg.r5 = h * (D::d1 * k1 + D::d3 * k3 + D::d4 * k4 + D::d5 * k5 + D::d6 * k6 + D::d7 * k7);
      emit_upto(t + h, &seg);

      t += h;
      x.swap(x_new);
      k1.swap(k7);  // first-same-as-last
      traj.step_stats.accepted += 1;
      traj.step_stats.max_error_estimate =
          std::max(traj.step_stats.max_error_estimate, err_norm);
      const double factor = err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
      h *= std::clamp(factor, 0.2, 5.0);
    } else {
      traj.step_stats.rejected += 1;
      if (!positive) {
        h *= 0.5;
      } else {
        const double factor = 0.9 * std::pow(err_norm, -0.2);
        h *= std::clamp(factor, 0.1, 0.9);
      }
    }
  }
  if (t < t_end)
    throw StepSizeUnderflowError("integrate: step budget exhausted at t=" + std::to_string(t));

  // flush any terminal samples that coincide with t_end
  if (next_sample < samples.size()) {
    detail::DenseSegment flat;
    flat.t0 = t;
    flat.h = 1.0;
    flat.r1 = x;
    flat.r2 = flat.r3 = flat.r4 = flat.r5 = Vec::Zero(n);
    emit_upto(t_end, &flat);
  }
  return traj;
}

struct AnalyzeOptions {
  int tail_window = 50;
  double conv_tol = 1e-6;
  std::optional<Vec> equilibrium;  // defaults to the all-ones point
};

/// Empirical surrogates for the asymptotic lower/upper bounds: componentwise
/// extrema over the trajectory tail, plus convergence detection.
struct PersistenceReport {
  Vec liminf_estimates;
  Vec limsup_estimates;
  double uniform_bound_estimate = 0.0;
  std::optional<Vec> converged_to;
  std::optional<double> convergence_time;
};

inline PersistenceReport analyze(const Trajectory& traj, const AnalyzeOptions& opts = {}) {
  const std::size_t len = traj.states.size();
  if (len < 2) throw InvalidParamsError("analyze: trajectory needs at least 2 samples");
  const std::size_t window = std::min<std::size_t>(std::max(opts.tail_window, 2), len);
  const Index n = traj.states.front().size();

  PersistenceReport rep;
  rep.liminf_estimates = traj.states[len - window];
  rep.limsup_estimates = traj.states[len - window];
  for (std::size_t s = len - window; s < len; ++s) {
    rep.liminf_estimates = rep.liminf_estimates.cwiseMin(traj.states[s]);
    rep.limsup_estimates = rep.limsup_estimates.cwiseMax(traj.states[s]);
  }
  rep.uniform_bound_estimate = rep.limsup_estimates.maxCoeff();

  const Vec eq = opts.equilibrium.value_or(Vec::Ones(n));
  const Vec& last = traj.states.back();
  const double dist = inf_norm(Vec(last - eq));
  const double field_at_last = traj.field_norms.empty() ? 0.0 : traj.field_norms.back();
  if (dist <= opts.conv_tol && field_at_last < opts.conv_tol) {
    rep.converged_to = eq;
    // earliest sample after which the trajectory stays inside the tolerance
    std::size_t first_inside = len - 1;
    for (std::size_t s = len; s-- > 0;) {
      if (inf_norm(Vec(traj.states[s] - eq)) <= opts.conv_tol)
        first_inside = s;
      else
        break;
    }
    rep.convergence_time = traj.times[first_inside];
  }
  return rep;
}

struct EnsembleOptions {
  double t_end = 500.0;
  double ic_log10_min = -2.0;
  double ic_log10_max = 2.0;
  IntegrateOptions integrate;
  AnalyzeOptions analyze;
};

struct EnsembleReport {
  int n_samples = 0;
  int n_converged = 0;
  int n_unbounded = 0;
  int n_failed = 0;  // step-size underflow or other integration failure
  double min_liminf = std::numeric_limits<double>::infinity();
  double max_limsup = 0.0;
  double max_terminal_error = 0.0;  // max over samples of ||x(t_end) - eq||_inf
  std::vector<PersistenceReport> reports;
};

/// Integrates from log-uniform random interior initial conditions and
/// aggregates the persistence diagnostics. Blow-ups are recorded per sample
/// (unbounded count) without aborting the ensemble; samples run in parallel
/// and are merged in sample-index order.
inline EnsembleReport ensemble_diagnostics(const Mat& A, int n_samples, std::uint64_t seed,
                                           const EnsembleOptions& opts = {}) {
  if (n_samples < 1) throw InvalidParamsError("ensemble_diagnostics: n_samples must be >= 1");
  const Index n = A.rows();

  struct SampleOutcome {
    int status = 0;  // 0 ok, 1 unbounded, 2 failed
    PersistenceReport report;
    double terminal_error = 0.0;
  };
  std::vector<SampleOutcome> outcomes(static_cast<std::size_t>(n_samples));
  const Vec eq = opts.analyze.equilibrium.value_or(Vec::Ones(n));

  parallel_for(n_samples, [&](int s) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(s)));
    Vec x0(n);
    for (Index i = 0; i < n; ++i)
      x0[i] = std::pow(10.0, rng.uniform(opts.ic_log10_min, opts.ic_log10_max));
    SampleOutcome& slot = outcomes[static_cast<std::size_t>(s)];
    try {
      Trajectory traj = integrate(A, x0, opts.t_end, opts.integrate);
      slot.report = analyze(traj, opts.analyze);
      slot.terminal_error = inf_norm(Vec(traj.states.back() - eq));
    } catch (const BlowUpError&) {
      slot.status = 1;
    } catch (const StepSizeUnderflowError&) {
      slot.status = 2;
    }
  });

  EnsembleReport rep;
  rep.n_samples = n_samples;
  for (const SampleOutcome& slot : outcomes) {
    if (slot.status == 1) {
      rep.n_unbounded += 1;
      continue;
    }
    if (slot.status == 2) {
      rep.n_failed += 1;
      continue;
    }
    rep.reports.push_back(slot.report);
    rep.min_liminf = std::min(rep.min_liminf, slot.report.liminf_estimates.minCoeff());
    rep.max_limsup = std::max(rep.max_limsup, slot.report.limsup_estimates.maxCoeff());
    rep.max_terminal_error = std::max(rep.max_terminal_error, slot.terminal_error);
    if (slot.report.converged_to) rep.n_converged += 1;
  }
  return rep;
}

}  // namespace lvcert
