#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lvcert/certificates.hpp"
#include "lvcert/common.hpp"
#include "lvcert/lyapunov.hpp"
#include "lvcert/sim.hpp"

namespace lvcert {

/// Short exact-flow hop used for derivative cross-checks: classic RK4 with
/// substeps, valid for either sign of dt. For |dt| around 1e-6 the local
/// error is far below double precision.
inline Vec flow_rk4(const Mat& A, Vec x, double dt, int substeps = 8) {
  const double h = dt / substeps;
  for (int s = 0; s < substeps; ++s) {
    const Vec k1 = normalized_field(A, x);
    const Vec k2 = normalized_field(A, Vec(x + 0.5 * h * k1));
    const Vec k3 = normalized_field(A, Vec(x + 0.5 * h * k2));
    const Vec k4 = normalized_field(A, Vec(x + h * k3));
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

struct LyapunovCheckOptions {
  int fd_points = 100;
  double monotone_tol = 1e-8;   // absolute, per step
  double fd_rel_tol = 1e-5;
  double fd_step_factor = 1e-6;  // step = factor * (1 + |t|)
};

struct LyapunovCheckResult {
  bool passed = false;
  std::string failure;
  double violation_time = -1.0;
  int fd_checked = 0;
  double max_fd_rel_err = 0.0;
  double max_monotone_violation = 0.0;
  double trajectory_sup = 0.0;
  double c_used = 0.0;
  std::size_t first_checked_sample = 0;
};

/// Validates a certificate dynamically along one trajectory: picks c from the
/// trapping bound, requires U_c nonincreasing sample to sample, and requires
/// the analytic derivative to match centered finite differences along the
/// flow. Checking starts after the trapping time, operationalized as the
/// first sample index from which S stays above epsilon (kappa/2 when p = 0,
/// otherwise estimated from the trajectory tail).
inline LyapunovCheckResult lyapunov_check(const Mat& A, const Certificate& cert, const Vec& x0,
                                          double t_end, const IntegrateOptions& iopts = {},
                                          const LyapunovCheckOptions& opts = {}) {
  LyapunovCheckResult out;
  Trajectory traj = integrate(A, x0, t_end, iopts);
  const std::size_t len = traj.states.size();
  const Theorem1Params& tp = cert.params;
  const Vec ones = Vec::Ones(A.rows());

  double sup_pd = tp.p.dot(x0 - ones);
  std::vector<double> s_values(len);
  for (std::size_t i = 0; i < len; ++i) {
    const double pd = tp.p.dot(traj.states[i] - ones);
    sup_pd = std::max(sup_pd, pd);
    s_values[i] = pd + tp.kappa;
  }
  out.trajectory_sup = sup_pd;

  LyapunovContext ctx = LyapunovContext::make(A, tp, 1.0);
  out.c_used = choose_c(ctx, sup_pd, cert.family);
  ctx = LyapunovContext::make(A, tp, out.c_used);

  // trapping time
  double eps = 0.5 * tp.kappa;
  if (inf_norm(tp.p) > 1e-12) {
    double tail_min = s_values[len - 1];
    for (std::size_t i = len / 2; i < len; ++i) tail_min = std::min(tail_min, s_values[i]);
    eps = std::min(eps, 0.5 * tail_min);
  }
  std::size_t start = len;
  for (std::size_t i = len; i-- > 0;) {
    if (s_values[i] >= eps)
      start = i;
    else
      break;
  }
  if (start >= len) {
    out.failure = "trajectory never enters the S >= epsilon region";
    return out;
  }
  out.first_checked_sample = start;

  std::vector<double> u_values(len, 0.0);
  for (std::size_t i = start; i < len; ++i) {
    try {
      u_values[i] = eval_Uc(ctx, traj.states[i]);
    } catch (const DomainError& e) {
      out.failure = std::string("U_c undefined at t=") + std::to_string(traj.times[i]) + ": " +
                    e.what();
      out.violation_time = traj.times[i];
      return out;
    }
  }

  for (std::size_t i = start; i + 1 < len; ++i) {
    const double increase = u_values[i + 1] - u_values[i];
    out.max_monotone_violation = std::max(out.max_monotone_violation, increase);
    if (increase > opts.monotone_tol) {
      out.failure = "U_c increased by " + std::to_string(increase) + " across step at t=" +
                    std::to_string(traj.times[i + 1]);
      out.violation_time = traj.times[i + 1];
      return out;
    }
  }

  const std::size_t span = len - start;
  const int points = std::min<int>(opts.fd_points, static_cast<int>(span));
  double udot_scale = 0.0;
  std::vector<std::size_t> idx(static_cast<std::size_t>(points));
  for (int j = 0; j < points; ++j) {
    idx[static_cast<std::size_t>(j)] =
        start + static_cast<std::size_t>((span - 1) * static_cast<double>(j) /
                                         std::max(1, points - 1));
    udot_scale = std::max(udot_scale,
                          std::abs(eval_Uc_dot(ctx, traj.states[idx[static_cast<std::size_t>(j)]])));
  }
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const std::size_t i = idx[j];
    const double t = traj.times[i];
    const double h = opts.fd_step_factor * (1.0 + std::abs(t));
    const Vec x_plus = flow_rk4(A, traj.states[i], h);
    const Vec x_minus = flow_rk4(A, traj.states[i], -h);
    double fd = 0.0;
    try {
      fd = (eval_Uc(ctx, x_plus) - eval_Uc(ctx, x_minus)) / (2.0 * h);
    } catch (const DomainError&) {
      continue;  // backward hop left the domain; skip the endpoint
    }
    const double analytic = eval_Uc_dot(ctx, traj.states[i]);
    const double err = std::abs(fd - analytic);
    const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-9 * (1.0 + udot_scale)});
    out.max_fd_rel_err = std::max(out.max_fd_rel_err, err / denom);
    ++out.fd_checked;
    if (err / denom > opts.fd_rel_tol) {
      out.failure = "analytic dU_c/dt disagrees with finite difference at t=" + std::to_string(t) +
                    " (relative error " + std::to_string(err / denom) + ")";
      out.violation_time = t;
      return out;
    }
  }

  out.passed = true;
  return out;
}

}  // namespace lvcert
