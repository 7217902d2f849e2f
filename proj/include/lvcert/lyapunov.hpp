#pragma once

#include <cmath>
#include <string>

#include "lvcert/certificates.hpp"
#include "lvcert/common.hpp"

namespace lvcert {

/// f(s) = s - 1 - ln(s): nonnegative on (0, inf), zero only at s = 1.
inline double f_scalar(double s) {
  if (!(s > 0.0)) throw DomainError("f_scalar: argument must be > 0");
  return s - 1.0 - std::log(s);
}

/// Evaluation context for the certificate's function family. The domain is
/// {x in int(R+^n) : p^T(x - 1) + kappa > 0}; c > 0 selects the member.
struct LyapunovContext {
  Mat A;
  Theorem1Params params;
  double c = 1.0;
  Mat R;
  Mat Q;

  static LyapunovContext make(const Mat& A, const Theorem1Params& params, double c = 1.0) {
    if (!(c > 0.0)) throw InvalidParamsError("LyapunovContext: c must be > 0");
    params.validate(A.rows());
    LyapunovContext ctx;
    ctx.A = A;
    ctx.params = params;
    ctx.c = c;
    ctx.R = theorem1_R(A, params);
    ctx.Q = theorem1_Q(A, params);
    return ctx;
  }

  Index n() const { return A.rows(); }
};

namespace detail {

inline void require_interior(const Vec& x, Index n) {
  if (x.size() != n) throw DomainError("state dimension mismatch");
  for (Index i = 0; i < n; ++i)
    if (!(x[i] > 1e-300)) throw DomainError("state must be componentwise > 0");
}

/// prod x_i^{b k_i} computed as exp(b sum k_i ln x_i); avoids overflow and
/// non-integer-power branch issues for x_i > 0.
inline double power_product(const LyapunovContext& ctx, const Vec& x) {
  double s = 0.0;
  for (Index i = 0; i < ctx.n(); ++i) s += ctx.params.k[i] * std::log(x[i]);
  return std::exp(ctx.params.b * s);
}

inline double s_value(const LyapunovContext& ctx, const Vec& x) {
  return ctx.params.p.dot(x - Vec::Ones(ctx.n())) + ctx.params.kappa;
}

inline void require_s_domain(double S) {
  if (!(S > 1e-12)) throw DomainError("p^T(x - 1) + kappa must be > 0");
}

}  // namespace detail

/// V per the two certificate branches; both vanish at the equilibrium.
inline double eval_V(const LyapunovContext& ctx, const Vec& x) {
  detail::require_interior(x, ctx.n());
  const Vec d = x - Vec::Ones(ctx.n());
  const double kd = ctx.params.k.dot(d);
  if (ctx.params.b != 0.0) {
    const double inv_b = 1.0 / ctx.params.b;
    return (kd - inv_b) * detail::power_product(ctx, x) + inv_b;
  }
  double log_sum = 0.0;
  for (Index i = 0; i < ctx.n(); ++i) log_sum += ctx.params.k[i] * std::log(x[i]);
  return kd - log_sum;
}

/// dV/dt along the flow: (x-1)^T R (x-1) * prod x_i^{b k_i}.
inline double eval_V_dot(const LyapunovContext& ctx, const Vec& x) {
  detail::require_interior(x, ctx.n());
  const Vec d = x - Vec::Ones(ctx.n());
  return d.dot(ctx.R * d) * detail::power_product(ctx, x);
}

inline double eval_S(const LyapunovContext& ctx, const Vec& x) {
  detail::require_interior(x, ctx.n());
  return detail::s_value(ctx, x);
}

/// dS/dt in the closed polynomial form; the affine alternative form is
/// evaluated as an internal consistency check (the two are algebraically
/// identical, so disagreement flags a broken context).
inline double eval_S_dot(const LyapunovContext& ctx, const Vec& x) {
  detail::require_interior(x, ctx.n());
  const Theorem1Params& tp = ctx.params;
  const Vec ones = Vec::Ones(ctx.n());
  const double S = detail::s_value(ctx, x);
  const double bx = tp.beta.dot(x);
  const double value = -S * bx + tp.g * S * S -
                       (tp.mu - tp.beta.sum() + tp.g * tp.kappa) * S + tp.kappa * tp.mu;
  const double alt =
      -S * (tp.beta - tp.g * tp.p).dot(x - ones) - tp.mu * (S - tp.kappa);
  const double mag = std::abs(value) + std::abs(alt) + std::abs(S * bx) + tp.kappa * tp.mu;
  if (std::abs(value - alt) > 1e-10 * (1.0 + mag))
    throw Error("eval_S_dot: closed forms disagree (" + std::to_string(value) + " vs " +
                std::to_string(alt) + ")");
  return value;
}

/// W_c = sum (q_i - c p_i) f(x_i) + c kappa f(S / kappa).
inline double eval_Wc(const LyapunovContext& ctx, const Vec& x) {
  detail::require_interior(x, ctx.n());
  const double S = detail::s_value(ctx, x);
  detail::require_s_domain(S);
  const Theorem1Params& tp = ctx.params;
  double acc = 0.0;
  for (Index i = 0; i < ctx.n(); ++i) acc += (tp.q[i] - ctx.c * tp.p[i]) * f_scalar(x[i]);
  return acc + ctx.c * tp.kappa * f_scalar(S / tp.kappa);
}

/// U_c per its branch closed forms; the decomposition U_c = V + W_c is
/// checked internally on every call.
inline double eval_Uc(const LyapunovContext& ctx, const Vec& x) {
  detail::require_interior(x, ctx.n());
  const double S = detail::s_value(ctx, x);
  detail::require_s_domain(S);
  const Theorem1Params& tp = ctx.params;
  double value = 0.0;
  double term_mag = 0.0;
  if (tp.b == 0.0) {
    for (Index i = 0; i < ctx.n(); ++i) {
      const double coeff = tp.q[i] + tp.k[i] - ctx.c * tp.p[i];
      value += coeff * f_scalar(x[i]);
      term_mag += std::abs(coeff) * f_scalar(x[i]);
    }
    const double tail = ctx.c * tp.kappa * f_scalar(S / tp.kappa);
    value += tail;
    term_mag += std::abs(tail);
  } else {
    const double inv_b = 1.0 / tp.b;
    const Vec d = x - Vec::Ones(ctx.n());
    const double head = (tp.k.dot(d) - inv_b) * detail::power_product(ctx, x) + inv_b;
    value = head;
    term_mag = std::abs(head);
    for (Index i = 0; i < ctx.n(); ++i) {
      const double coeff = tp.q[i] - ctx.c * tp.p[i];
      value += coeff * f_scalar(x[i]);
      term_mag += std::abs(coeff) * f_scalar(x[i]);
    }
    const double tail = ctx.c * tp.kappa * f_scalar(S / tp.kappa);
    value += tail;
    term_mag += std::abs(tail);
  }
  const double decomposed = eval_V(ctx, x) + eval_Wc(ctx, x);
  if (std::abs(value - decomposed) > 1e-12 * (1.0 + term_mag + std::abs(decomposed)))
    throw Error("eval_Uc: branch formula and V + W_c decomposition disagree");
  return value;
}

/// dU_c/dt along the flow. With R, Q negative semidefinite and c at least
/// (delta+1)/mu * (kappa + p^T(x-1)) the value is nonpositive.
inline double eval_Uc_dot(const LyapunovContext& ctx, const Vec& x) {
  detail::require_interior(x, ctx.n());
  const double S = detail::s_value(ctx, x);
  detail::require_s_domain(S);
  const Theorem1Params& tp = ctx.params;
  const Vec d = x - Vec::Ones(ctx.n());
  const double pd = tp.p.dot(d);
  return d.dot(ctx.R * d) * detail::power_product(ctx, x) + d.dot(ctx.Q * d) -
         (ctx.c * tp.mu / S - tp.delta) * pd * pd;
}

/// Smallest admissible c for the certificate family (with 10% headroom):
/// the trapping bound for statement (a), or its c*-shifted variant for
/// statements (b)/(c). trajectory_sup is sup_t p^T(x(t) - 1).
inline double choose_c(const LyapunovContext& ctx, double trajectory_sup,
                       CertificateFamily family) {
  const Theorem1Params& tp = ctx.params;
  const double base = (tp.delta + 1.0) / tp.mu * (tp.kappa + trajectory_sup);
  double c = base;
  if (family == CertificateFamily::theorem1_b || family == CertificateFamily::theorem1_c) {
    // smallest workable c*: the componentwise conditions only lower-bound it
    const double tol_p = 1e-12 * (1.0 + inf_norm(tp.p));
    double lower = 0.0;
    for (Index i = 0; i < ctx.n(); ++i) {
      if (tp.p[i] < -tol_p) {
        const double qk = tp.q[i] + tp.k[i];
        if (qk < 0.0) lower = std::max(lower, qk / tp.p[i]);
        if (family == CertificateFamily::theorem1_c && tp.q[i] < 0.0)
          lower = std::max(lower, tp.q[i] / tp.p[i]);
      }
    }
    const double c_star = std::max(1.0, 1.01 * lower);
    c = c_star + base;
  }
  return 1.1 * std::max(c, 1e-8);
}

}  // namespace lvcert
