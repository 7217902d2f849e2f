#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lvcert/certificates.hpp"
#include "lvcert/common.hpp"
#include "lvcert/matrixops.hpp"
#include "lvcert/optim.hpp"
#include "lvcert/parallel.hpp"

namespace lvcert {

struct SearchBudget {
  int max_restarts = 64;
  long max_evals_per_restart = 2000;
  std::uint64_t seed = 0;
  double target_margin = -1.0;  // < 0 picks 1e-7 * (1 + ||A||_inf)

  void validate() const {
    if (max_restarts < 1 || max_evals_per_restart < 1)
      throw InvalidParamsError("SearchBudget: counts must be >= 1");
    if (target_margin >= 0.0 && !std::isfinite(target_margin))
      throw InvalidParamsError("SearchBudget: target_margin must be finite");
  }

  double resolved_margin(const Mat& A) const {
    return target_margin >= 0.0 ? target_margin : 1e-7 * (1.0 + inf_norm(A));
  }
};

enum class SearchStatus { found, inconclusive };

inline const char* to_string(SearchStatus s) {
  return s == SearchStatus::found ? "found" : "inconclusive";
}

struct VolterraSearchOutcome {
  SearchStatus status = SearchStatus::inconclusive;
  std::optional<Vec> h;
  double best_objective = std::numeric_limits<double>::infinity();
  long evals_used = 0;
  std::optional<Certificate> certificate;
};

struct KbSearchOutcome {
  SearchStatus status = SearchStatus::inconclusive;
  std::optional<Vec> k;
  std::optional<double> b;
  double best_objective = std::numeric_limits<double>::infinity();
  long evals_used = 0;
  std::optional<Certificate> certificate;
};

namespace detail {

inline double symmetric_lambda_max(const Mat& Z) {
  Eigen::SelfAdjointEigenSolver<Mat> es(Z, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

struct RestartResult {
  double objective = std::numeric_limits<double>::infinity();
  Vec x;
  long evals = 0;
};

// Runs all restarts (possibly in parallel) and merges deterministically by
// (objective, restart index), so parallel and serial runs select the same
// witness bit-for-bit.
template <typename MakeStart, typename Objective>
RestartResult multistart(int restarts, long evals_per_restart, MakeStart&& make_start,
                         Objective&& objective, long* total_evals) {
  std::vector<RestartResult> results(static_cast<std::size_t>(restarts));
  parallel_for(restarts, [&](int r) {
    NelderMeadOptions opts;
    opts.max_evals = evals_per_restart;
    const Vec x0 = make_start(r);
    NelderMeadResult nm = nelder_mead(objective, x0, opts);
    results[static_cast<std::size_t>(r)] = {nm.f, std::move(nm.x), nm.evals};
  });
  RestartResult best = results[0];
  *total_evals = 0;
  for (const auto& res : results) *total_evals += res.evals;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].objective < best.objective) best = results[i];
  return best;
}

}  // namespace detail

/// Hunts for h > 0 making (diag(h)A)^S negative definite. h is parameterized
/// as a normalized componentwise exponential so the search is unconstrained;
/// a found witness is re-verified through the certificate checker before the
/// outcome claims success.
inline VolterraSearchOutcome search_volterra_lyapunov(const Mat& A,
                                                      const SearchBudget& budget = {}) {
  budget.validate();
  const Index n = A.rows();
  const double margin = budget.resolved_margin(A);
  const double root_n = std::sqrt(static_cast<double>(n));

  auto h_of = [n, root_n](const Vec& u) {
    Vec h(n);
    for (Index i = 0; i < n; ++i) h[i] = std::exp(std::min(u[i], 300.0));
    return Vec(root_n * h / h.norm());
  };
  auto objective = [&A, &h_of](const Vec& u) {
    return detail::symmetric_lambda_max(symmetric_part(Mat(h_of(u).asDiagonal()) * A));
  };
  auto make_start = [&](int r) {
    if (r == 0) return Vec(Vec::Zero(n));
    Rng rng(mix_seed(budget.seed, static_cast<std::uint64_t>(r)));
    return Vec(rng.normal_vec(n));
  };

  VolterraSearchOutcome out;
  const detail::RestartResult best = detail::multistart(
      budget.max_restarts, budget.max_evals_per_restart, make_start, objective, &out.evals_used);
  out.best_objective = best.objective;
  if (best.objective < -margin) {
    const Vec h = h_of(best.x);
    CheckResult check = check_volterra_lyapunov(A, h);
    if (check.passed()) {
      out.status = SearchStatus::found;
      out.h = h;
      out.certificate = check.certificate;
    }
  }
  return out;
}

/// Hunts for (k, b) making ((diag(k)+b k k^T)A)^S negative definite. The
/// rescaling (k, b) -> (ck, b/c) leaves the sign of the objective unchanged,
/// so k is normalized to the unit sphere. Restarts are seeded from the flat
/// vector, from left eigenvectors of A with negative eigenvalues, and from
/// random directions (alternating positive-orthant and unrestricted).
inline KbSearchOutcome search_kb(const Mat& A, const SearchBudget& budget = {}) {
  budget.validate();
  const Index n = A.rows();
  const double margin = budget.resolved_margin(A);

  auto split = [n](const Vec& th, Vec* k, double* b) {
    Vec kr = th.head(n);
    const double nk = kr.norm();
    if (!(nk > 1e-12)) return false;
    *k = kr / nk;
    *b = th[n];
    return true;
  };
  auto objective = [&A, &split](const Vec& th) {
    Vec k;
    double b;
    if (!split(th, &k, &b)) return 1e100;
    const Mat M = (Mat(k.asDiagonal()) + b * (k * k.transpose())) * A;
    return detail::symmetric_lambda_max(symmetric_part(M));
  };

  std::vector<Vec> eig_seeds;
  for (const LeftEigenpair& pair : left_eigenpairs(A))
    if (pair.lambda < 0.0) eig_seeds.push_back(pair.alpha);

  auto make_start = [&](int r) {
    Vec th(n + 1);
    if (r == 0) {
      th.head(n) = Vec::Ones(n) / std::sqrt(static_cast<double>(n));
      th[n] = 0.0;
      return th;
    }
    if (r >= 1 && static_cast<std::size_t>(r - 1) < eig_seeds.size()) {
      th.head(n) = eig_seeds[static_cast<std::size_t>(r - 1)];
      th[n] = 0.0;
      return th;
    }
    Rng rng(mix_seed(budget.seed, static_cast<std::uint64_t>(r)));
    Vec kr = rng.normal_vec(n);
    if (r % 2 == 0) kr = (0.7 * kr).array().exp().matrix();
    kr /= kr.norm();
    th.head(n) = kr;
    th[n] = 0.5 * rng.normal();
    return th;
  };

  KbSearchOutcome out;
  const detail::RestartResult best = detail::multistart(
      budget.max_restarts, budget.max_evals_per_restart, make_start, objective, &out.evals_used);
  out.best_objective = best.objective;
  if (best.objective < -margin) {
    Vec k;
    double b;
    if (split(best.x, &k, &b)) {
      Theorem1Params tp = Theorem1Params::zeros(n);
      tp.k = k;
      tp.b = b;
      CheckResult check = check_theorem1(A, tp, InvariantSetArgument::r_definite());
      if (check.passed()) {
        out.status = SearchStatus::found;
        out.k = k;
        out.b = b;
        out.certificate = check.certificate;
      }
    }
  }
  return out;
}

struct LinearConditionsCandidate {
  Vec p;
  Vec beta;
  double kappa = 1.0;
  double mu = 1.0;
  double g = 0.0;
  bool trivial = false;
  std::map<std::string, double> residuals;
};

namespace detail {

inline bool validate_linear_candidate(const Mat& A, LinearConditionsCandidate* cand) {
  const Index n = A.rows();
  const double tol_lin = 1e-8 * (1.0 + inf_norm(A));
  for (Index i = 0; i < n; ++i) {
    if (cand->beta[i] < 0.0) {
      if (cand->beta[i] < -1e-12) return false;
      cand->beta[i] = 0.0;
    }
  }
  if (!(cand->kappa > 1e-12) || !(cand->mu > 1e-12)) return false;
  const Mat c7 = symmetric_part(Mat(cand->p.asDiagonal()) * A +
                                (cand->beta - cand->g * cand->p) * cand->p.transpose());
  const Vec c8 = A.transpose() * cand->p + (cand->mu - cand->g * cand->kappa) * cand->p +
                 cand->kappa * cand->beta;
  const double res7 = inf_norm(c7);
  const double res8 = inf_norm(c8);
  const double slack6 = cand->mu - (cand->beta.sum() - cand->kappa * cand->g);
  cand->residuals["condition7_residual"] = res7;
  cand->residuals["condition8_residual"] = res8;
  cand->residuals["condition6_slack"] = slack6;
  return res7 <= tol_lin && res8 <= tol_lin && slack6 >= -1e-12 * (1.0 + cand->mu);
}

// Solves ||m p + kappa beta + A^T p|| -> min over (m, kappa) and reports
// mu = m + g kappa.
inline bool fit_mu_kappa(const Mat& A, const Vec& p, const Vec& beta, double g, double* mu,
                         double* kappa) {
  Mat M(p.size(), 2);
  M.col(0) = p;
  M.col(1) = beta;
  const Vec rhs = -(A.transpose() * p);
  const Vec sol = M.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
  const double m = sol[0];
  *kappa = sol[1];
  if (!( *kappa > 1e-12) && beta.norm() <= 1e-14) *kappa = 1.0;  // kappa free when beta = 0
  *mu = m + g * (*kappa);
  return std::isfinite(*mu) && std::isfinite(*kappa);
}

}  // namespace detail

/// Enumerates (p, beta, kappa, mu, g) satisfying the three linear certificate
/// conditions. Candidate directions for p come from the nullspace of the
/// pairwise constraints that the orthogonality identity forces on each
/// support of p, plus real left eigenvectors of A; every candidate is
/// validated against the full residuals before being returned. When nothing
/// nontrivial passes, the list contains exactly the trivial candidate
/// p = beta = 0.
inline std::vector<LinearConditionsCandidate> solve_linear_conditions(const Mat& A) {
  if (A.rows() != A.cols()) throw DimensionError("solve_linear_conditions: A must be square");
  const Index n = A.rows();
  const double scale = std::max(1.0, inf_norm(A));
  const std::vector<double> g_grid = {0.0, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};

  std::vector<Vec> directions;
  auto push_direction = [&](const Vec& u) {
    const double nu = u.norm();
    if (!(nu > 1e-12)) return;
    Vec v = u / nu;
    // orient toward -p in the nonnegative orthant when the sign is unambiguous
    if (v.maxCoeff() > 0.0 && v.minCoeff() >= -1e-12) v = -v;
    for (const Vec& w : directions)
      if ((w - v).norm() < 1e-8 || (w + v).norm() < 1e-8) return;
    directions.push_back(std::move(v));
  };

  // support enumeration: on the support of p the orthogonality identity
  // reduces to the homogeneous pair constraints
  //   (A_ij - A_jj) p_i + (A_ji - A_ii) p_j = 0,
  // and forces beta_j = -A_ij for every i in the support and j outside it.
  if (n <= 12) {
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      std::vector<Index> support;
      for (Index i = 0; i < n; ++i)
        if (mask & (1u << i)) support.push_back(i);
      const Index m = static_cast<Index>(support.size());

      bool cross_ok = true;
      for (Index j = 0; j < n && cross_ok; ++j) {
        if (mask & (1u << j)) continue;
        const double forced = -A(support[0], j);
        if (forced < -1e-12 * scale) cross_ok = false;
        for (Index t = 1; t < m && cross_ok; ++t)
          if (std::abs(-A(support[t], j) - forced) > 1e-10 * scale) cross_ok = false;
      }
      if (!cross_ok) continue;

      if (m == 1) {
        Vec u = Vec::Zero(n);
        u[support[0]] = 1.0;
        push_direction(u);
        continue;
      }
      Mat H(m * (m - 1) / 2, m);
      Index row = 0;
      for (Index a = 0; a < m; ++a) {
        for (Index b = a + 1; b < m; ++b) {
          const Index i = support[a], j = support[b];
          Vec r = Vec::Zero(m);
          r[a] = A(i, j) - A(j, j);
          r[b] = A(j, i) - A(i, i);
          H.row(row++) = r;
        }
      }
      Eigen::JacobiSVD<Mat> svd(H, Eigen::ComputeFullV);
      const double smax = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
      for (Index c = 0; c < svd.matrixV().cols(); ++c) {
        const double sv = c < svd.singularValues().size() ? svd.singularValues()[c] : 0.0;
        if (sv > 1e-10 * std::max(1.0, smax)) continue;
        const Vec us = svd.matrixV().col(c);
        if (us.cwiseAbs().minCoeff() < 1e-10) continue;  // belongs to a smaller support
        Vec u = Vec::Zero(n);
        for (Index t = 0; t < m; ++t) u[support[t]] = us[t];
        push_direction(u);
      }
    }
  }

  for (const LeftEigenpair& pair : left_eigenpairs(A)) push_direction(pair.alpha);

  std::vector<LinearConditionsCandidate> out;
  for (const Vec& dir : directions) {
    for (const Vec& p : {dir, Vec(-dir)}) {
      for (double g : g_grid) {
        LinearConditionsCandidate cand;
        cand.p = p;
        cand.g = g;
        cand.beta = Vec::Zero(n);
        bool ok = true;
        for (Index i = 0; i < n && ok; ++i) {
          if (std::abs(p[i]) > 1e-10) {
            cand.beta[i] = g * p[i] - A(i, i);
          } else {
            // forced by the cross terms; pick any supported row
            Index anchor = -1;
            for (Index t = 0; t < n; ++t)
              if (std::abs(p[t]) > 1e-10) { anchor = t; break; }
            if (anchor < 0) { ok = false; break; }
            cand.beta[i] = -A(anchor, i);
          }
        }
        if (!ok) continue;
        if (!detail::fit_mu_kappa(A, cand.p, cand.beta, g, &cand.mu, &cand.kappa)) continue;
        if (!detail::validate_linear_candidate(A, &cand)) continue;
        bool duplicate = false;
        for (const auto& existing : out)
          if ((existing.p - cand.p).norm() < 1e-8 && std::abs(existing.g - cand.g) < 1e-15)
            duplicate = true;
        if (!duplicate) out.push_back(std::move(cand));
      }
    }
  }

  if (out.empty()) {
    LinearConditionsCandidate trivial;
    trivial.p = Vec::Zero(n);
    trivial.beta = Vec::Zero(n);
    trivial.kappa = 1.0;
    trivial.mu = 1.0;
    trivial.g = 0.0;
    trivial.trivial = true;
    out.push_back(std::move(trivial));
  }
  return out;
}

struct AutoCertifyResult {
  std::optional<Certificate> certificate;
  int stage = 0;  // 1 Volterra-Lyapunov, 2 eigenvector, 3 (k,b) search, 4 linear conditions
  std::map<std::string, double> stage_best;
  long evals_used = 0;
};

/// Certification pipeline over the condition families, cheapest first. A
/// certificate is returned as soon as one family verifies; exhausting every
/// stage yields an inconclusive result with the best margin seen per stage,
/// never a disproof.
inline AutoCertifyResult auto_certify(const Mat& A, const SearchBudget& budget = {}) {
  budget.validate();
  AutoCertifyResult out;

  VolterraSearchOutcome vl = search_volterra_lyapunov(A, budget);
  out.evals_used += vl.evals_used;
  out.stage_best["stage1_volterra_lambda_max"] = vl.best_objective;
  if (vl.status == SearchStatus::found) {
    out.certificate = vl.certificate;
    out.stage = 1;
    return out;
  }

  CheckResult ev = check_eigenvector_conditions(A);
  if (auto it = ev.margins.find("restricted_lambda_max_margin"); it != ev.margins.end())
    out.stage_best["stage2_restricted_margin"] = it->second;
  if (ev.passed()) {
    out.certificate = ev.certificate;
    out.stage = 2;
    return out;
  }

  KbSearchOutcome kb = search_kb(A, budget);
  out.evals_used += kb.evals_used;
  out.stage_best["stage3_kb_lambda_max"] = kb.best_objective;
  if (kb.status == SearchStatus::found) {
    out.certificate = kb.certificate;
    out.stage = 3;
    return out;
  }

  // stage 4: nontrivial solutions of the linear conditions, combined with the
  // two decidable invariant-set modes
  if (std::optional<StructuredDetection> det = detect_structured_family(A)) {
    StructuredBuild build = build_structured_family(det->sf);
    Theorem1Params tp = Theorem1Params::zeros(3);
    tp.kappa = build.params.kappa;
    tp.mu = build.params.mu;
    for (Index c = 0; c < 3; ++c) {
      tp.p[det->perm[c]] = build.params.p[c];
      tp.beta[det->perm[c]] = build.params.beta[c];
    }
    InvariantSetArgument inv = build.invariant_set;
    inv.perm = det->perm;
    inv.invariant_points.clear();
    for (const Vec& pt : build.invariant_set.invariant_points) {
      Vec orig(3);
      for (Index c = 0; c < 3; ++c) orig[det->perm[c]] = pt[c];
      inv.invariant_points.push_back(std::move(orig));
    }
    CheckResult structured = check_theorem1(A, tp, inv);
    if (structured.passed()) {
      out.certificate = structured.certificate;
      out.stage = 4;
      return out;
    }
  }

  // Remaining stage-4 ground: nontrivial linear-condition solutions. Completing
  // one with q = 0, delta = 0 leaves Q = 0 (negative semidefinite), and under
  // the R_negative_definite mode any completing (k, b) would already have been
  // found by stage 3, so candidates here only certify through the structured
  // mode handled above. They are still enumerated and reported.
  std::vector<LinearConditionsCandidate> cands = solve_linear_conditions(A);
  int nontrivial = 0;
  for (const LinearConditionsCandidate& cand : cands)
    if (!cand.trivial) ++nontrivial;
  out.stage_best["stage4_nontrivial_linear_candidates"] = static_cast<double>(nontrivial);

  return out;
}

}  // namespace lvcert
