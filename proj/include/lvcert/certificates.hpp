#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lvcert/common.hpp"
#include "lvcert/matrixops.hpp"
#include "lvcert/model.hpp"

namespace lvcert {

/// Certificate tuple (kappa, mu, g, delta, b, p, q, k, beta). The derived
/// matrices R = ((diag(k)+b k k^T)A)^S and Q = (diag(q)A - delta p p^T)^S are
/// recomputed from these fields plus A.
struct Theorem1Params {
  double kappa = 1.0;
  double mu = 1.0;
  double g = 0.0;
  double delta = 0.0;
  double b = 0.0;
  Vec p;
  Vec q;
  Vec k;
  Vec beta;

  static Theorem1Params zeros(Index n) {
    Theorem1Params tp;
    tp.p = Vec::Zero(n);
    tp.q = Vec::Zero(n);
    tp.k = Vec::Zero(n);
    tp.beta = Vec::Zero(n);
    return tp;
  }

  void validate(Index n) const {
    if (!(kappa > 0.0) || !std::isfinite(kappa))
      throw InvalidParamsError("Theorem1Params: kappa must be > 0");
    if (!(mu > 0.0) || !std::isfinite(mu))
      throw InvalidParamsError("Theorem1Params: mu must be > 0");
    if (!(g >= 0.0)) throw InvalidParamsError("Theorem1Params: g must be >= 0");
    if (!(delta >= 0.0)) throw InvalidParamsError("Theorem1Params: delta must be >= 0");
    if (!std::isfinite(b)) throw InvalidParamsError("Theorem1Params: b must be finite");
    if (p.size() != n || q.size() != n || k.size() != n || beta.size() != n)
      throw InvalidParamsError("Theorem1Params: vector dimensions must match the system");
    for (Index i = 0; i < n; ++i)
      if (!(beta[i] >= 0.0))
        throw InvalidParamsError("Theorem1Params: beta must be componentwise >= 0");
  }
};

inline Mat theorem1_R(const Mat& A, const Theorem1Params& tp) {
  const Mat M = (Mat(tp.k.asDiagonal()) + tp.b * (tp.k * tp.k.transpose())) * A;
  return symmetric_part(M);
}

inline Mat theorem1_Q(const Mat& A, const Theorem1Params& tp) {
  const Mat M = Mat(tp.q.asDiagonal()) * A - tp.delta * (tp.p * tp.p.transpose());
  return symmetric_part(M);
}

/// Family of matrices for which the three-species reduction applies:
/// interaction matrix of the special rational form with 0 < l1 < l2 < l3 and
/// 0 < delta below the compatibility bound, all implied equilibrium
/// populations positive.
struct StructuredFamilyParams {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  double delta = 0.0;

  double delta_upper_bound() const {
    return lambda1 * lambda3 * (1.0 - lambda2) / (lambda2 * (lambda3 - lambda1));
  }

  Vec y_star() const {
    Vec y(3);
    y[0] = delta * (lambda3 - lambda2) / lambda3;
    y[1] = 1.0 - lambda2 - delta * lambda2 * (lambda3 - lambda1) / (lambda1 * lambda3);
    y[2] = delta * (lambda2 - lambda1) / lambda1;
    return y;
  }

  void validate() const {
    if (!(0.0 < lambda1 && lambda1 < lambda2 && lambda2 < lambda3))
      throw InvalidFamilyParamsError(
          "StructuredFamilyParams: need 0 < lambda1 < lambda2 < lambda3");
    const double bound = delta_upper_bound();
    if (!(delta > 0.0 && delta < bound))
      throw InvalidFamilyParamsError("StructuredFamilyParams: delta=" + std::to_string(delta) +
                                     " outside (0, " + std::to_string(bound) + ")");
    const Vec y = y_star();
    for (Index i = 0; i < 3; ++i)
      if (!(y[i] > 0.0))
        throw InvalidFamilyParamsError(
            "StructuredFamilyParams: implied equilibrium populations must be positive");
  }
};

inline Mat structured_family_matrix(const StructuredFamilyParams& sf) {
  const Vec y = sf.y_star();
  const double l1 = sf.lambda1, l2 = sf.lambda2, l3 = sf.lambda3, d = sf.delta;
  Mat A(3, 3);
  A << y[0] / l1, y[1] / l1, (l1 + d) / (l1 * d) * y[2],
       y[0] / l2, y[1] / l2, y[2] / l2,
       (d - l3) / (l3 * d) * y[0], y[1] / l3, y[2] / l3;
  return -A;
}

enum class InvariantSetMode { r_negative_definite, structured_family_j, user_asserted };

inline const char* to_string(InvariantSetMode m) {
  switch (m) {
    case InvariantSetMode::r_negative_definite: return "R_negative_definite";
    case InvariantSetMode::structured_family_j: return "structured_family_J";
    case InvariantSetMode::user_asserted: return "user_asserted";
  }
  return "unknown";
}

/// How "{1} = int(R+^n) intersect J" is justified. Only the first two modes
/// are machine-checked; user_asserted carries free text into the report and
/// is flagged as an unverified side condition.
struct InvariantSetArgument {
  InvariantSetMode mode = InvariantSetMode::r_negative_definite;
  std::optional<StructuredFamilyParams> family;
  std::vector<Index> perm;          // canonical index -> original index; empty = identity
  std::vector<Vec> invariant_points;  // the two-point set J, original coordinates
  std::string justification;

  static InvariantSetArgument r_definite() { return {}; }

  static InvariantSetArgument user(std::string text) {
    InvariantSetArgument a;
    a.mode = InvariantSetMode::user_asserted;
    a.justification = std::move(text);
    return a;
  }
};

enum class CertificateFamily {
  volterra_lyapunov,
  eigenvector,
  theorem1_a,
  theorem1_b,
  theorem1_c,
};

inline const char* to_string(CertificateFamily f) {
  switch (f) {
    case CertificateFamily::volterra_lyapunov: return "volterra_lyapunov";
    case CertificateFamily::eigenvector: return "eigenvector";
    case CertificateFamily::theorem1_a: return "theorem1_a";
    case CertificateFamily::theorem1_b: return "theorem1_b";
    case CertificateFamily::theorem1_c: return "theorem1_c";
  }
  return "unknown";
}

struct Certificate {
  CertificateFamily family = CertificateFamily::theorem1_a;
  Theorem1Params params;
  std::map<std::string, double> margins;
  InvariantSetArgument invariant_set;
  std::vector<std::string> side_conditions;
};

/// Verification verdict: certificate present iff every condition passed;
/// margins and failure descriptions are populated either way.
struct CheckResult {
  std::optional<Certificate> certificate;
  std::map<std::string, double> margins;
  std::vector<std::string> failures;

  bool passed() const { return certificate.has_value(); }
};

inline bool verify_invariant_set_structured(const Mat& A, const StructuredFamilyParams& sf);

namespace detail {

inline Mat permuted(const Mat& A, const std::vector<Index>& perm) {
  if (perm.empty()) return A;
  const Index n = A.rows();
  Mat Ac(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) Ac(i, j) = A(perm[i], perm[j]);
  return Ac;
}

}  // namespace detail

/// Verifies the full certificate tuple against A with per-condition margins:
/// the inequality slack of the mu condition, residual norms of the two linear
/// identities, nonpositivity of R and Q, and the invariant-set argument.
inline CheckResult check_theorem1(const Mat& A, const Theorem1Params& tp,
                                  const InvariantSetArgument& inv) {
  if (A.rows() != A.cols()) throw DimensionError("check_theorem1: A must be square");
  const Index n = A.rows();
  tp.validate(n);

  CheckResult res;
  const double tol_lin = 1e-8 * (1.0 + inf_norm(A));
  const Vec ones = Vec::Ones(n);

  const Mat R = theorem1_R(A, tp);
  const Mat Q = theorem1_Q(A, tp);
  const DefinitenessVerdict vr = classify_definiteness(R);
  const DefinitenessVerdict vq = classify_definiteness(Q);
  res.margins["R_lambda_max_margin"] = vr.tolerance_used - vr.lambda_max;
  res.margins["Q_lambda_max_margin"] = vq.tolerance_used - vq.lambda_max;
  if (!vr.nonpositive())
    res.failures.push_back("R is not negative semidefinite (lambda_max=" +
                           std::to_string(vr.lambda_max) + ")");
  if (!vq.nonpositive())
    res.failures.push_back("Q is not negative semidefinite (lambda_max=" +
                           std::to_string(vq.lambda_max) + ")");

  const double slack6 = tp.mu - (tp.beta.sum() - tp.kappa * tp.g);
  res.margins["condition6_slack"] = slack6;
  if (!(slack6 >= -1e-12 * (1.0 + std::abs(tp.mu) + tp.beta.sum())))
    res.failures.push_back("mu >= beta^T 1 - kappa*g violated (slack=" + std::to_string(slack6) +
                           ")");

  const Mat c7 = symmetric_part(Mat(tp.p.asDiagonal()) * A +
                                (tp.beta - tp.g * tp.p) * tp.p.transpose());
  const double res7 = inf_norm(c7);
  res.margins["condition7_margin"] = tol_lin - res7;
  if (!(res7 <= tol_lin))
    res.failures.push_back("orthogonality identity residual " + std::to_string(res7) +
                           " exceeds tolerance");

  const Vec c8 = A.transpose() * tp.p + (tp.mu - tp.g * tp.kappa) * tp.p + tp.kappa * tp.beta;
  const double res8 = inf_norm(c8);
  res.margins["condition8_margin"] = tol_lin - res8;
  if (!(res8 <= tol_lin))
    res.failures.push_back("eigen relation residual " + std::to_string(res8) +
                           " exceeds tolerance");

  std::vector<std::string> side_conditions;
  switch (inv.mode) {
    case InvariantSetMode::r_negative_definite: {
      res.margins["invariant_set_R_definite_margin"] = -vr.lambda_max - vr.tolerance_used;
      if (vr.cls != Definiteness::negative_definite)
        res.failures.push_back(
            "invariant-set mode R_negative_definite requires R negative definite, got " +
            std::string(to_string(vr.cls)));
      break;
    }
    case InvariantSetMode::structured_family_j: {
      if (!inv.family)
        throw UnsupportedInvariantSetError(
            "check_theorem1: structured_family_J mode requires family parameters");
      if (!inv.perm.empty() && static_cast<Index>(inv.perm.size()) != n)
        throw UnsupportedInvariantSetError("check_theorem1: permutation length mismatch");
      const Mat Ac = detail::permuted(A, inv.perm);
      try {
        if (!verify_invariant_set_structured(Ac, *inv.family))
          res.failures.push_back("structured-family invariant set verification failed");
      } catch (const ShapeMismatchError& e) {
        throw UnsupportedInvariantSetError(std::string("check_theorem1: ") + e.what());
      }
      break;
    }
    case InvariantSetMode::user_asserted: {
      if (inv.justification.empty())
        throw UnsupportedInvariantSetError(
            "check_theorem1: user_asserted mode requires a justification");
      side_conditions.push_back("invariant-set argument asserted by user, not verified: " +
                                inv.justification);
      break;
    }
  }

  // Statement classification. With -p in the nonnegative orthant the c*
  // existence conditions reduce to sign tests on the components with p_i = 0
  // (for p_i < 0 any sufficiently large c* satisfies the strict inequality).
  const double tol_p = 1e-12 * (1.0 + inf_norm(tp.p));
  bool minus_p_nonneg = true;
  for (Index i = 0; i < n; ++i)
    if (tp.p[i] > tol_p) minus_p_nonneg = false;
  bool k_nonneg = true;
  const double tol_k = 1e-12 * (1.0 + inf_norm(tp.k));
  for (Index i = 0; i < n; ++i)
    if (tp.k[i] < -tol_k) k_nonneg = false;

  // components with p_i < 0 only lower-bound c*, so the constraint set is the
  // p_i = 0 components; when it is empty the conditions hold for free
  bool any_pzero = false;
  double min_qk_on_pzero = std::numeric_limits<double>::infinity();
  double min_q_on_pzero = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    if (std::abs(tp.p[i]) <= tol_p) {
      any_pzero = true;
      min_qk_on_pzero = std::min(min_qk_on_pzero, tp.q[i] + tp.k[i]);
      min_q_on_pzero = std::min(min_q_on_pzero, tp.q[i]);
    }
  }
  const bool cstar_b = minus_p_nonneg && (!any_pzero || min_qk_on_pzero > 0.0);
  const double bk_sum_margin = 1.0 + tp.b * tp.k.sum();
  const bool cstar_c = cstar_b && (!any_pzero || min_q_on_pzero >= 0.0);

  CertificateFamily family = CertificateFamily::theorem1_a;
  if (tp.b == 0.0 && cstar_b) {
    family = CertificateFamily::theorem1_b;
    if (any_pzero) res.margins["cstar_qk_margin"] = min_qk_on_pzero;
  } else if (tp.b < 0.0 && k_nonneg && cstar_c && bk_sum_margin > 1e-12) {
    family = CertificateFamily::theorem1_c;
    if (any_pzero) {
      res.margins["cstar_qk_margin"] = min_qk_on_pzero;
      res.margins["cstar_q_margin"] = min_q_on_pzero;
    }
    res.margins["b_k_sum_margin"] = bk_sum_margin;
  }

  if (family == CertificateFamily::theorem1_a) {
    side_conditions.push_back("boundedness of all interior solutions - empirical only");
    side_conditions.push_back("strong persistence (liminf > 0) of solutions - empirical only");
  } else {
    side_conditions.push_back("boundedness of all interior solutions - empirical only");
  }

  if (!res.failures.empty()) return res;

  Certificate cert;
  cert.family = family;
  cert.params = tp;
  cert.margins = res.margins;
  cert.invariant_set = inv;
  cert.side_conditions = std::move(side_conditions);
  res.certificate = std::move(cert);
  return res;
}

/// Embedding of a Volterra-Lyapunov witness h into the certificate tuple.
inline Theorem1Params volterra_embedding(const Vec& h) {
  Theorem1Params tp = Theorem1Params::zeros(h.size());
  tp.k = h;
  return tp;
}

/// Classical condition: (diag(h)A)^S negative definite for some h > 0.
inline CheckResult check_volterra_lyapunov(const Mat& A, const Vec& h) {
  if (h.size() != A.rows()) throw DimensionError("check_volterra_lyapunov: h dimension mismatch");
  for (Index i = 0; i < h.size(); ++i)
    if (!(h[i] > 0.0))
      throw NotInteriorError("check_volterra_lyapunov: h must be componentwise > 0");
  CheckResult res = check_theorem1(A, volterra_embedding(h), InvariantSetArgument::r_definite());
  if (res.certificate) res.certificate->family = CertificateFamily::volterra_lyapunov;
  return res;
}

namespace detail {

/// Candidate left eigenvectors with lambda < 0, augmented with deterministic
/// in-eigenspace combinations for repeated eigenvalues (a degenerate
/// eigenspace is reported by the solver as a coordinate-like basis whose
/// members may have zero components even though the space contains vectors
/// without any).
inline std::vector<LeftEigenpair> eigenvector_candidates(const Mat& A) {
  const double scale = std::max(1.0, inf_norm(A));
  const double component_tol = 1e-9;
  std::vector<LeftEigenpair> pairs = left_eigenpairs(A);
  std::vector<LeftEigenpair> out;
  std::size_t i = 0;
  while (i < pairs.size()) {
    std::size_t j = i + 1;
    while (j < pairs.size() && std::abs(pairs[j].lambda - pairs[i].lambda) <= 1e-8 * scale) ++j;
    for (std::size_t t = i; t < j; ++t) out.push_back(pairs[t]);
    if (j - i >= 2) {
      // uniform combination first, then a few seeded ones
      Rng rng(0x5eed5eedULL);
      for (int attempt = 0; attempt < 8; ++attempt) {
        Vec comb = Vec::Zero(A.rows());
        for (std::size_t t = i; t < j; ++t) {
          const double w = attempt == 0 ? 1.0 : rng.normal();
          comb += w * pairs[t].alpha;
        }
        comb = detail::normalize_eigvec(comb, component_tol);
        if (comb.cwiseAbs().minCoeff() > component_tol) {
          LeftEigenpair mixed;
          mixed.alpha = comb;
          mixed.lambda = pairs[i].lambda;
          mixed.all_components_nonzero = true;
          out.push_back(std::move(mixed));
          break;
        }
      }
    }
    i = j;
  }
  return out;
}

}  // namespace detail

/// Eigenvector criterion: a real left eigenpair (alpha, lambda) of A with
/// lambda < 0, all components of alpha nonzero, and (diag(alpha)A)^S negative
/// definite on the orthogonal complement of alpha. On success the combination
/// lemma converts the witness into a certificate-tuple embedding with
/// k = alpha and b = -tau2/(lambda tau1).
inline CheckResult check_eigenvector_conditions(const Mat& A) {
  if (A.rows() != A.cols()) throw DimensionError("check_eigenvector_conditions: A must be square");
  const double scale = std::max(1.0, inf_norm(A));
  CheckResult res;
  double best_restricted = std::numeric_limits<double>::infinity();

  for (const LeftEigenpair& pair : detail::eigenvector_candidates(A)) {
    if (!(pair.lambda < -1e-12 * scale)) continue;
    if (!pair.all_components_nonzero) continue;
    const Mat Z1 = symmetric_part(Mat(pair.alpha.asDiagonal()) * A);
    const DefinitenessVerdict rd = restricted_definiteness(Z1, pair.alpha);
    best_restricted = std::min(best_restricted, rd.lambda_max);
    if (rd.cls != Definiteness::negative_definite) continue;

    res.margins["eigenvalue_negativity"] = -pair.lambda;
    res.margins["restricted_lambda_max_margin"] = -rd.lambda_max;
    res.margins["min_component"] = pair.alpha.cwiseAbs().minCoeff();

    const Mat Z2 = -(pair.alpha * pair.alpha.transpose());
    const Lemma1Result lem = lemma1_combination(Z1, Z2);
    if (lem.found && lem.tau1 > 1e-12) {
      Theorem1Params tp = Theorem1Params::zeros(A.rows());
      tp.k = pair.alpha;
      tp.b = -lem.tau2 / (pair.lambda * lem.tau1);
      CheckResult embedded = check_theorem1(A, tp, InvariantSetArgument::r_definite());
      if (embedded.passed()) {
        Certificate cert = *embedded.certificate;
        cert.family = CertificateFamily::eigenvector;
        for (const auto& [k, v] : embedded.margins) res.margins[k] = v;
        cert.margins = res.margins;
        cert.side_conditions.push_back(
            "permanence is a hypothesis of the eigenvector criterion - checked empirically only");
        res.certificate = std::move(cert);
        return res;
      }
    }
    // criterion itself holds; combination step stayed inconclusive
    Certificate cert;
    cert.family = CertificateFamily::eigenvector;
    cert.params = Theorem1Params::zeros(A.rows());
    cert.params.k = pair.alpha;
    cert.margins = res.margins;
    cert.invariant_set = InvariantSetArgument::user(
        "left eigenpair with negative eigenvalue and restricted negative definiteness; "
        "combination-lemma search inconclusive");
    cert.side_conditions.push_back(
        "permanence is a hypothesis of the eigenvector criterion - checked empirically only");
    cert.side_conditions.push_back(
        "certificate-tuple embedding unavailable (combination search inconclusive)");
    res.certificate = std::move(cert);
    return res;
  }

  if (std::isfinite(best_restricted))
    res.margins["restricted_lambda_max_margin"] = -best_restricted;
  res.failures.push_back(
      "no real left eigenpair with negative eigenvalue, nonzero components and negative "
      "definite restriction");
  return res;
}

struct StructuredBuild {
  Mat A;
  Theorem1Params params;
  InvariantSetArgument invariant_set;
};

/// Instantiates the structured three-species family: the interaction matrix,
/// the exact certificate tuple it satisfies, and the two-point invariant set.
inline StructuredBuild build_structured_family(const StructuredFamilyParams& sf) {
  sf.validate();
  StructuredBuild out;
  out.A = structured_family_matrix(sf);
  const Vec y = sf.y_star();
  Theorem1Params tp = Theorem1Params::zeros(3);
  tp.p = -y;
  tp.beta = Vec(3);
  tp.beta << y[0] / sf.lambda1, y[1] / sf.lambda2, y[2] / sf.lambda3;
  tp.kappa = sf.lambda2;
  tp.mu = 1.0 / sf.lambda2;
  out.params = std::move(tp);

  InvariantSetArgument inv;
  inv.mode = InvariantSetMode::structured_family_j;
  inv.family = sf;
  Vec boundary_point(3);
  boundary_point << 0.0, (1.0 - sf.lambda2) / y[1], 0.0;
  inv.invariant_points = {boundary_point, Vec::Ones(3)};
  out.invariant_set = std::move(inv);
  return out;
}

/// Checks that the reduced dynamics on the conservation plane and the
/// two-point invariant set hold for A by direct substitution. The off-axis
/// member of the set has zero components, so the interior intersection is
/// exactly the equilibrium.
inline bool verify_invariant_set_structured(const Mat& A, const StructuredFamilyParams& sf) {
  sf.validate();
  if (A.rows() != 3 || A.cols() != 3)
    throw ShapeMismatchError("verify_invariant_set_structured: A must be 3x3");
  const Mat M = structured_family_matrix(sf);
  const double scale = 1.0 + inf_norm(A);
  if (inf_norm(Mat(A - M)) > 1e-7 * scale)
    throw ShapeMismatchError("verify_invariant_set_structured: A does not match the family form");

  const Vec y = sf.y_star();
  const double field_tol = 1e-9 * scale;

  // reduced dynamics on the plane y.(x - 1) = 0: sample the plane and compare
  // the full vector field against the reduction
  for (double x1 : {0.25, 0.75, 1.25, 1.75}) {
    for (double x3 : {0.25, 0.75, 1.25, 1.75}) {
      const double x2 = 1.0 - (y[0] * (x1 - 1.0) + y[2] * (x3 - 1.0)) / y[1];
      if (!(x2 > 0.0)) continue;
      Vec x(3);
      x << x1, x2, x3;
      const Vec f = normalized_field(A, x);
      const double r1 = f[0] + (x1 / sf.delta) * y[2] * (x3 - 1.0);
      const double r2 = f[1];
      const double r3 = f[2] - (x3 / sf.delta) * y[0] * (x1 - 1.0);
      if (std::abs(r1) > field_tol || std::abs(r2) > field_tol || std::abs(r3) > field_tol)
        return false;
    }
  }

  // both members of J must be equilibria
  Vec boundary_point(3);
  boundary_point << 0.0, (1.0 - sf.lambda2) / y[1], 0.0;
  const double eq_tol = 1e-10 * scale;
  if (inf_norm(normalized_field(A, boundary_point)) > eq_tol) return false;
  if (inf_norm(normalized_field(A, Vec::Ones(3))) > eq_tol) return false;

  // the boundary member has zero components, hence int(R+^3) meets J only at 1
  return boundary_point[0] == 0.0 && boundary_point[2] == 0.0;
}

struct StructuredDetection {
  StructuredFamilyParams sf;
  std::vector<Index> perm;  // canonical index -> original index
};

/// Attempts to recognize A as a (possibly state-renumbered) member of the
/// structured family by inverting the closed-form parameterization.
inline std::optional<StructuredDetection> detect_structured_family(const Mat& A) {
  if (A.rows() != 3 || A.cols() != 3) return std::nullopt;
  const double scale = 1.0 + inf_norm(A);
  std::array<Index, 3> idx = {0, 1, 2};
  do {
    const std::vector<Index> perm(idx.begin(), idx.end());
    const Mat Ac = detail::permuted(A, perm);
    const Mat a = -Ac;
    // the middle row and the ratio anchors must be positive
    if (!(a(1, 0) > 1e-12 * scale && a(1, 1) > 1e-12 * scale && a(1, 2) > 1e-12 * scale))
      continue;
    if (!(a(0, 0) > 1e-12 * scale && a(2, 1) > 1e-12 * scale)) continue;
    const double c1 = a(1, 0) / a(0, 0);
    const double c3 = a(1, 1) / a(2, 1);
    if (!(c3 > 1.0 + 1e-10) || !(c1 > 1e-12) || !(c1 < 1.0 - 1e-10)) continue;
    const double denom = 1.0 + a(1, 1) + a(1, 0) * (c3 - c1) / ((c3 - 1.0) * c1);
    if (!(denom > 1e-12)) continue;
    StructuredFamilyParams sf;
    sf.lambda2 = 1.0 / denom;
    sf.lambda1 = c1 * sf.lambda2;
    sf.lambda3 = c3 * sf.lambda2;
    sf.delta = sf.lambda2 * a(1, 0) * c3 / (c3 - 1.0);
    try {
      sf.validate();
    } catch (const InvalidFamilyParamsError&) {
      continue;
    }
    if (inf_norm(Mat(Ac - structured_family_matrix(sf))) <= 1e-8 * scale)
      return StructuredDetection{sf, perm};
  } while (std::next_permutation(idx.begin(), idx.end()));
  return std::nullopt;
}

}  // namespace lvcert
