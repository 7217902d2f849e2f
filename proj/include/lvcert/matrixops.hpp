#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lvcert/common.hpp"

namespace lvcert {

enum class Definiteness {
  negative_definite,
  negative_semidefinite,
  indefinite,
  positive_semidefinite,
  positive_definite,
  zero,
};

inline const char* to_string(Definiteness d) {
  switch (d) {
    case Definiteness::negative_definite: return "negative_definite";
    case Definiteness::negative_semidefinite: return "negative_semidefinite";
    case Definiteness::indefinite: return "indefinite";
    case Definiteness::positive_semidefinite: return "positive_semidefinite";
    case Definiteness::positive_definite: return "positive_definite";
    case Definiteness::zero: return "zero";
  }
  return "unknown";
}

struct DefinitenessVerdict {
  Definiteness cls = Definiteness::zero;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double tolerance_used = 0.0;
  std::vector<double> leading_minors;  // reported for n <= 4, Sylvester cross-check

  /// lambda_max <= tol: the sign condition needed for the R and Q matrices.
  bool nonpositive() const {
    return cls == Definiteness::negative_definite ||
           cls == Definiteness::negative_semidefinite || cls == Definiteness::zero;
  }
};

/// Scale-relative tolerance separating structural zeros from rounding noise.
inline double definiteness_tol(const Mat& Z) { return 1e-9 * std::max(1.0, inf_norm(Z)); }

/// (C + C^T)/2, exactly symmetric bitwise (mirrored entries share one value).
inline Mat symmetric_part(const Mat& C) {
  if (C.rows() != C.cols()) throw DimensionError("symmetric_part: matrix must be square");
  const Index n = C.rows();
  Mat S(n, n);
  for (Index i = 0; i < n; ++i) {
    S(i, i) = 0.5 * (C(i, i) + C(i, i));
    for (Index j = i + 1; j < n; ++j) {
      const double v = 0.5 * (C(i, j) + C(j, i));
      S(i, j) = v;
      S(j, i) = v;
    }
  }
  return S;
}

namespace detail {

inline double leading_minor(const Mat& Z, Index k) {
  // closed forms keep the small determinants free of factorization noise
  switch (k) {
    case 1:
      return Z(0, 0);
    case 2:
      return Z(0, 0) * Z(1, 1) - Z(0, 1) * Z(1, 0);
    case 3:
      return Z(0, 0) * (Z(1, 1) * Z(2, 2) - Z(1, 2) * Z(2, 1)) -
             Z(0, 1) * (Z(1, 0) * Z(2, 2) - Z(1, 2) * Z(2, 0)) +
             Z(0, 2) * (Z(1, 0) * Z(2, 1) - Z(1, 1) * Z(2, 0));
    case 4: {
      double det = 0.0;
      for (Index c = 0; c < 4; ++c) {
        Mat minor(3, 3);
        Index mc = 0;
        for (Index j = 0; j < 4; ++j) {
          if (j == c) continue;
          for (Index i = 1; i < 4; ++i) minor(i - 1, mc) = Z(i, j);
          ++mc;
        }
        const double cof = leading_minor(minor, 3);
        det += ((c % 2 == 0) ? 1.0 : -1.0) * Z(0, c) * cof;
      }
      return det;
    }
    default:
      return Z.topLeftCorner(k, k).determinant();
  }
}

}  // namespace detail

inline void require_symmetric(const Mat& Z, const char* where) {
  if (Z.rows() != Z.cols()) throw DimensionError(std::string(where) + ": matrix must be square");
  const double asym = inf_norm(Mat(Z - Z.transpose()));
  if (asym > 1e-12 * std::max(1.0, inf_norm(Z)))
    throw NotSymmetricError(std::string(where) + ": matrix is not symmetric (asymmetry " +
                            std::to_string(asym) + ")");
}

inline DefinitenessVerdict classify_definiteness(const Mat& Z, double tol) {
  require_symmetric(Z, "classify_definiteness");
  if (!(tol > 0.0)) throw InvalidParamsError("classify_definiteness: tol must be > 0");
  const Index n = Z.rows();
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetric_part(Z), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw EigenSolverError("classify_definiteness: eigen iteration failed");
  DefinitenessVerdict v;
  v.lambda_min = es.eigenvalues().minCoeff();
  v.lambda_max = es.eigenvalues().maxCoeff();
  v.tolerance_used = tol;
  if (std::max(std::abs(v.lambda_min), std::abs(v.lambda_max)) <= tol)
    v.cls = Definiteness::zero;
  else if (v.lambda_max < -tol)
    v.cls = Definiteness::negative_definite;
  else if (v.lambda_max <= tol)
    v.cls = Definiteness::negative_semidefinite;
  else if (v.lambda_min > tol)
    v.cls = Definiteness::positive_definite;
  else if (v.lambda_min >= -tol)
    v.cls = Definiteness::positive_semidefinite;
  else
    v.cls = Definiteness::indefinite;
  if (n <= 4) {
    v.leading_minors.reserve(static_cast<std::size_t>(n));
    for (Index k = 1; k <= n; ++k) v.leading_minors.push_back(detail::leading_minor(Z, k));
  }
  return v;
}

inline DefinitenessVerdict classify_definiteness(const Mat& Z) {
  return classify_definiteness(Z, definiteness_tol(Z));
}

/// Orthonormal basis of {y : alpha^T y = 0} as the trailing n-1 columns of a
/// Householder reflector mapping alpha to a multiple of e1.
inline Mat orthonormal_complement_basis(const Vec& alpha) {
  const Index n = alpha.size();
  const double nrm = alpha.norm();
  if (!(nrm > 0.0)) throw ZeroVectorError("orthonormal_complement_basis: alpha must be nonzero");
  Vec v = alpha / nrm;
  Vec w = v;
  w[0] += (v[0] >= 0.0 ? 1.0 : -1.0);
  const double wtw = w.squaredNorm();
  Mat H = Mat::Identity(n, n) - (2.0 / wtw) * (w * w.transpose());
  return H.rightCols(n - 1);
}

/// Definiteness of Z restricted to the orthogonal complement of alpha.
/// A 1-dimensional ambient space leaves nothing to test: the restriction is
/// vacuously negative definite (reported with lambda bounds at -inf).
inline DefinitenessVerdict restricted_definiteness(const Mat& Z, const Vec& alpha, double tol) {
  require_symmetric(Z, "restricted_definiteness");
  if (alpha.size() != Z.rows())
    throw DimensionError("restricted_definiteness: alpha dimension mismatch");
  if (!(alpha.norm() > 0.0)) throw ZeroVectorError("restricted_definiteness: alpha is zero");
  if (Z.rows() == 1) {
    DefinitenessVerdict v;
    v.cls = Definiteness::negative_definite;
    v.lambda_min = v.lambda_max = -std::numeric_limits<double>::infinity();
    v.tolerance_used = tol;
    return v;
  }
  const Mat N = orthonormal_complement_basis(alpha);
  return classify_definiteness(symmetric_part(N.transpose() * Z * N), tol);
}

inline DefinitenessVerdict restricted_definiteness(const Mat& Z, const Vec& alpha) {
  return restricted_definiteness(Z, alpha, definiteness_tol(Z));
}

struct LeftEigenpair {
  Vec alpha;   // unit Euclidean norm, first nonzero component positive
  double lambda = 0.0;
  bool all_components_nonzero = false;
};

namespace detail {

inline Vec normalize_eigvec(Vec v, double component_tol) {
  const double nrm = v.norm();
  if (nrm > 0.0) v /= nrm;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > component_tol) {
      if (v[i] < 0.0) v = -v;
      break;
    }
  }
  return v;
}

}  // namespace detail

/// All real left eigenpairs of A (eigenpairs of A^T with |Im| below the
/// acceptance band), sorted by eigenvalue. Repeated eigenvalues come out as
/// one entry per basis vector of the eigenspace.
inline std::vector<LeftEigenpair> left_eigenpairs(const Mat& A) {
  if (A.rows() != A.cols()) throw DimensionError("left_eigenpairs: matrix must be square");
  const Index n = A.rows();
  const double scale = std::max(1.0, inf_norm(A));
  const double imag_tol = 1e-9 * scale;
  const double component_tol = 1e-9;
  std::vector<LeftEigenpair> out;
  if (n == 1) {
    out.push_back({Vec::Ones(1), A(0, 0), true});
    return out;
  }
  Eigen::EigenSolver<Mat> es(A.transpose());
  if (es.info() != Eigen::Success)
    throw EigenSolverError("left_eigenpairs: QR iteration did not converge");
  for (Index i = 0; i < n; ++i) {
    const std::complex<double> lam = es.eigenvalues()[i];
    if (std::abs(lam.imag()) > imag_tol) continue;
    Vec alpha = detail::normalize_eigvec(es.eigenvectors().col(i).real(), component_tol);
    if (!(alpha.norm() > 0.5)) continue;  // degenerate column from a complex pair
    LeftEigenpair pair;
    pair.alpha = std::move(alpha);
    pair.lambda = lam.real();
    pair.all_components_nonzero = pair.alpha.cwiseAbs().minCoeff() > component_tol;
    out.push_back(std::move(pair));
  }
  std::sort(out.begin(), out.end(),
            [](const LeftEigenpair& a, const LeftEigenpair& b) { return a.lambda < b.lambda; });
  return out;
}

struct Lemma1Result {
  bool found = false;
  double tau1 = 0.0;
  double tau2 = 0.0;
  double lambda_max = std::numeric_limits<double>::infinity();
};

/// Searches tau1 Z1 + tau2 Z2 for a negative definite combination on the
/// segment (tau1, tau2) = (1-t, t), t in [0,1]: coarse grid, then local
/// golden-section refinement around the minimizer and every sign change of
/// lambda_max. Not finding one is inconclusive, not a disproof.
inline Lemma1Result lemma1_combination(const Mat& Z1, const Mat& Z2) {
  if (Z1.rows() != Z2.rows() || Z1.cols() != Z2.cols())
    throw DimensionError("lemma1_combination: dimension mismatch");
  require_symmetric(Z1, "lemma1_combination");
  require_symmetric(Z2, "lemma1_combination");
  const Mat S1 = symmetric_part(Z1);
  const Mat S2 = symmetric_part(Z2);

  auto lambda_max_at = [&](double t) {
    Mat comb = (1.0 - t) * S1 + t * S2;
    Eigen::SelfAdjointEigenSolver<Mat> es(comb, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
  };

  constexpr int kGridPoints = 129;
  double best_t = 0.0;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<double> grid_vals(kGridPoints);
  for (int i = 0; i < kGridPoints; ++i) {
    const double t = static_cast<double>(i) / (kGridPoints - 1);
    grid_vals[i] = lambda_max_at(t);
    if (grid_vals[i] < best_val) {
      best_val = grid_vals[i];
      best_t = t;
    }
  }

  auto golden_refine = [&](double lo, double hi) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = lambda_max_at(x1);
    double f2 = lambda_max_at(x2);
    for (int it = 0; it < 60; ++it) {
      if (f1 < f2) {
        b = x2; x2 = x1; f2 = f1;
        x1 = b - kInvPhi * (b - a);
        f1 = lambda_max_at(x1);
      } else {
        a = x1; x1 = x2; f1 = f2;
        x2 = a + kInvPhi * (b - a);
        f2 = lambda_max_at(x2);
      }
    }
    return f1 < f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
  };

  const double h = 1.0 / (kGridPoints - 1);
  std::vector<std::pair<double, double>> windows;  // refinement intervals
  windows.emplace_back(std::max(0.0, best_t - h), std::min(1.0, best_t + h));
  for (int i = 0; i + 1 < kGridPoints; ++i) {
    if ((grid_vals[i] < 0.0) != (grid_vals[i + 1] < 0.0)) {
      windows.emplace_back(static_cast<double>(i) * h, static_cast<double>(i + 1) * h);
      if (windows.size() >= 4) break;
    }
  }
  for (const auto& [lo, hi] : windows) {
    const auto [t, val] = golden_refine(lo, hi);
    if (val < best_val) {
      best_val = val;
      best_t = t;
    }
  }

  Lemma1Result res;
  res.tau1 = 1.0 - best_t;
  res.tau2 = best_t;
  res.lambda_max = best_val;
  // success is checked, never assumed
  const Mat comb = symmetric_part(res.tau1 * S1 + res.tau2 * S2);
  res.found = classify_definiteness(comb).cls == Definiteness::negative_definite;
  return res;
}

}  // namespace lvcert
