#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles here
// must stay independent of the implementation paths they check.

#include <cmath>
#include <vector>

#include "lvcert/common.hpp"
#include "lvcert/model.hpp"

namespace lvcert::testing {

inline LVSystem example1_system() {
  Vec r(3);
  r << 1.0, 3.0, 19.0 / 6.0;
  Mat B(3, 3);
  B << -1, 0, 9, -1, -1, 0, -1, -1, -1;
  return LVSystem{r, B};
}

inline Mat example1_A() {
  Mat A(3, 3);
  A << -5, 0, 3, -5, -1, 0, -5, -1, -1.0 / 3.0;
  return 0.5 * A;
}

inline Mat example2_A() {
  Mat A(3, 3);
  A << -5, -10, -2, -4, -7, -11, -10, -2, -8;
  return A;
}

inline Vec example1_witness_k() {
  Vec k(3);
  k << 1.0, 0.5, 1.25;
  return k;
}

inline constexpr double example1_witness_b = -0.25;

inline Mat example1_expected_R() {
  Mat R(3, 3);
  R << 600, 66, -77, 66, 108, 197, -77, 197, 470;
  return (-1.0 / 768.0) * R;
}

// --- characteristic-polynomial oracle for 3x3 real eigenpairs -------------

/// det(M - lambda I) for 3x3, written out directly.
inline double char_poly_3x3(const Mat& M, double lambda) {
  Mat B = M - lambda * Mat::Identity(3, 3);
  return B(0, 0) * (B(1, 1) * B(2, 2) - B(1, 2) * B(2, 1)) -
         B(0, 1) * (B(1, 0) * B(2, 2) - B(1, 2) * B(2, 0)) +
         B(0, 2) * (B(1, 0) * B(2, 1) - B(1, 1) * B(2, 0));
}

/// Real roots by sign scan plus bisection; independent of any QR machinery.
inline std::vector<double> real_eigenvalues_3x3(const Mat& M) {
  const double L = 1.0 + 2.0 * inf_norm(M);
  const int grid = 20000;
  std::vector<double> roots;
  double prev_x = -L;
  double prev_f = char_poly_3x3(M, prev_x);
  for (int i = 1; i <= grid; ++i) {
    const double x = -L + 2.0 * L * static_cast<double>(i) / grid;
    const double f = char_poly_3x3(M, x);
    if ((prev_f < 0.0) != (f < 0.0)) {
      double lo = prev_x, hi = x, flo = prev_f;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = char_poly_3x3(M, mid);
        if ((flo < 0.0) != (fm < 0.0)) {
          hi = mid;
        } else {
          lo = mid;
          flo = fm;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_x = x;
    prev_f = f;
  }
  return roots;
}

/// Null vector of (M - lambda I) via the adjugate: columns of adj(B) span
/// null(B) when det(B) = 0. Picks the largest column.
inline Vec eigenvector_from_adjugate_3x3(const Mat& M, double lambda) {
  Mat B = M - lambda * Mat::Identity(3, 3);
  Mat adj(3, 3);
  adj(0, 0) = B(1, 1) * B(2, 2) - B(1, 2) * B(2, 1);
  adj(1, 0) = -(B(1, 0) * B(2, 2) - B(1, 2) * B(2, 0));
  adj(2, 0) = B(1, 0) * B(2, 1) - B(1, 1) * B(2, 0);
  adj(0, 1) = -(B(0, 1) * B(2, 2) - B(0, 2) * B(2, 1));
  adj(1, 1) = B(0, 0) * B(2, 2) - B(0, 2) * B(2, 0);
  adj(2, 1) = -(B(0, 0) * B(2, 1) - B(0, 1) * B(2, 0));
  adj(0, 2) = B(0, 1) * B(1, 2) - B(0, 2) * B(1, 1);
  adj(1, 2) = -(B(0, 0) * B(1, 2) - B(0, 2) * B(1, 0));
  adj(2, 2) = B(0, 0) * B(1, 1) - B(0, 1) * B(1, 0);
  Index best = 0;
  for (Index c = 1; c < 3; ++c)
    if (adj.col(c).norm() > adj.col(best).norm()) best = c;
  Vec v = adj.col(best);
  v /= v.norm();
  for (Index i = 0; i < 3; ++i) {
    if (std::abs(v[i]) > 1e-9) {
      if (v[i] < 0.0) v = -v;
      break;
    }
  }
  return v;
}

// --- misc deterministic generators ----------------------------------------

inline Mat random_matrix(Rng& rng, Index n, double scale = 1.0) {
  Mat m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = scale * rng.normal();
  return m;
}

inline Mat random_symmetric(Rng& rng, Index n, double scale = 1.0) {
  Mat m = random_matrix(rng, n, scale);
  return Mat(0.5 * (m + m.transpose()));
}

inline Mat random_orthogonal(Rng& rng, Index n) {
  Eigen::HouseholderQR<Mat> qr(random_matrix(rng, n));
  Mat Q = qr.householderQ();
  return Q;
}

/// Integer 64-bit leading principal minors of an integer 3x3 matrix; exact
/// for the magnitudes used in the tests.
inline std::vector<long long> integer_leading_minors_3x3(const long long z[3][3]) {
  std::vector<long long> minors;
  minors.push_back(z[0][0]);
  minors.push_back(z[0][0] * z[1][1] - z[0][1] * z[1][0]);
  const long long det = z[0][0] * (z[1][1] * z[2][2] - z[1][2] * z[2][1]) -
                        z[0][1] * (z[1][0] * z[2][2] - z[1][2] * z[2][0]) +
                        z[0][2] * (z[1][0] * z[2][1] - z[1][1] * z[2][0]);
  minors.push_back(det);
  return minors;
}

}  // namespace lvcert::testing
