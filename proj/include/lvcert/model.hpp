#pragma once

#include <string>

#include "lvcert/common.hpp"

namespace lvcert {

/// Raw system  dy/dt = diag(y)(r + B y)  on the nonnegative orthant.
struct LVSystem {
  Vec r;
  Mat B;

  Index n() const { return r.size(); }

  void validate() const {
    if (r.size() < 1) throw DimensionError("LVSystem: dimension must be >= 1");
    if (B.rows() != r.size() || B.cols() != r.size())
      throw DimensionError("LVSystem: B must be n x n with n = len(r)");
  }
};

/// Strictly positive steady state y* with r + B y* = 0.
struct InteriorEquilibrium {
  Vec y_star;

  Index n() const { return y_star.size(); }
};

/// Normalized system  dx/dt = diag(x) A (x - 1)  with equilibrium at 1.
struct NormalizedSystem {
  Mat A;

  Index n() const { return A.rows(); }
};

struct EquilibriumOptions {
  double residual_tol_factor = 1e-9;  // accept if ||r + B y*||_inf <= factor * (1 + ||r||_inf)
  double positivity_tol = 1e-12;
  double rcond_min = 1e-12;
};

/// Solves B y* = -r. Throws SingularMatrixError when B is not invertible
/// within the condition cap, NotInteriorError when some component of the
/// solution is not strictly positive.
inline InteriorEquilibrium find_interior_equilibrium(const LVSystem& sys,
                                                     const EquilibriumOptions& opts = {}) {
  sys.validate();
  Eigen::PartialPivLU<Mat> lu(sys.B);
  const double rcond = lu.rcond();
  if (!(rcond >= opts.rcond_min)) {
    throw SingularMatrixError("find_interior_equilibrium: B is singular or ill-conditioned (rcond=" +
                              std::to_string(rcond) + ")");
  }
  Vec y = lu.solve(-sys.r);
  const double residual = inf_norm(Vec(sys.r + sys.B * y));
  const double tol = opts.residual_tol_factor * (1.0 + inf_norm(sys.r));
  if (!(residual <= tol)) {
    throw SingularMatrixError("find_interior_equilibrium: residual " + std::to_string(residual) +
                              " exceeds tolerance " + std::to_string(tol));
  }
  for (Index i = 0; i < y.size(); ++i) {
    if (!(y[i] > opts.positivity_tol)) {
      throw NotInteriorError("find_interior_equilibrium: component " + std::to_string(i) +
                             " of y* is not strictly positive (no interior equilibrium)");
    }
  }
  return InteriorEquilibrium{std::move(y)};
}

/// A = B diag(y*); the transformed system has its equilibrium at 1.
inline NormalizedSystem normalize(const LVSystem& sys, const InteriorEquilibrium& eq) {
  sys.validate();
  if (eq.n() != sys.n()) throw DimensionError("normalize: equilibrium dimension mismatch");
  return NormalizedSystem{sys.B * eq.y_star.asDiagonal()};
}

/// Maps a normalized state x back to raw coordinates y = diag(y*) x.
inline Vec denormalize_state(const Vec& x, const InteriorEquilibrium& eq) {
  if (x.size() != eq.n()) throw DimensionError("denormalize_state: dimension mismatch");
  return eq.y_star.cwiseProduct(x);
}

/// Vector field of the normalized system, f(x) = diag(x) A (x - 1).
inline Vec normalized_field(const Mat& A, const Vec& x) {
  return x.cwiseProduct(A * (x - Vec::Ones(x.size())));
}

}  // namespace lvcert
