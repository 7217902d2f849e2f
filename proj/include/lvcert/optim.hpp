#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

#include "lvcert/common.hpp"

namespace lvcert {

struct NelderMeadOptions {
  long max_evals = 2000;
  double f_tol = 1e-12;   // relative spread of simplex values
  double x_tol = 1e-10;   // simplex diameter
  double initial_step = 0.5;
};

struct NelderMeadResult {
  Vec x;
  double f = 0.0;
  long evals = 0;
  std::vector<double> best_history;  // best value after each iteration, non-increasing
};

/// Downhill simplex minimization (reflection/expansion/contraction/shrink).
/// lambda_max objectives are nonsmooth at eigenvalue crossings; the simplex
/// method tolerates that at the small dimensions used here.
template <typename F>
NelderMeadResult nelder_mead(F&& f, const Vec& x0, const NelderMeadOptions& opts = {}) {
  const Index n = x0.size();
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  std::vector<Vec> xs(n + 1, x0);
  std::vector<double> fs(n + 1);
  long evals = 0;
  for (Index i = 0; i < n; ++i) xs[i + 1][i] += opts.initial_step;
  for (Index i = 0; i <= n; ++i) {
    fs[i] = f(xs[i]);
    ++evals;
  }

  std::vector<Index> order(n + 1);
  auto sort_order = [&]() {
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return fs[a] < fs[b]; });
  };

  NelderMeadResult result;
  sort_order();
  result.best_history.push_back(fs[order[0]]);

  while (evals + 2 <= opts.max_evals) {
    sort_order();
    const Index best = order[0], worst = order[n], second_worst = order[n - 1];

    const double spread = std::abs(fs[worst] - fs[best]);
    double diameter = 0.0;
    for (Index i = 1; i <= n; ++i)
      diameter = std::max(diameter, (xs[order[i]] - xs[best]).norm());
    if (spread <= opts.f_tol * (1.0 + std::abs(fs[best])) && diameter <= opts.x_tol) break;

    Vec centroid = Vec::Zero(n);
    for (Index i = 0; i <= n; ++i)
      if (i != worst) centroid += xs[i];
    centroid /= static_cast<double>(n);

    Vec xr = centroid + alpha * (centroid - xs[worst]);
    const double fr = f(xr);
    ++evals;

    if (fr < fs[best]) {
      Vec xe = centroid + gamma * (xr - centroid);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) {
        xs[worst] = std::move(xe);
        fs[worst] = fe;
      } else {
        xs[worst] = std::move(xr);
        fs[worst] = fr;
      }
    } else if (fr < fs[second_worst]) {
      xs[worst] = std::move(xr);
      fs[worst] = fr;
    } else {
      Vec xc = centroid + rho * (xs[worst] - centroid);
      const double fc = f(xc);
      ++evals;
      if (fc < fs[worst]) {
        xs[worst] = std::move(xc);
        fs[worst] = fc;
      } else {
        for (Index i = 0; i <= n; ++i) {
          if (i == best) continue;
          xs[i] = xs[best] + sigma * (xs[i] - xs[best]);
          fs[i] = f(xs[i]);
          ++evals;
          if (evals >= opts.max_evals) break;
        }
      }
    }
    sort_order();
    result.best_history.push_back(std::min(result.best_history.back(), fs[order[0]]));
  }

  sort_order();
  result.x = xs[order[0]];
  result.f = fs[order[0]];
  result.evals = evals;
  return result;
}

}  // namespace lvcert
