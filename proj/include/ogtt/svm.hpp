#ifndef OGTT_SVM_HPP
#define OGTT_SVM_HPP

// Linear soft-margin SVM in the plane. Training solves the dual
//   max sum(a) - 1/2 sum_ij a_i a_j y_i y_j <x_i, x_j>,  0 <= a_i <= C,  sum(a_i y_i) = 0
// by sequential minimal optimization with second-order working set selection
// (Fan, Chen & Lin, JMLR 6, 2005), which fixes the primal
//   1/2 |w|^2 + C sum max(0, 1 - y_i (w.x_i + b)).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "ogtt/error.hpp"

namespace ogtt {

using Point2 = std::array<double, 2>;

struct Hyperplane {
  Point2 w{};
  double b = 0.0;

  double margin(const Point2& x) const { return w[0] * x[0] + w[1] * x[1] + b; }
  /// +1 on the non-negative side.
  int label(const Point2& x) const { return margin(x) >= 0.0 ? 1 : -1; }
};

struct SvmSettings {
  double tolerance = 1e-9;  ///< stopping gap on the KKT violation
  std::size_t max_iter = 1000000;
};

/// Primal objective 1/2 |w|^2 + C sum hinge.
inline double svm_objective(const Hyperplane& h, std::span<const Point2> x, std::span<const int> y, double c) {
  double hinge = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) hinge += std::max(0.0, 1.0 - y[i] * h.margin(x[i]));
  return 0.5 * (h.w[0] * h.w[0] + h.w[1] * h.w[1]) + c * hinge;
}

/// Labels must be +1 or -1 with both present. Deterministic.
inline Hyperplane train_linear_svm(std::span<const Point2> x, std::span<const int> y, double c,
                                   const SvmSettings& settings = {}) {
  const std::size_t n = x.size();
  if (n != y.size()) throw InvalidArgument("points and labels differ in length");
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("C must be positive");
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] == 1) pos = true;
    else if (y[i] == -1) neg = true;
    else throw InvalidArgument("labels must be +1 or -1");
    if (!std::isfinite(x[i][0]) || !std::isfinite(x[i][1])) throw InvalidArgument("non-finite feature");
  }
  if (!pos || !neg) throw TrainingError("training set needs both labels");
  if (std::all_of(x.begin(), x.end(), [&](const Point2& p) { return p == x[0]; }))
    throw TrainingError("all training points are identical");

  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      q[i * n + j] = y[i] * y[j] * (x[i][0] * x[j][0] + x[i][1] * x[j][1]);
  auto Q = [&](std::size_t i, std::size_t j) { return q[i * n + j]; };

  std::vector<double> alpha(n, 0.0), grad(n, -1.0);
  auto in_up = [&](std::size_t t) { return (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0); };
  auto in_low = [&](std::size_t t) { return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < c); };
  constexpr double kTau = 1e-12;

  for (std::size_t iter = 0; iter < settings.max_iter; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t)
      if (in_up(t) && -y[t] * grad[t] >= gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    if (i == n) break;
    double gmin = std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      gmin = std::min(gmin, -y[t] * grad[t]);
      const double diff = gmax + y[t] * grad[t];
      if (diff > 0.0) {
        double a = Q(i, i) + Q(t, t) - 2.0 * y[i] * y[t] * Q(i, t);
        if (a <= 0.0) a = kTau;
        if (-diff * diff / a < best) {
          best = -diff * diff / a;
          j = t;
        }
      }
    }
    if (j == n || gmax - gmin < settings.tolerance) break;

    const double old_i = alpha[i], old_j = alpha[j];
    if (y[i] != y[j]) {
      double a = Q(i, i) + Q(j, j) + 2.0 * Q(i, j);
      if (a <= 0.0) a = kTau;
      const double delta = (-grad[i] - grad[j]) / a;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0 && alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = diff;
      } else if (diff <= 0.0 && alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0 && alpha[i] > c) {
        alpha[i] = c;
        alpha[j] = c - diff;
      } else if (diff <= 0.0 && alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double a = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
      if (a <= 0.0) a = kTau;
      const double delta = (grad[i] - grad[j]) / a;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c && alpha[i] > c) {
        alpha[i] = c;
        alpha[j] = sum - c;
      } else if (sum <= c && alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c && alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = sum - c;
      } else if (sum <= c && alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += Q(t, i) * di + Q(t, j) * dj;
  }

  Hyperplane h;
  for (std::size_t t = 0; t < n; ++t) {
    h.w[0] += alpha[t] * y[t] * x[t][0];
    h.w[1] += alpha[t] * y[t] * x[t][1];
  }
  // Offset: average over free multipliers, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    const bool at_upper = alpha[t] >= c, at_lower = alpha[t] <= 0.0;
    if (at_upper) {
      if (y[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (at_lower) {
      if (y[t] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / double(n_free) : 0.5 * (ub + lb);
  h.b = -rho;

  double scale = 0.0;
  for (const auto& p : x) scale = std::max({scale, std::abs(p[0]), std::abs(p[1])});
  if (std::hypot(h.w[0], h.w[1]) * scale <= 1e-12) throw TrainingError("trained weight vector is zero");
  return h;
}

}  // namespace ogtt

#endif  // OGTT_SVM_HPP
