#ifndef OGTT_TWALK_HPP
#define OGTT_TWALK_HPP

// The t-walk: a self-adjusting MCMC sampler over the product target
// pi(x) pi(x') of two coupled points.
// Each step moves one of the two points, chosen with probability 1/2, with one
// of four kernels: walk, traverse, blow or hop. A random subset of
// coordinates, each kept with probability min(n, n1phi) / n, is perturbed.
// Kernel constants follow the reference implementation: aw = 1.5, at = 6,
// n1phi = 4, kernel probabilities (traverse, walk, blow, hop) =
// (0.4918, 0.4918, 0.0082, 0.0082).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "ogtt/error.hpp"

namespace ogtt {

struct TwalkSettings {
  double aw = 1.5;     ///< walk scale
  double at = 6.0;     ///< traverse scale
  double n1phi = 4.0;  ///< expected number of coordinates moved per step
  double p_traverse = 0.4918;
  double p_walk = 0.4918;
  double p_blow = 0.0082;
  // hop takes the remaining mass
};

/// MCMC output: the primary point after every step, with its log-target value.
struct Chain {
  std::size_t dim = 0;
  std::vector<double> values;  ///< row-major, size() x dim
  std::vector<double> logpost;
  std::size_t burn_in = 0;
  std::uint64_t seed = 0;
  std::size_t accepted = 0;

  std::size_t size() const { return logpost.size(); }

  std::span<const double> sample(std::size_t i) const { return {values.data() + i * dim, dim}; }

  /// Trace of coordinate j from iteration `from` onward.
  std::vector<double> coordinate(std::size_t j, std::size_t from = 0) const {
    std::vector<double> out;
    out.reserve(size() - std::min(from, size()));
    for (std::size_t i = from; i < size(); ++i) out.push_back(values[i * dim + j]);
    return out;
  }

  double acceptance_rate() const { return size() ? double(accepted) / double(size()) : 0.0; }

  friend bool operator==(const Chain&, const Chain&) = default;
};

namespace detail {

class TwalkKernel {
 public:
  TwalkKernel(std::size_t dim, const TwalkSettings& s, std::uint64_t seed)
      : dim_(dim), s_(s), rng_(seed), pphi_(std::min(double(dim), s.n1phi) / double(dim)) {}

  double uniform() { return unif_(rng_); }
  double normal() { return norm_(rng_); }

  /// Draws the coordinate subset; returns its size.
  std::size_t draw_subset(std::vector<char>& phi) {
    phi.assign(dim_, 0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < dim_; ++i) {
      phi[i] = uniform() < pphi_;
      n += phi[i];
    }
    return n;
  }

  double walk_step() {
    const double u = uniform();
    return s_.aw / (1.0 + s_.aw) * (s_.aw * u * u + 2.0 * u - 1.0);
  }

  double traverse_beta() {
    const double at = s_.at;
    if (uniform() < (at - 1.0) / (2.0 * at)) return std::exp(std::log(uniform()) / (at + 1.0));
    return std::exp(std::log(uniform()) / (1.0 - at));
  }

 private:
  std::size_t dim_;
  TwalkSettings s_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
  double pphi_;
};

inline double subset_max_abs_diff(const std::vector<double>& a, const std::vector<double>& b,
                                  const std::vector<char>& phi) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (phi[i]) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Log-density of an isotropic normal on the selected coordinates.
inline double subset_normal_logpdf(const std::vector<double>& h, const std::vector<double>& center, double sd,
                                   const std::vector<char>& phi, std::size_t nphi) {
  double sq = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i)
    if (phi[i]) sq += (h[i] - center[i]) * (h[i] - center[i]);
  const double k = double(nphi);
  return -0.5 * k * std::log(2.0 * std::numbers::pi) - k * std::log(sd) - 0.5 * sq / (sd * sd);
}

}  // namespace detail

/// Runs n_iter t-walk steps from the pair (x0, x0p).
///
/// `logpost(std::span<const double>) -> double` evaluates the log-target, and
/// `support(std::span<const double>) -> bool` is checked first; proposals
/// outside the support or with a non-finite log-target are rejected.
/// The result is a deterministic function of the inputs and the seed.
template <class LogPost, class Support>
Chain twalk_sample(LogPost&& logpost, Support&& support, std::vector<double> x0, std::vector<double> x0p,
                   std::size_t n_iter, std::uint64_t seed, const TwalkSettings& settings = {}) {
  const std::size_t n = x0.size();
  if (n == 0 || x0p.size() != n) throw SamplerInitError("initial points must have the same nonzero dimension");
  if (x0 == x0p) throw SamplerInitError("initial points must differ in at least one coordinate");
  auto eval = [&](const std::vector<double>& v) {
    const std::span<const double> s(v);
    if (!support(s)) return -std::numeric_limits<double>::infinity();
    const double lp = logpost(s);
    return std::isfinite(lp) ? lp : -std::numeric_limits<double>::infinity();
  };
  double lp = eval(x0);
  double lpp = eval(x0p);
  if (!std::isfinite(lp) || !std::isfinite(lpp))
    throw SamplerInitError("initial points must be in the support with finite log-target");

  detail::TwalkKernel k(n, settings, seed);
  Chain chain;
  chain.dim = n;
  chain.seed = seed;
  chain.values.reserve(n_iter * n);
  chain.logpost.reserve(n_iter);

  std::vector<double> x = std::move(x0), xp = std::move(x0p);
  std::vector<double> y(n);
  std::vector<char> phi;
  const double c_walk = settings.p_traverse + settings.p_walk;
  const double c_blow = c_walk + settings.p_blow;

  for (std::size_t it = 0; it < n_iter; ++it) {
    const double ker = k.uniform();
    const bool move_primary = k.uniform() < 0.5;
    // h moves, o stays put.
    std::vector<double>& h = move_primary ? x : xp;
    const std::vector<double>& o = move_primary ? xp : x;
    const double lp_h = move_primary ? lp : lpp;
    const std::size_t nphi = k.draw_subset(phi);
    y = h;

    double log_ratio = -std::numeric_limits<double>::infinity();
    double lp_y = -std::numeric_limits<double>::infinity();
    bool nothing_moved = nphi == 0;

    if (ker < settings.p_traverse) {
      const double beta = k.traverse_beta();
      for (std::size_t i = 0; i < n; ++i)
        if (phi[i]) y[i] = o[i] + beta * (o[i] - h[i]);
      if (!nothing_moved) {
        lp_y = eval(y);
        if (std::isfinite(lp_y)) log_ratio = lp_y - lp_h + (double(nphi) - 2.0) * std::log(beta);
      }
    } else if (ker < c_walk) {
      for (std::size_t i = 0; i < n; ++i)
        if (phi[i]) y[i] = h[i] + (h[i] - o[i]) * k.walk_step();
      if (!nothing_moved) {
        bool distinct = true;
        for (std::size_t i = 0; i < n; ++i) distinct = distinct && y[i] != o[i];
        if (distinct) {
          lp_y = eval(y);
          if (std::isfinite(lp_y)) log_ratio = lp_y - lp_h;
        }
      }
    } else if (ker < c_blow) {
      const double sd = detail::subset_max_abs_diff(h, o, phi);
      for (std::size_t i = 0; i < n; ++i)
        if (phi[i]) y[i] = o[i] + sd * k.normal();
      if (!nothing_moved && sd > 0.0) {
        lp_y = eval(y);
        const double sd_back = detail::subset_max_abs_diff(y, o, phi);
        if (std::isfinite(lp_y) && sd_back > 0.0) {
          const double fwd = detail::subset_normal_logpdf(y, o, sd, phi, nphi);
          const double back = detail::subset_normal_logpdf(h, o, sd_back, phi, nphi);
          log_ratio = lp_y - lp_h + back - fwd;
        }
      }
    } else {
      const double sd = detail::subset_max_abs_diff(h, o, phi) / 3.0;
      for (std::size_t i = 0; i < n; ++i)
        if (phi[i]) y[i] = h[i] + sd * k.normal();
      if (!nothing_moved && sd > 0.0) {
        lp_y = eval(y);
        const double sd_back = detail::subset_max_abs_diff(y, o, phi) / 3.0;
        if (std::isfinite(lp_y) && sd_back > 0.0) {
          const double fwd = detail::subset_normal_logpdf(y, h, sd, phi, nphi);
          const double back = detail::subset_normal_logpdf(h, y, sd_back, phi, nphi);
          log_ratio = lp_y - lp_h + back - fwd;
        }
      }
    }

    const double u = k.uniform();
    if (nothing_moved) {
      ++chain.accepted;
    } else if (std::log(u) < log_ratio) {
      h = y;
      (move_primary ? lp : lpp) = lp_y;
      ++chain.accepted;
    }
    chain.values.insert(chain.values.end(), x.begin(), x.end());
    chain.logpost.push_back(lp);
  }
  return chain;
}

}  // namespace ogtt

#endif  // OGTT_TWALK_HPP
