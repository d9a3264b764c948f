#ifndef OGTT_INFERENCE_HPP
#define OGTT_INFERENCE_HPP

// Bayesian inversion of five glucose measurements for
// (theta0, theta1, theta2, Gb, theta3): independent gamma priors, Gaussian
// observation noise with fixed sigma, and the ODE model as regressor.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "ogtt/diagnostics.hpp"
#include "ogtt/model.hpp"
#include "ogtt/patient.hpp"
#include "ogtt/twalk.hpp"

namespace ogtt {

struct GammaPrior {
  double shape;
  double rate;

  double mean() const { return shape / rate; }
  double variance() const { return shape / (rate * rate); }
  double mode() const { return shape >= 1.0 ? (shape - 1.0) / rate : 0.0; }

  double log_density(double x) const {
    if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
    return (shape - 1.0) * std::log(x) - rate * x + shape * std::log(rate) - std::lgamma(shape);
  }
};

struct PriorSpec {
  /// Indexed like ParamVector.
  std::array<GammaPrior, 5> marginals{{
      {2.0, 1.0},                       // theta0, truncated below
      {10.0, 1.0},                      // theta1
      {10.0, 1.0},                      // theta2
      {90.0 * 90.0 / 20.0, 90.0 / 20.0},  // Gb: mean 90, variance 20
      {10.0, 1.0},                      // theta3
  }};
  double theta0_lower = 0.5;

  bool in_support(std::span<const double> theta) const {
    if (theta.size() != 5) return false;
    for (double x : theta)
      if (!(std::isfinite(x) && x > 0.0)) return false;
    return theta[kTheta0] > theta0_lower;
  }
};

using PosteriorChain = Chain;

/// Sum of gamma log-densities. The truncated theta0 marginal is left
/// unnormalized, a constant offset. Returns -inf outside the support.
inline double log_prior(std::span<const double> theta, const PriorSpec& spec = {}) {
  if (!spec.in_support(theta)) return -std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (std::size_t i = 0; i < 5; ++i) s += spec.marginals[i].log_density(theta[i]);
  return s;
}

/// Gaussian log-likelihood, fully normalized.
inline double log_likelihood_from_residuals(std::span<const double> y, std::span<const double> model, double sigma) {
  double sse = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sse += (y[i] - model[i]) * (y[i] - model[i]);
  const double n = double(y.size());
  return -0.5 * n * std::log(2.0 * std::numbers::pi * sigma * sigma) - sse / (2.0 * sigma * sigma);
}

inline ModelParams with_theta(const ModelParams& constants, std::span<const double> theta) {
  ModelParams p = constants;
  p.theta0 = theta[kTheta0];
  p.theta1 = theta[kTheta1];
  p.theta2 = theta[kTheta2];
  p.Gb = theta[kGb];
  p.theta3 = theta[kTheta3];
  return p;
}

/// log pi(y | theta), with G(0) = y[0]. `constants` supplies lambda5, lambda7, V0 and sigma.
inline double log_likelihood(std::span<const double> theta, std::span<const double> y,
                             std::span<const double> times = kObservationTimes, const ModelParams& constants = {},
                             double step = kDefaultStep) {
  if (y.size() != times.size() || y.empty()) throw InvalidArgument("data and observation times differ in length");
  const std::vector<double> g = simulate_glucose(with_theta(constants, theta), y[0], times, step);
  return log_likelihood_from_residuals(y, g, constants.sigma);
}

inline double log_posterior(std::span<const double> theta, std::span<const double> y,
                            std::span<const double> times = kObservationTimes, const PriorSpec& spec = {},
                            const ModelParams& constants = {}, double step = kDefaultStep) {
  const double lp = log_prior(theta, spec);
  if (!std::isfinite(lp)) return lp;
  return lp + log_likelihood(theta, y, times, constants, step);
}

template <class Rng>
ParamVector draw_prior(const PriorSpec& spec, Rng& rng) {
  ParamVector v{};
  for (std::size_t i = 0; i < 5; ++i) {
    std::gamma_distribution<double> g(spec.marginals[i].shape, 1.0 / spec.marginals[i].rate);
    do {
      v[i] = g(rng);
    } while (i == kTheta0 && !(v[i] > spec.theta0_lower));
  }
  return v;
}

inline constexpr std::array<int, 9> kQuantileGrid{10, 20, 30, 40, 50, 60, 70, 80, 90};

struct PosteriorSummary {
  ParamVector map{};
  ParamVector cm{};
  ParamVector median{};
  ParamVector stdev{};  ///< per-coordinate sample standard deviation
  std::array<ParamVector, 9> quantiles{};  ///< indexed like kQuantileGrid
  std::optional<double> iat;               ///< of the log-posterior trace; empty when undefined
  ParamVector iat_coords{};                ///< per-coordinate IAT, NaN when undefined
  double map_logpost = 0.0;
  double rmse_at_map = 0.0;
  std::size_t n_samples = 0;

  /// q must be one of 10, 20, ..., 90.
  const ParamVector& at_quantile(int q) const {
    for (std::size_t k = 0; k < kQuantileGrid.size(); ++k)
      if (kQuantileGrid[k] == q) return quantiles[k];
    throw InvalidArgument("quantile must be one of 10, 20, ..., 90");
  }

  std::optional<double> iat_per_param() const {
    if (!iat) return std::nullopt;
    return *iat / 5.0;
  }
};

inline double rmse(std::span<const double> y, std::span<const double> model) {
  double sse = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sse += (y[i] - model[i]) * (y[i] - model[i]);
  return std::sqrt(sse / double(y.size()));
}

/// Post-burn-in estimators. MAP is the stored sample with the largest log-posterior.
inline PosteriorSummary summarize(const PosteriorChain& chain, std::span<const double> y,
                                  std::span<const double> times = kObservationTimes,
                                  const ModelParams& constants = {}, double step = kDefaultStep) {
  if (chain.dim != 5) throw InvalidArgument("posterior chain must be five-dimensional");
  if (chain.size() < chain.burn_in + 100) throw InvalidArgument("chain too short to summarize");
  PosteriorSummary s;
  const std::size_t from = chain.burn_in;
  s.n_samples = chain.size() - from;

  std::size_t best = from;
  for (std::size_t i = from; i < chain.size(); ++i)
    if (chain.logpost[i] > chain.logpost[best]) best = i;
  const auto map_sample = chain.sample(best);
  std::copy(map_sample.begin(), map_sample.end(), s.map.begin());
  s.map_logpost = chain.logpost[best];

  for (std::size_t j = 0; j < 5; ++j) {
    std::vector<double> trace = chain.coordinate(j, from);
    s.cm[j] = mean(trace);
    s.stdev[j] = stddev(trace);
    try {
      s.iat_coords[j] = iat(trace);
    } catch (const UndefinedIat&) {
      s.iat_coords[j] = std::numeric_limits<double>::quiet_NaN();
    }
    std::sort(trace.begin(), trace.end());
    s.median[j] = quantile_sorted(trace, 0.5);
    for (std::size_t k = 0; k < kQuantileGrid.size(); ++k)
      s.quantiles[k][j] = quantile_sorted(trace, kQuantileGrid[k] / 100.0);
  }
  try {
    const std::vector<double> lp(chain.logpost.begin() + std::ptrdiff_t(from), chain.logpost.end());
    s.iat = iat(lp);
  } catch (const UndefinedIat&) {
    s.iat.reset();
  }
  const std::vector<double> g = simulate_glucose(with_theta(constants, s.map), y[0], times, step);
  s.rmse_at_map = rmse(y, g);
  return s;
}

struct InferenceConfig {
  std::size_t n_iter = 10000;
  std::size_t burn_in = 1000;
  double step = kDefaultStep;
  std::uint64_t seed = 20240101;
  ModelParams constants{};  ///< only lambda5, lambda7, V0 and sigma are read
  PriorSpec prior{};
  TwalkSettings twalk{};
  std::size_t init_candidates = 1000;
  std::size_t max_init_draws = 10000;
  std::size_t pilots = 4;         ///< short runs from distinct candidate pairs
  std::size_t pilot_iter = 1000;  ///< steps per pilot run
};

/// SplitMix64 finalizer, used to derive independent RNG streams.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-patient stream: mixes the base seed with a FNV-1a hash of the id.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix_seed(base ^ mix_seed(h));
}

/// Runs the t-walk on an arbitrary log-posterior over the prior support,
/// starting from two independent prior draws with finite log-posterior.
template <class LogPost>
PosteriorChain sample_posterior(LogPost&& logpost, const InferenceConfig& config, std::uint64_t seed) {
  if (!(config.n_iter > config.burn_in)) throw InvalidArgument("n_iter must exceed burn_in");
  std::mt19937_64 init_rng(mix_seed(seed ^ 0x5eed5eed5eed5eedULL));
  // Rank `init_candidates` prior draws with finite log-posterior; the best pairs seed the pilots.
  std::vector<std::pair<double, ParamVector>> pool;
  for (std::size_t k = 0; k < config.max_init_draws && pool.size() < config.init_candidates; ++k) {
    const ParamVector v = draw_prior(config.prior, init_rng);
    const double lp = logpost(std::span<const double>(v));
    if (std::isfinite(lp)) pool.emplace_back(lp, v);
  }
  if (pool.size() < 2) throw SamplerInitError("fewer than two prior draws with finite log-posterior");
  const std::size_t n_pairs = std::max<std::size_t>(1, std::min(config.pilots, pool.size() / 2));
  std::partial_sort(pool.begin(), pool.begin() + 2 * n_pairs, pool.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });
  const PriorSpec& prior = config.prior;
  auto in_support = [&prior](std::span<const double> v) { return prior.in_support(v); };
  auto as_vec = [](const ParamVector& v) { return std::vector<double>(v.begin(), v.end()); };
  std::vector<double> x0 = as_vec(pool[0].second), x0p = as_vec(pool[1].second);
  if (config.pilots > 0 && config.pilot_iter > 0) {
    // Pilot runs escape poor starting basins; the main chain starts from the
    // best point any pilot reached, paired with that pilot's last point.
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n_pairs; ++k) {
      const Chain pilot = twalk_sample(logpost, in_support, as_vec(pool[2 * k].second),
                                       as_vec(pool[2 * k + 1].second), config.pilot_iter,
                                       mix_seed(seed + k + 1), config.twalk);
      const auto top = std::max_element(pilot.logpost.begin(), pilot.logpost.end());
      if (*top <= best) continue;
      const auto pick = pilot.sample(std::size_t(top - pilot.logpost.begin()));
      const auto last = pilot.sample(pilot.size() - 1);
      best = *top;
      x0.assign(pick.begin(), pick.end());
      x0p.assign(last.begin(), last.end());
      if (x0 == x0p) x0p = as_vec(pool[2 * k + 1].second);
    }
    if (x0 == x0p) x0p = as_vec(pool[1].second);
  }
  PosteriorChain chain = twalk_sample(logpost, in_support, std::move(x0), std::move(x0p), config.n_iter, seed,
                                      config.twalk);
  chain.burn_in = config.burn_in;
  return chain;
}

struct PatientPosterior {
  PosteriorChain chain;
  PosteriorSummary summary;
};

/// Samples the posterior for one patient; the chain seed is derive_seed(config.seed, id).
inline PatientPosterior infer_patient(const PatientRecord& record, const InferenceConfig& config) {
  try {
    const std::span<const double> y(record.glucose);
    for (double v : y)
      if (!std::isfinite(v)) throw InvalidArgument("non-finite glucose value");
    auto logpost = [&](std::span<const double> theta) {
      return log_posterior(theta, y, kObservationTimes, config.prior, config.constants, config.step);
    };
    PatientPosterior out;
    out.chain = sample_posterior(logpost, config, derive_seed(config.seed, record.id));
    out.summary = summarize(out.chain, y, kObservationTimes, config.constants, config.step);
    return out;
  } catch (const IntegrationError& e) {
    throw IntegrationError("patient " + record.id + ": " + e.what(), e.time());
  } catch (const Error& e) {
    throw Error("patient " + record.id + ": " + e.what());
  }
}

}  // namespace ogtt

#endif  // OGTT_INFERENCE_HPP
