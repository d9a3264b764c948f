#ifndef OGTT_MODEL_HPP
#define OGTT_MODEL_HPP

// Seven-compartment glucose / insulin / glucagon model of the oral glucose
// tolerance test. Insulin, glucagon and gastrointestinal glucose each pass
// through a two-stage Erlang chain; secretion switches on the sign of G - Gb.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ogtt/error.hpp"

namespace ogtt {

/// Insulin and glucagon clearance: mean-life of 31 minutes, expressed in 1/hr.
inline constexpr double kHormoneClearance = 60.0 / 31.0;
inline constexpr double kDefaultV0 = 400.0;
inline constexpr double kDefaultSigma = 5.0;
inline constexpr double kDefaultStep = 0.005;

/// Sampling times of the test, in hours.
inline constexpr std::array<double, 5> kObservationTimes{0.0, 0.5, 1.0, 1.5, 2.0};

/// Inferred parameters in canonical order (theta0, theta1, theta2, Gb, theta3).
using ParamVector = std::array<double, 5>;

enum ParamIndex : std::size_t { kTheta0 = 0, kTheta1 = 1, kTheta2 = 2, kGb = 3, kTheta3 = 4 };

inline constexpr std::array<const char*, 5> kParamNames{"theta0", "theta1", "theta2", "gb", "theta3"};

struct ModelParams {
  double theta0 = 1.0;   ///< GI absorption rate, 1/hr
  double theta1 = 10.0;  ///< insulin response to blood glucose, 1/hr^2
  double theta2 = 10.0;  ///< glucagon response to blood glucose, 1/hr^2
  double Gb = 90.0;      ///< basal glucose, mg/dl
  double theta3 = 6.0;   ///< insulin response to GI glucose, 1/hr^2
  double lambda5 = kHormoneClearance;
  double lambda7 = kHormoneClearance;
  double V0 = kDefaultV0;
  double sigma = kDefaultSigma;

  static ModelParams from_vector(const ParamVector& v) {
    ModelParams p;
    p.theta0 = v[kTheta0];
    p.theta1 = v[kTheta1];
    p.theta2 = v[kTheta2];
    p.Gb = v[kGb];
    p.theta3 = v[kTheta3];
    return p;
  }

  ParamVector to_vector() const { return {theta0, theta1, theta2, Gb, theta3}; }

  /// Throws InvalidArgument unless every rate is positive and finite.
  void validate() const {
    const double values[] = {theta0, theta1, theta2, Gb, theta3, lambda5, lambda7, sigma};
    for (double x : values) {
      if (!(std::isfinite(x) && x > 0.0)) throw InvalidArgument("model parameters must be positive and finite");
    }
    if (!(std::isfinite(V0) && V0 >= 0.0)) throw InvalidArgument("V0 must be nonnegative");
  }
};

struct SystemState {
  double G = 0.0;   ///< blood glucose, mg/dl
  double I1 = 0.0;  ///< scaled insulin, first stage
  double I2 = 0.0;
  double L1 = 0.0;  ///< scaled glucagon, first stage
  double L2 = 0.0;
  double V1 = 0.0;  ///< GI glucose, stomach stage
  double V2 = 0.0;  ///< GI glucose, absorbing stage

  static constexpr std::size_t kSize = 7;

  std::array<double, kSize> as_array() const { return {G, I1, I2, L1, L2, V1, V2}; }

  bool finite() const {
    for (double x : as_array())
      if (!std::isfinite(x)) return false;
    return true;
  }

  friend SystemState operator+(const SystemState& a, const SystemState& b) {
    return {a.G + b.G, a.I1 + b.I1, a.I2 + b.I2, a.L1 + b.L1, a.L2 + b.L2, a.V1 + b.V1, a.V2 + b.V2};
  }
  friend SystemState operator*(double s, const SystemState& a) {
    return {s * a.G, s * a.I1, s * a.I2, s * a.L1, s * a.L2, s * a.V1, s * a.V2};
  }
  friend bool operator==(const SystemState&, const SystemState&) = default;
};

inline constexpr std::array<const char*, SystemState::kSize> kStateNames{"G", "I1", "I2", "L1", "L2", "V1", "V2"};

struct Trajectory {
  std::vector<double> times;  ///< hr, strictly increasing
  std::vector<SystemState> states;

  std::size_t size() const { return times.size(); }
  double step() const { return times.size() > 1 ? (times.back() - times.front()) / double(times.size() - 1) : 0.0; }
};

/// (x)^+ : the insulin/glucagon secretion switch.
constexpr double positive_part(double x) { return x >= 0.0 ? x : 0.0; }

/// Time derivative of the state.
inline SystemState rhs(const SystemState& s, const ModelParams& p) {
  const double k5 = 2.0 * p.lambda5;
  const double k7 = 2.0 * p.lambda7;
  const double k0 = 2.0 * p.theta0;
  SystemState d;
  d.G = s.L2 - s.I2 + p.theta0 * s.V2;
  d.I1 = p.theta1 * positive_part(s.G - p.Gb) + p.theta3 * s.V2 - k5 * s.I1;
  d.I2 = k5 * s.I1 - k5 * s.I2;
  d.L1 = p.theta2 * positive_part(p.Gb - s.G) - k7 * s.L1;
  d.L2 = k7 * s.L1 - k7 * s.L2;
  d.V1 = -k0 * s.V1;
  d.V2 = k0 * s.V1 - k0 * s.V2;
  return d;
}

inline SystemState initial_state(const ModelParams& p, double g0) {
  SystemState s;
  s.G = g0;
  s.V1 = p.V0;
  return s;
}

namespace detail {

inline SystemState rk4_step(const SystemState& s, const ModelParams& p, double h) {
  const SystemState k1 = rhs(s, p);
  const SystemState k2 = rhs(s + (0.5 * h) * k1, p);
  const SystemState k3 = rhs(s + (0.5 * h) * k2, p);
  const SystemState k4 = rhs(s + h * k3, p);
  return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline std::size_t step_count(double t_end, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("integration step must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidArgument("t_end must be positive");
  // Shrink the step slightly, if needed, so the grid lands on t_end.
  return static_cast<std::size_t>(std::ceil(t_end / step - 1e-9));
}

/// Fixed-step RK4 over [0, t_end]; calls visit(index, time, state) at every grid point.
template <class Visitor>
void integrate(const ModelParams& p, double g0, double t_end, double step, Visitor&& visit) {
  const std::size_t n = step_count(t_end, step);
  const double h = t_end / double(n);
  SystemState s = initial_state(p, g0);
  if (!s.finite()) throw IntegrationError("non-finite initial state", 0.0);
  visit(std::size_t{0}, 0.0, s);
  for (std::size_t i = 1; i <= n; ++i) {
    s = rk4_step(s, p, h);
    const double t = (i == n) ? t_end : t_end * double(i) / double(n);
    if (!s.finite()) throw IntegrationError("non-finite state at t=" + std::to_string(t), t);
    visit(i, t, s);
  }
}

}  // namespace detail

/// Integrates from (g0, 0, 0, 0, 0, V0, 0) with classical RK4. The grid contains 0 and t_end.
inline Trajectory simulate(const ModelParams& params, double g0, double t_end, double step = kDefaultStep) {
  Trajectory traj;
  const std::size_t n = detail::step_count(t_end, step);
  traj.times.reserve(n + 1);
  traj.states.reserve(n + 1);
  detail::integrate(params, g0, t_end, step, [&](std::size_t, double t, const SystemState& s) {
    traj.times.push_back(t);
    traj.states.push_back(s);
  });
  return traj;
}

/// Glucose at the grid point nearest each requested time.
inline std::vector<double> observe(const Trajectory& traj, std::span<const double> times) {
  if (traj.size() == 0) throw OutOfRange("empty trajectory");
  const double t0 = traj.times.front();
  const double t1 = traj.times.back();
  const double h = traj.step();
  const double slack = 1e-9 * std::max(1.0, std::abs(t1));
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    if (!(t >= t0 - slack && t <= t1 + slack))
      throw OutOfRange("observation time " + std::to_string(t) + " outside trajectory range");
    std::size_t idx = 0;
    if (h > 0.0) idx = static_cast<std::size_t>(std::llround((t - t0) / h));
    idx = std::min(idx, traj.size() - 1);
    out.push_back(traj.states[idx].G);
  }
  return out;
}

/// Same values as observe(simulate(...), times) without storing the trajectory.
inline std::vector<double> simulate_glucose(const ModelParams& params, double g0, std::span<const double> times,
                                            double step = kDefaultStep) {
  double t_end = 0.0;
  for (double t : times) {
    if (!(t >= 0.0)) throw OutOfRange("observation time must be nonnegative");
    t_end = std::max(t_end, t);
  }
  std::vector<double> out(times.size(), g0);
  if (t_end == 0.0) return out;
  const std::size_t n = detail::step_count(t_end, step);
  const double h = t_end / double(n);
  std::vector<std::size_t> wanted(times.size());
  for (std::size_t k = 0; k < times.size(); ++k)
    wanted[k] = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(times[k] / h)));
  detail::integrate(params, g0, t_end, step, [&](std::size_t i, double, const SystemState& s) {
    for (std::size_t k = 0; k < wanted.size(); ++k)
      if (wanted[k] == i) out[k] = s.G;
  });
  return out;
}

struct GiStages {
  double V1;
  double V2;
};

/// Exact solution of the decoupled two-stage GI chain.
inline GiStages gi_closed_form(double t, double theta0, double V0) {
  const double decay = std::exp(-2.0 * theta0 * t);
  return {V0 * decay, 2.0 * theta0 * t * V0 * decay};
}

/// Content of the last stage of an m-stage GI chain with per-stage rate m*theta0.
inline double gi_erlang_stage(int m, double t, double theta0, double V0) {
  if (m < 1 || m > 3) throw InvalidArgument("Erlang stage count must be 1, 2 or 3");
  const double x = m * theta0 * t;
  double factorial = 1.0;
  for (int k = 2; k < m; ++k) factorial *= k;
  return V0 * std::pow(x, m - 1) * std::exp(-x) / factorial;
}

}  // namespace ogtt

#endif  // OGTT_MODEL_HPP
