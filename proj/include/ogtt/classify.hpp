#ifndef OGTT_CLASSIFY_HPP
#define OGTT_CLASSIFY_HPP

// Healthy / impaired classification in the insulin-score plane (1/theta1, 1/theta3).
// One hyperplane per posterior quantile 10..90, combined by majority vote.

#include <array>
#include <cmath>
#include <future>
#include <span>
#include <string>
#include <vector>

#include "ogtt/inference.hpp"
#include "ogtt/patient.hpp"
#include "ogtt/svm.hpp"

namespace ogtt {

/// +1 impaired, -1 healthy.
inline int class_label(Category c) { return is_impaired(c) ? 1 : -1; }

struct EstimateSelector {
  enum class Kind { Map, Cm, Median, Quantile };
  Kind kind = Kind::Map;
  int q = 50;  ///< only for Kind::Quantile

  static EstimateSelector map() { return {Kind::Map, 0}; }
  static EstimateSelector cm() { return {Kind::Cm, 0}; }
  static EstimateSelector median() { return {Kind::Median, 0}; }
  static EstimateSelector quantile(int q) { return {Kind::Quantile, q}; }
};

inline const ParamVector& select_estimate(const PosteriorSummary& s, EstimateSelector which) {
  switch (which.kind) {
    case EstimateSelector::Kind::Map: return s.map;
    case EstimateSelector::Kind::Cm: return s.cm;
    case EstimateSelector::Kind::Median: return s.median;
    case EstimateSelector::Kind::Quantile: return s.at_quantile(which.q);
  }
  return s.map;
}

inline Point2 insulin_scores(double theta1, double theta3) {
  if (!(theta1 > 0.0) || !(theta3 > 0.0) || !std::isfinite(theta1) || !std::isfinite(theta3))
    throw InvalidScore("insulin scores need positive finite theta1 and theta3");
  return {1.0 / theta1, 1.0 / theta3};
}

inline Point2 insulin_scores(const PosteriorSummary& s, EstimateSelector which = EstimateSelector::map()) {
  const ParamVector& v = select_estimate(s, which);
  return insulin_scores(v[kTheta1], v[kTheta3]);
}

struct EnsembleOptions {
  double c = 1.0;
  /// Train on z-scored features and map the hyperplane back to raw scores.
  bool standardize = true;
  SvmSettings svm{};
};

struct ClassifierModel {
  double c = 1.0;
  bool standardized = true;
  std::array<Hyperplane, 9> planes{};  ///< indexed like kQuantileGrid
};

/// Fits on z-scored coordinates; the returned hyperplane acts on raw points.
inline Hyperplane train_standardized(std::span<const Point2> x, std::span<const int> y, double c,
                                     const SvmSettings& settings = {}) {
  Point2 mu{}, sd{};
  for (const auto& p : x)
    for (int k = 0; k < 2; ++k) mu[k] += p[k] / double(x.size());
  for (const auto& p : x)
    for (int k = 0; k < 2; ++k) sd[k] += (p[k] - mu[k]) * (p[k] - mu[k]) / double(x.size());
  for (int k = 0; k < 2; ++k) sd[k] = sd[k] > 0.0 ? std::sqrt(sd[k]) : 1.0;
  std::vector<Point2> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int k = 0; k < 2; ++k) z[i][k] = (x[i][k] - mu[k]) / sd[k];
  const Hyperplane hz = train_linear_svm(z, y, c, settings);
  Hyperplane h;
  h.b = hz.b;
  for (int k = 0; k < 2; ++k) {
    h.w[k] = hz.w[k] / sd[k];
    h.b -= hz.w[k] * mu[k] / sd[k];
  }
  return h;
}

/// One hyperplane per quantile, trained concurrently. Needs two patients per class.
inline ClassifierModel quantile_ensemble(std::span<const PosteriorSummary> summaries, std::span<const Category> categories,
                                         const EnsembleOptions& options = {}) {
  if (summaries.size() != categories.size()) throw InvalidArgument("summaries and categories differ in length");
  std::vector<int> y;
  int n_pos = 0, n_neg = 0;
  for (Category c : categories) {
    y.push_back(class_label(c));
    (y.back() > 0 ? n_pos : n_neg)++;
  }
  if (n_pos < 2 || n_neg < 2) throw TrainingError("each class needs at least two patients");

  ClassifierModel model;
  model.c = options.c;
  model.standardized = options.standardize;
  std::array<std::future<Hyperplane>, 9> jobs;
  for (std::size_t k = 0; k < kQuantileGrid.size(); ++k) {
    std::vector<Point2> x;
    for (const auto& s : summaries) x.push_back(insulin_scores(s, EstimateSelector::quantile(kQuantileGrid[k])));
    jobs[k] = std::async(std::launch::async, [x = std::move(x), &y, &options] {
      return options.standardize ? train_standardized(x, y, options.c, options.svm)
                                 : train_linear_svm(x, y, options.c, options.svm);
    });
  }
  for (std::size_t k = 0; k < jobs.size(); ++k) model.planes[k] = jobs[k].get();
  return model;
}

struct Prediction {
  int label = -1;  ///< +1 impaired, -1 healthy
  std::array<double, 9> margins{};
  int impaired_votes = 0;
  bool transition = false;  ///< the quantile votes disagree
};

/// Quantile q's scores against hyperplane q; margin 0 counts as impaired.
inline Prediction predict(const ClassifierModel& model, const PosteriorSummary& s) {
  Prediction p;
  for (std::size_t k = 0; k < kQuantileGrid.size(); ++k) {
    p.margins[k] = model.planes[k].margin(insulin_scores(s, EstimateSelector::quantile(kQuantileGrid[k])));
    if (p.margins[k] >= 0.0) ++p.impaired_votes;
  }
  p.label = 2 * p.impaired_votes > int(kQuantileGrid.size()) ? 1 : -1;
  p.transition = p.impaired_votes != 0 && p.impaired_votes != int(kQuantileGrid.size());
  return p;
}

}  // namespace ogtt

#endif  // OGTT_CLASSIFY_HPP
