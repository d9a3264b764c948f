#include <gtest/gtest.h>

#include <random>

#include "ogtt/classify.hpp"

using namespace ogtt;

namespace {

// A summary whose every quantile, MAP, CM and median share theta1 and theta3.
PosteriorSummary flat_summary(double theta1, double theta3) {
  PosteriorSummary s;
  const ParamVector v{1.0, theta1, 10.0, 90.0, theta3};
  s.map = s.cm = s.median = v;
  s.quantiles.fill(v);
  return s;
}

// Quantile q gets theta1, theta3 interpolated between the 10% and 90% values.
PosteriorSummary spread_summary(Point2 q10, Point2 q90) {
  PosteriorSummary s = flat_summary(q10[0], q10[1]);
  for (std::size_t k = 0; k < 9; ++k) {
    const double f = k / 8.0;
    s.quantiles[k][kTheta1] = q10[0] + f * (q90[0] - q10[0]);
    s.quantiles[k][kTheta3] = q10[1] + f * (q90[1] - q10[1]);
  }
  return s;
}

struct Cohort {
  std::vector<PosteriorSummary> summaries;
  std::vector<Category> categories;
};

// Healthy patients have large theta1, theta3 (small scores), impaired ones small.
Cohort two_clusters(std::uint64_t seed, int per_class) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> e(0.0, 0.5);
  Cohort c;
  for (int i = 0; i < per_class; ++i) {
    c.summaries.push_back(flat_summary(10.0 + e(rng), 7.0 + e(rng)));
    c.categories.push_back(i % 2 ? Category::H : Category::IFG);
    c.summaries.push_back(flat_summary(2.5 + 0.3 * e(rng), 1.2 + 0.2 * e(rng)));
    c.categories.push_back(i % 3 == 0 ? Category::T2D : Category::IGT);
  }
  return c;
}

}  // namespace

TEST(InsulinScores, Reciprocals) {
  PosteriorSummary s = flat_summary(9.77, 6.77);
  const Point2 p = insulin_scores(s);
  EXPECT_NEAR(p[0], 0.1024, 1e-4);
  EXPECT_NEAR(p[1], 0.1477, 1e-4);
  EXPECT_EQ(insulin_scores(1.0, 1.0), (Point2{1.0, 1.0}));
  EXPECT_GT(insulin_scores(2.0, 3.0)[0], insulin_scores(2.5, 3.0)[0]);
  EXPECT_GT(insulin_scores(2.0, 3.0)[1], insulin_scores(2.0, 3.5)[1]);
  s.cm[kTheta1] = 4.0;
  EXPECT_DOUBLE_EQ(insulin_scores(s, EstimateSelector::cm())[0], 0.25);
  s.quantiles[2][kTheta3] = 8.0;
  EXPECT_DOUBLE_EQ(insulin_scores(s, EstimateSelector::quantile(30))[1], 0.125);
  EXPECT_THROW(insulin_scores(0.0, 1.0), InvalidScore);
  EXPECT_THROW(insulin_scores(1.0, -2.0), InvalidScore);
}

TEST(Ensemble, TwoClustersSeparate) {
  const Cohort c = two_clusters(1, 10);
  const ClassifierModel m = quantile_ensemble(c.summaries, c.categories);
  for (const auto& h : m.planes) {
    EXPECT_LT(h.margin(insulin_scores(10.0, 7.0)), 0.0);
    EXPECT_GT(h.margin(insulin_scores(2.5, 1.2)), 0.0);
  }
  for (std::size_t i = 0; i < c.summaries.size(); ++i) {
    const Prediction p = predict(m, c.summaries[i]);
    EXPECT_EQ(p.label, class_label(c.categories[i])) << i;
    EXPECT_FALSE(p.transition);
    EXPECT_EQ(p.impaired_votes, p.label > 0 ? 9 : 0);
  }
}

TEST(Ensemble, IdenticalQuantilesGiveIdenticalPlanes) {
  const Cohort c = two_clusters(2, 6);
  const ClassifierModel m = quantile_ensemble(c.summaries, c.categories);
  for (const auto& h : m.planes) {
    EXPECT_EQ(h.w, m.planes[0].w);
    EXPECT_EQ(h.b, m.planes[0].b);
  }
}

TEST(Ensemble, UnstandardizedTrainingUsesRawScores) {
  const Cohort c = two_clusters(3, 8);
  EnsembleOptions opt;
  opt.standardize = false;
  opt.c = 1e4;
  const ClassifierModel m = quantile_ensemble(c.summaries, c.categories, opt);
  std::vector<Point2> x;
  std::vector<int> y;
  for (std::size_t i = 0; i < c.summaries.size(); ++i) {
    x.push_back(insulin_scores(c.summaries[i]));
    y.push_back(class_label(c.categories[i]));
  }
  const Hyperplane direct = train_linear_svm(x, y, 1e4);
  EXPECT_EQ(m.planes[4].w, direct.w);
  EXPECT_FALSE(m.standardized);
}

TEST(Ensemble, StandardizedPlaneActsOnRawScores) {
  std::vector<Point2> x{{0.1, 0.2}, {0.12, 0.25}, {0.4, 0.8}, {0.45, 0.7}};
  const std::vector<int> y{-1, -1, 1, 1};
  const Hyperplane h = train_standardized(x, y, 1.0);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(h.label(x[i]), y[i]);
}

TEST(Ensemble, NeedsTwoPatientsPerClass) {
  Cohort c = two_clusters(4, 3);
  c.summaries.resize(3);
  c.categories.resize(3);  // two healthy, one impaired
  EXPECT_THROW(quantile_ensemble(c.summaries, c.categories), TrainingError);
  const std::vector<Category> healthy(c.summaries.size(), Category::H);
  EXPECT_THROW(quantile_ensemble(c.summaries, healthy), TrainingError);
}

TEST(Predict, TransitionWhenQuantilesStraddle) {
  const Cohort c = two_clusters(5, 10);
  const ClassifierModel m = quantile_ensemble(c.summaries, c.categories);
  // Low quantiles look impaired, high quantiles healthy.
  const PosteriorSummary s = spread_summary({2.0, 1.0}, {12.0, 8.0});
  const Prediction p = predict(m, s);
  EXPECT_TRUE(p.transition);
  EXPECT_GT(p.impaired_votes, 0);
  EXPECT_LT(p.impaired_votes, 9);
  EXPECT_GT(p.margins.front(), 0.0);
  EXPECT_LT(p.margins.back(), 0.0);
  EXPECT_EQ(p.label, p.impaired_votes >= 5 ? 1 : -1);
}

TEST(Predict, MajorityAndTies) {
  ClassifierModel m;
  // Vertical lines x = k/100: quantile k's plane.
  for (std::size_t k = 0; k < 9; ++k) m.planes[k] = {{1.0, 0.0}, -double(k + 1) / 100.0};
  // Score 1/theta1 = 0.05 sits exactly on plane 5 (q50): margin 0 counts as impaired.
  const PosteriorSummary s = flat_summary(20.0, 5.0);
  const Prediction p = predict(m, s);
  EXPECT_EQ(p.margins[4], 0.0);
  EXPECT_EQ(p.impaired_votes, 5);
  EXPECT_EQ(p.label, 1);
  EXPECT_TRUE(p.transition);
  const Prediction q = predict(m, flat_summary(1.0 / 0.045, 5.0));
  EXPECT_EQ(q.impaired_votes, 4);
  EXPECT_EQ(q.label, -1);
}
