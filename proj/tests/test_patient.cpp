#include <gtest/gtest.h>

#include <random>

#include "ogtt/patient.hpp"

using namespace ogtt;

namespace {

GlucoseSeries series(double fasting, double two_hour) { return {fasting, 150.0, 150.0, 150.0, two_hour}; }

bool has_ifg(Category c) { return c == Category::IFG || c == Category::IFG_IGT || c == Category::T2D; }

}  // namespace

TEST(Categorize, ReferenceExamples) {
  EXPECT_EQ(categorize({105, 140, 130, 120, 110}), Category::IFG);
  EXPECT_EQ(categorize({95, 160, 170, 150, 150}), Category::IGT);
  EXPECT_EQ(categorize({130, 250, 260, 230, 210}), Category::T2D);
  EXPECT_EQ(categorize({85, 130, 120, 100, 95}), Category::H);
  EXPECT_EQ(categorize({105, 150, 140, 130, 145}), Category::IFG_IGT);
}

TEST(Categorize, BoundaryTable) {
  struct Case {
    double fasting, two_hour;
    Category expected;
  };
  const Case cases[] = {
      {99, 139, Category::H},         {99, 140, Category::IGT},       {99, 200, Category::IGT},
      {100, 139, Category::IFG},      {100, 140, Category::IFG_IGT},  {100, 200, Category::IFG_IGT},
      {126, 139, Category::IFG},      {126, 140, Category::IFG_IGT},  {126, 200, Category::T2D},
      {125.99, 200, Category::IFG_IGT}, {126, 199.99, Category::IFG_IGT}, {99.99, 139.99, Category::H},
      {60, 60, Category::H},          {300, 400, Category::T2D},      {126, 100, Category::IFG},
  };
  for (const auto& c : cases)
    EXPECT_EQ(categorize(series(c.fasting, c.two_hour)), c.expected) << c.fasting << ", " << c.two_hour;
}

TEST(Categorize, OnlyFastingAndTwoHourMatter) {
  EXPECT_EQ(categorize({90, 300, 300, 300, 120}), Category::H);
  EXPECT_EQ(categorize({90, 40, 40, 40, 120}), Category::H);
}

TEST(Categorize, RaisingFastingKeepsImpairedFasting) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> g(40.0, 300.0), up(0.0, 100.0);
  for (int k = 0; k < 5000; ++k) {
    GlucoseSeries s{g(rng), g(rng), g(rng), g(rng), g(rng)};
    const Category before = categorize(s);
    s[0] += up(rng);
    if (has_ifg(before)) EXPECT_TRUE(has_ifg(categorize(s)));
  }
}

TEST(Categorize, ImpairedClasses) {
  EXPECT_FALSE(is_impaired(Category::H));
  EXPECT_FALSE(is_impaired(Category::IFG));
  EXPECT_TRUE(is_impaired(Category::IGT));
  EXPECT_TRUE(is_impaired(Category::IFG_IGT));
  EXPECT_TRUE(is_impaired(Category::T2D));
}

TEST(Categorize, NamesRoundTrip) {
  for (Category c : {Category::H, Category::IFG, Category::IGT, Category::IFG_IGT, Category::T2D})
    EXPECT_EQ(category_from_string(to_string(c)), c);
  EXPECT_EQ(to_string(Category::IFG_IGT), "IFG-IGT");
  EXPECT_FALSE(category_from_string("diabetic").has_value());
}

TEST(PatientRecord, RangeIsExclusive) {
  EXPECT_NO_THROW(PatientRecord::make("a", {20.01, 100, 100, 100, 599.99}));
  EXPECT_THROW(PatientRecord::make("a", {20, 100, 100, 100, 100}), InvalidArgument);
  EXPECT_THROW(PatientRecord::make("a", {90, 100, 600, 100, 100}), InvalidArgument);
  EXPECT_THROW(PatientRecord::make("a", {90, 100, std::nan(""), 100, 100}), InvalidArgument);
  const auto r = PatientRecord::make("P02", {105, 150, 140, 130, 118});
  EXPECT_EQ(r.category, Category::IFG);
  EXPECT_EQ(r.id, "P02");
}
