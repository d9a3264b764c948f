#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <random>

#include "ogtt/stability.hpp"

using namespace ogtt;

namespace {

constexpr double kLambda = 60.0 / 31.0;

// Discriminant of a t^3 + b t^2 + c t + d from the general formula.
double general_discriminant(double a, double b, double c, double d) {
  return 18 * a * b * c * d - 4 * b * b * b * d + b * b * c * c - 4 * a * c * c * c - 27 * a * a * d * d;
}

std::vector<std::complex<double>> companion_roots(double theta1, double lambda) {
  Eigen::Matrix3d m;
  m << -4 * lambda, -4 * lambda * lambda, -2 * lambda * theta1, 1, 0, 0, 0, 1, 0;
  Eigen::EigenSolver<Eigen::Matrix3d> es(m);
  std::vector<std::complex<double>> out(es.eigenvalues().begin(), es.eigenvalues().end());
  return out;
}

bool contains(const std::vector<std::complex<double>>& set, std::complex<double> z, double tol) {
  return std::any_of(set.begin(), set.end(), [&](auto w) { return std::abs(w - z) <= tol; });
}

// Jacobian of the seven-state system on the branch G > Gb (insulin active).
Eigen::Matrix<double, 7, 7> jacobian_above(double th0, double th1, double th3, double l5, double l7) {
  Eigen::Matrix<double, 7, 7> j = Eigen::Matrix<double, 7, 7>::Zero();
  // order G, I1, I2, L1, L2, V1, V2
  j(0, 2) = -1;
  j(0, 4) = 1;
  j(0, 6) = th0;
  j(1, 0) = th1;
  j(1, 1) = -2 * l5;
  j(1, 6) = th3;
  j(2, 1) = 2 * l5;
  j(2, 2) = -2 * l5;
  j(3, 3) = -2 * l7;
  j(4, 3) = 2 * l7;
  j(4, 4) = -2 * l7;
  j(5, 5) = -2 * th0;
  j(6, 5) = 2 * th0;
  j(6, 6) = -2 * th0;
  return j;
}

}  // namespace

TEST(Stability, DiscriminantAgreesWithGeneralFormula) {
  for (double th : {0.1, 1.0, 2.2, 5.0, 29.0}) {
    const auto [a, b, c, d] = characteristic_coefficients(th, kLambda);
    const double g = general_discriminant(a, b, c, d);
    EXPECT_NEAR(cubic_discriminant(th, kLambda), g, 1e-10 * std::max(1.0, std::abs(g)));
  }
}

TEST(Stability, DiscriminantAtThetaOneByDirectSubstitution) {
  // -4 l^2 (-16 l^2 + 27) with l = 60/31.
  const double l2 = kLambda * kLambda;
  const double expected = -4.0 * l2 * (-16.0 * l2 + 27.0);
  EXPECT_NEAR(cubic_discriminant(1.0, kLambda), expected, 1e-12);
  EXPECT_NEAR(cubic_discriminant(1.0, kLambda), 493.549, 1e-3);
  EXPECT_GT(cubic_discriminant(1.0, kLambda), 0.0);
}

TEST(Stability, DiscriminantVanishesAtThreshold) {
  const double thr = discriminant_threshold(kLambda);
  EXPECT_NEAR(thr, 16.0 / 27.0 * kLambda * kLambda, 1e-15);
  const double scale = 64.0 * std::pow(kLambda, 4) * thr;
  EXPECT_LE(std::abs(cubic_discriminant(thr, kLambda)), 1e-14 * scale);
  EXPECT_EQ(cubic_discriminant(0.0, kLambda), 0.0);
}

TEST(Stability, DiscriminantSignSweep) {
  const double thr = discriminant_threshold(kLambda);
  for (int k = 1; k <= 100; ++k) {
    const double th = 2.0 * thr * (k - 0.5) / 100.0;
    const double d = cubic_discriminant(th, kLambda);
    if (th < thr) EXPECT_GT(d, 0.0) << th;
    else EXPECT_LT(d, 0.0) << th;
  }
}

TEST(Stability, RealRootsFallInTheirBrackets) {
  std::mt19937_64 rng(7);
  const double thr = discriminant_threshold(kLambda);
  std::uniform_real_distribution<double> u(1e-6, thr * (1 - 1e-9));
  const double l = kLambda;
  for (int k = 0; k < 50; ++k) {
    const double th = u(rng);
    const CubicRoots r = characteristic_roots(th, l);
    ASSERT_TRUE(r.all_real());
    std::vector<double> re;
    for (const auto& z : r.roots) {
      EXPECT_EQ(z.imag(), 0.0);
      re.push_back(z.real());
      EXPECT_LE(std::abs(characteristic_polynomial(z, th, l)), 1e-9);
    }
    std::sort(re.begin(), re.end());
    EXPECT_GT(re[0], -4 * l);
    EXPECT_LT(re[0], -2 * l);
    EXPECT_GT(re[1], -2 * l);
    EXPECT_LT(re[1], -2 * l / 3);
    EXPECT_GT(re[2], -2 * l / 3);
    EXPECT_LT(re[2], 0.0);
  }
}

TEST(Stability, RootsMatchCompanionEigenvalues) {
  for (double th : {1e-4, 0.3, 1.0, 2.2, 2.3, 5.0, 10.0, 29.0, 31.0, 100.0}) {
    const auto ref = companion_roots(th, kLambda);
    const CubicRoots r = characteristic_roots(th, kLambda);
    for (const auto& z : r.roots) EXPECT_TRUE(contains(ref, z, 1e-7 * (1 + std::abs(z)))) << th << " " << z;
    std::complex<double> sum = 0, prod = 1;
    for (const auto& z : r.roots) {
      sum += z;
      prod *= z;
    }
    EXPECT_NEAR(sum.real(), -4 * kLambda, 1e-10);
    EXPECT_NEAR(prod.real(), -2 * kLambda * th, 1e-9 * std::max(1.0, th));
  }
}

TEST(Stability, ComplexBranchGivesConjugatePair) {
  const CubicRoots r = characteristic_roots(10.0, kLambda);
  EXPECT_FALSE(r.all_real());
  EXPECT_EQ(r.roots[0].imag(), 0.0);
  EXPECT_EQ(r.roots[1], std::conj(r.roots[2]));
  EXPECT_NE(r.roots[1].imag(), 0.0);
}

TEST(Stability, SmallRootKeepsRelativePrecision) {
  // For small theta1 the root nearest zero is about -theta1 / (2 lambda).
  for (double th : {1e-6, 1e-10}) {
    const CubicRoots r = characteristic_roots(th, kLambda);
    double nearest = -1e300;
    for (const auto& z : r.roots) nearest = std::max(nearest, z.real());
    const double approx = -th / (2.0 * kLambda);
    EXPECT_NEAR(nearest / approx, 1.0, 1e-5);
  }
}

TEST(Stability, CardanoTerms) {
  const CardanoTerms t = cardano_terms(1.0, kLambda);
  const double l2 = kLambda * kLambda;
  EXPECT_NEAR(t.delta0, 4 * l2, 1e-12);
  EXPECT_NEAR(t.delta1, 2 * kLambda * (-8 * l2 + 27.0), 1e-12);
  EXPECT_NEAR(t.radicand, t.delta1 * t.delta1 - 4 * std::pow(t.delta0, 3), 1e-9 * std::abs(t.radicand) + 1e-9);
}

TEST(Stability, AttractivityBoundary) {
  const double bound = attractivity_bound(kLambda);
  EXPECT_NEAR(bound, 29.97, 0.01);
  EXPECT_LT(max_real_part(characteristic_roots(bound * 0.999, kLambda)), 0.0);
  EXPECT_GT(max_real_part(characteristic_roots(bound * 1.001, kLambda)), 0.0);
  EXPECT_NEAR(max_real_part(characteristic_roots(bound, kLambda)), 0.0, 1e-9);
  EXPECT_TRUE(is_locally_attractive(29.0, 10.0, kLambda, kLambda));
  EXPECT_FALSE(is_locally_attractive(10.0, 31.0, kLambda, kLambda));
}

TEST(Stability, SevenStateJacobianSpectrum) {
  // Above basal glucose the spectrum is the cubic's roots plus the decoupled
  // glucagon (-2 l7, twice) and GI (-2 th0, twice) eigenvalues.
  for (double th1 : {0.5, 2.0, 10.0, 40.0}) {
    const double th0 = 0.9, l7 = 1.7;
    Eigen::EigenSolver<Eigen::Matrix<double, 7, 7>> es(jacobian_above(th0, th1, 3.0, kLambda, l7));
    std::vector<std::complex<double>> eig(es.eigenvalues().begin(), es.eigenvalues().end());
    for (const auto& z : characteristic_roots(th1, kLambda).roots) EXPECT_TRUE(contains(eig, z, 1e-6)) << th1;
    EXPECT_TRUE(contains(eig, {-2 * l7, 0}, 1e-6));
    EXPECT_TRUE(contains(eig, {-2 * th0, 0}, 1e-6));
    double max_re = -1e300;
    for (const auto& z : eig) max_re = std::max(max_re, z.real());
    EXPECT_EQ(max_re < 0.0, th1 < attractivity_bound(kLambda));
  }
}
