#ifndef OGTT_STABILITY_HPP
#define OGTT_STABILITY_HPP

// Local attractivity of the switched linear system around (Gb, 0, ..., 0).
//
// On either side of the switch the glucose/hormone loop reduces to the cubic
//   t^3 + 4 l t^2 + 4 l^2 t + 2 l k = 0
// with (l, k) = (lambda5, theta1) above basal and (lambda7, theta2) below.
// Roots are computed with Cardano's formulas written in terms of
// Delta0 = b^2 - 3ac, Delta1 = 2b^3 - 9abc + 27a^2 d and the cube root C.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace ogtt {

struct CubicRoots {
  std::array<std::complex<double>, 3> roots;  ///< ordered by Cardano index k = 0, 1, 2
  double discriminant = 0.0;

  bool all_real() const { return discriminant >= 0.0; }
};

/// Intermediate Cardano quantities for the characteristic cubic.
struct CardanoTerms {
  double delta0 = 0.0;
  double delta1 = 0.0;
  /// Delta1^2 - 4 Delta0^3, in factored form to avoid cancellation near the double root.
  double radicand = 0.0;
  std::complex<double> C;
};

/// Coefficients (a, b, c, d) of the characteristic cubic.
inline std::array<double, 4> characteristic_coefficients(double theta1, double lambda5) {
  return {1.0, 4.0 * lambda5, 4.0 * lambda5 * lambda5, 2.0 * lambda5 * theta1};
}

inline std::complex<double> characteristic_polynomial(std::complex<double> t, double theta1, double lambda5) {
  const auto [a, b, c, d] = characteristic_coefficients(theta1, lambda5);
  return ((a * t + b) * t + c) * t + d;
}

/// Delta = -(4p^3 + 27q^2) of the depressed cubic.
inline double cubic_discriminant(double theta1, double lambda5) {
  const double l2 = lambda5 * lambda5;
  return -4.0 * l2 * theta1 * (-16.0 * l2 + 27.0 * theta1);
}

/// Value of theta1 where the discriminant changes sign.
inline double discriminant_threshold(double lambda5) { return 16.0 / 27.0 * lambda5 * lambda5; }

/// Routh-Hurwitz bound: complex roots cross the imaginary axis at theta1 = 8 lambda5^2.
inline double attractivity_bound(double lambda5) { return 8.0 * lambda5 * lambda5; }

inline CardanoTerms cardano_terms(double theta1, double lambda5) {
  const double l2 = lambda5 * lambda5;
  CardanoTerms t;
  t.delta0 = 4.0 * l2;
  t.delta1 = 2.0 * lambda5 * (-8.0 * l2 + 27.0 * theta1);
  t.radicand = 4.0 * l2 * 27.0 * theta1 * (-16.0 * l2 + 27.0 * theta1);
  const std::complex<double> sq =
      t.radicand >= 0.0 ? std::complex<double>(std::sqrt(t.radicand), 0.0)
                        : std::complex<double>(0.0, std::sqrt(-t.radicand));
  const std::complex<double> inner = 0.5 * (t.delta1 + sq);
  if (t.radicand >= 0.0) {
    t.C = std::cbrt(inner.real());  // real principal cube root
  } else {
    t.C = std::polar(std::cbrt(std::abs(inner)), std::arg(inner) / 3.0);
  }
  return t;
}

/// Roots of the characteristic cubic.
///
/// With Delta >= 0, |C|^2 = Delta0 so Delta0 / (xi^k C) is the conjugate of
/// xi^k C and every root is real: x_k = -(b + 2 Re(xi^k C)) / 3. With Delta < 0,
/// C is real and x_1, x_2 are returned as exact conjugates.
inline CubicRoots characteristic_roots(double theta1, double lambda5) {
  const auto [a, b, c, d] = characteristic_coefficients(theta1, lambda5);
  (void)c;
  const CardanoTerms terms = cardano_terms(theta1, lambda5);
  CubicRoots out;
  out.discriminant = cubic_discriminant(theta1, lambda5);
  const double third = 1.0 / (3.0 * a);
  if (terms.radicand <= 0.0) {
    const double mod = std::abs(terms.C);
    const double phase = std::arg(terms.C);
    for (int k = 0; k < 3; ++k) {
      const double re_xik_c = mod * std::cos(phase + 2.0 * std::numbers::pi * k / 3.0);
      out.roots[k] = {-third * (b + 2.0 * re_xik_c), 0.0};
    }
    // x_1 is the root nearest zero and loses all precision to cancellation as
    // theta1 -> 0; recover it from the product of roots, x0 x1 x2 = -d / a.
    const double others = out.roots[0].real() * out.roots[2].real();
    if (others != 0.0) out.roots[1] = {-d / (a * others), 0.0};
  } else {
    const double C = terms.C.real();
    const double ratio = terms.delta0 / C;
    out.roots[0] = {-third * (b + C + ratio), 0.0};
    const double re = -third * (b - 0.5 * C - 0.5 * ratio);
    const double im = -third * (0.5 * std::numbers::sqrt3 * (C - ratio));
    out.roots[1] = {re, im};
    out.roots[2] = {re, -im};
  }
  return out;
}

inline double max_real_part(const CubicRoots& r) {
  double m = r.roots[0].real();
  for (const auto& x : r.roots) m = std::max(m, x.real());
  return m;
}

/// True iff both the insulin branch (theta1, lambda5) and the glucagon branch
/// (theta2, lambda7) have all characteristic roots strictly in the left half plane.
inline bool is_locally_attractive(double theta1, double theta2, double lambda5, double lambda7) {
  return max_real_part(characteristic_roots(theta1, lambda5)) < 0.0 &&
         max_real_part(characteristic_roots(theta2, lambda7)) < 0.0;
}

}  // namespace ogtt

#endif  // OGTT_STABILITY_HPP
