#ifndef OGTT_PATIENT_HPP
#define OGTT_PATIENT_HPP

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "ogtt/error.hpp"

namespace ogtt {

/// Diagnostic category from fasting and two-hour glucose.
enum class Category { H, IFG, IGT, IFG_IGT, T2D };

inline constexpr double kIfgFasting = 100.0;
inline constexpr double kIgtTwoHour = 140.0;
inline constexpr double kT2dFasting = 126.0;
inline constexpr double kT2dTwoHour = 200.0;

/// Accepted glucose range for input records, mg/dl (exclusive).
inline constexpr double kMinGlucose = 20.0;
inline constexpr double kMaxGlucose = 600.0;

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::H: return "H";
    case Category::IFG: return "IFG";
    case Category::IGT: return "IGT";
    case Category::IFG_IGT: return "IFG-IGT";
    case Category::T2D: return "T2D";
  }
  return "?";
}

inline std::optional<Category> category_from_string(std::string_view s) {
  for (Category c : {Category::H, Category::IFG, Category::IGT, Category::IFG_IGT, Category::T2D})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

/// IFG counts as healthy for the insulin-score classifier; only the
/// post-load categories are impaired.
inline bool is_impaired(Category c) { return c == Category::IGT || c == Category::IFG_IGT || c == Category::T2D; }

/// Glucose at 0, 30, 60, 90 and 120 minutes.
using GlucoseSeries = std::array<double, 5>;

inline Category categorize(const GlucoseSeries& glucose) {
  const double fasting = glucose.front();
  const double two_hour = glucose.back();
  if (fasting >= kT2dFasting && two_hour >= kT2dTwoHour) return Category::T2D;
  const bool ifg = fasting >= kIfgFasting;
  const bool igt = two_hour >= kIgtTwoHour;
  if (ifg && igt) return Category::IFG_IGT;
  if (ifg) return Category::IFG;
  if (igt) return Category::IGT;
  return Category::H;
}

struct PatientRecord {
  std::string id;
  GlucoseSeries glucose{};
  Category category = Category::H;

  static PatientRecord make(std::string id, const GlucoseSeries& glucose) {
    for (double g : glucose) {
      if (!std::isfinite(g) || g <= kMinGlucose || g >= kMaxGlucose)
        throw InvalidArgument("glucose value out of range (20, 600) for patient " + id);
    }
    return {std::move(id), glucose, categorize(glucose)};
  }
};

}  // namespace ogtt

#endif  // OGTT_PATIENT_HPP
