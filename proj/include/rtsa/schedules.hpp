// Gain sequences and expanding compact families.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rtsa/vec.hpp"

namespace rtsa {

/// Step sizes gamma_n, n >= 1.
///
/// The built-in family is gamma_n = a / (b + n)^alpha with alpha in (1/2, 1],
/// which makes the series of gains divergent and the series of squared gains
/// convergent. Construction outside that range is only possible through
/// `unchecked_power_law`, which exists for exercising the classifier.
/// `custom` wraps an explicit finite list and is exempt from validation.
class GainSchedule {
 public:
  enum class Kind { PowerLaw, Custom };

  static GainSchedule power_law(double a, double b, double alpha);
  static GainSchedule unchecked_power_law(double a, double b, double alpha);
  static GainSchedule custom(std::vector<double> gains);

  Kind kind() const { return kind_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double alpha() const { return alpha_; }
  const std::vector<double>& custom_gains() const { return custom_; }

  /// gamma_n for n >= 1. Throws std::out_of_range for n == 0 or past the end
  /// of a custom list.
  double gain(std::uint64_t n) const;

  /// Sum of gamma_n for n in [first, last].
  double partial_sum(std::uint64_t first, std::uint64_t last) const;
  /// Sum of gamma_n^2 for n in [first, last].
  double partial_sum_squares(std::uint64_t first, std::uint64_t last) const;

  /// Upper bound on sum_{n > from_n} gamma_n^2.
  ///
  /// Power law: integral comparison, a^2 (b + from_n)^(1 - 2 alpha) / (2 alpha - 1).
  /// Custom: the exact remaining sum of the list.
  double square_tail_bound(std::uint64_t from_n) const;

  std::string describe() const;

 private:
  GainSchedule() = default;

  Kind kind_ = Kind::PowerLaw;
  double a_ = 1.0;
  double b_ = 0.0;
  double alpha_ = 1.0;
  std::vector<double> custom_;
};

struct H2Report {
  bool applicable = true;  // false for custom lists
  bool divergent_sum = false;
  bool square_summable = false;
  bool holds() const { return applicable && divergent_sum && square_summable; }
};

/// p-series classification of the power-law exponent.
H2Report check_h2(const GainSchedule& schedule);

enum class Growth { Geometric, Arithmetic };

std::string_view to_string(Growth g);

/// Closed Euclidean balls K_j = B(center, radius_j) with strictly
/// increasing radii that tend to infinity.
class CompactFamily {
 public:
  /// `factor` is the ratio rho > 1 for Geometric, the increment > 0 for
  /// Arithmetic. Throws std::invalid_argument otherwise.
  CompactFamily(Point center, double r0, Growth growth, double factor);

  const Point& center() const { return center_; }
  double r0() const { return r0_; }
  Growth growth() const { return growth_; }
  double factor() const { return factor_; }
  std::size_t dim() const { return center_.size(); }

  double radius(std::uint64_t j) const;

  /// ||x - center|| <= radius_j (boundary included).
  bool contains(std::uint64_t j, ConstVec x) const;

  /// Smallest j with x in K_j. Throws std::invalid_argument for non-finite x.
  std::uint64_t index_containing(ConstVec x) const;

  /// Radial projection of x onto K_0 (identity inside K_0).
  Point project_to_first(ConstVec x) const;

 private:
  Point center_;
  double r0_;
  Growth growth_;
  double factor_;
};

}  // namespace rtsa
