#include "rtsa/schedules.hpp"

#include <cmath>
#include <limits>
#include <fmt/format.h>
#include <stdexcept>

namespace rtsa {

GainSchedule GainSchedule::power_law(double a, double b, double alpha) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw std::invalid_argument("gain.a must be positive");
  if (!(b >= 0.0) || !std::isfinite(b))
    throw std::invalid_argument("gain.b must be nonnegative");
  if (!(alpha > 0.5 && alpha <= 1.0))
    throw std::invalid_argument("gain.alpha must be in (0.5, 1]");
  return unchecked_power_law(a, b, alpha);
}

GainSchedule GainSchedule::unchecked_power_law(double a, double b, double alpha) {
  GainSchedule s;
  s.kind_ = Kind::PowerLaw;
  s.a_ = a;
  s.b_ = b;
  s.alpha_ = alpha;
  return s;
}

GainSchedule GainSchedule::custom(std::vector<double> gains) {
  GainSchedule s;
  s.kind_ = Kind::Custom;
  s.custom_ = std::move(gains);
  return s;
}

double GainSchedule::gain(std::uint64_t n) const {
  if (n == 0) throw std::out_of_range("gain index starts at 1");
  if (kind_ == Kind::Custom) {
    if (n > custom_.size()) throw std::out_of_range("custom gain list exhausted");
    return custom_[n - 1];
  }
  const double base = b_ + static_cast<double>(n);
  if (alpha_ == 1.0) return a_ / base;
  return a_ / std::pow(base, alpha_);
}

double GainSchedule::partial_sum(std::uint64_t first, std::uint64_t last) const {
  double s = 0.0;
  for (std::uint64_t n = first; n <= last; ++n) s += gain(n);
  return s;
}

double GainSchedule::partial_sum_squares(std::uint64_t first, std::uint64_t last) const {
  double s = 0.0;
  for (std::uint64_t n = first; n <= last; ++n) {
    const double g = gain(n);
    s += g * g;
  }
  return s;
}

double GainSchedule::square_tail_bound(std::uint64_t from_n) const {
  if (kind_ == Kind::Custom) {
    if (from_n >= custom_.size()) return 0.0;
    return partial_sum_squares(from_n + 1, custom_.size());
  }
  if (alpha_ <= 0.5) return std::numeric_limits<double>::infinity();
  const double base = b_ + static_cast<double>(from_n);
  return a_ * a_ * std::pow(base, 1.0 - 2.0 * alpha_) / (2.0 * alpha_ - 1.0);
}

std::string GainSchedule::describe() const {
  if (kind_ == Kind::Custom) return fmt::format("custom[{} gains]", custom_.size());
  return fmt::format("{}/({}+n)^{}", a_, b_, alpha_);
}

H2Report check_h2(const GainSchedule& schedule) {
  if (schedule.kind() == GainSchedule::Kind::Custom) return {false, false, false};
  const double alpha = schedule.alpha();
  return {true, alpha <= 1.0, alpha > 0.5};
}

std::string_view to_string(Growth g) {
  return g == Growth::Geometric ? "geometric" : "arithmetic";
}

CompactFamily::CompactFamily(Point center, double r0, Growth growth, double factor)
    : center_(std::move(center)), r0_(r0), growth_(growth), factor_(factor) {
  if (center_.empty()) throw std::invalid_argument("compacts.center must have dimension >= 1");
  if (!all_finite(center_)) throw std::invalid_argument("compacts.center must be finite");
  if (!(r0_ > 0.0) || !std::isfinite(r0_))
    throw std::invalid_argument("compacts.r0 must be positive");
  if (growth_ == Growth::Geometric && !(factor_ > 1.0))
    throw std::invalid_argument("compacts.rho_or_step must be > 1 for geometric growth");
  if (growth_ == Growth::Arithmetic && !(factor_ > 0.0))
    throw std::invalid_argument("compacts.rho_or_step must be > 0 for arithmetic growth");
  if (!std::isfinite(factor_)) throw std::invalid_argument("compacts.rho_or_step must be finite");
}

double CompactFamily::radius(std::uint64_t j) const {
  const double jj = static_cast<double>(j);
  if (growth_ == Growth::Geometric) return r0_ * std::pow(factor_, jj);
  return r0_ + jj * factor_;
}

bool CompactFamily::contains(std::uint64_t j, ConstVec x) const {
  return distance(x, center_) <= radius(j);
}

std::uint64_t CompactFamily::index_containing(ConstVec x) const {
  const double d = distance(x, center_);
  if (!std::isfinite(d)) throw std::invalid_argument("point is not finite");
  if (d <= r0_) return 0;
  double guess = growth_ == Growth::Geometric ? std::log(d / r0_) / std::log(factor_)
                                              : (d - r0_) / factor_;
  auto j = static_cast<std::uint64_t>(std::max(0.0, std::ceil(guess)));
  // The closed form can be off by one in floating point; settle it exactly.
  while (j > 0 && radius(j - 1) >= d) --j;
  while (radius(j) < d) ++j;
  return j;
}

Point CompactFamily::project_to_first(ConstVec x) const {
  Point out(x.begin(), x.end());
  const double d = distance(x, center_);
  if (d <= r0_) return out;
  double scale = r0_ / d;
  for (;;) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = center_[i] + (x[i] - center_[i]) * scale;
    if (distance(out, center_) <= r0_) return out;
    scale = std::nextafter(scale, 0.0);
  }
}

}  // namespace rtsa
