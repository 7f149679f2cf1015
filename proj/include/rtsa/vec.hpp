// Small dense-vector helpers for points in R^d.
//
// Points are plain std::vector<double>; the dimensions used here are small
// (1..10) and the hot loops reuse buffers, so nothing fancier is needed.
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace rtsa {

using Point = std::vector<double>;
using ConstVec = std::span<const double>;
using MutVec = std::span<double>;

inline double dot(ConstVec a, ConstVec b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(ConstVec a) { return dot(a, a); }

inline double norm(ConstVec a) { return std::sqrt(norm2(a)); }

inline double distance(ConstVec a, ConstVec b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline bool all_finite(ConstVec a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

inline Point unit_vector(std::size_t dim, std::size_t axis, double scale = 1.0) {
  Point e(dim, 0.0);
  e[axis] = scale;
  return e;
}

}  // namespace rtsa
