// Stochastic oracles U(x, Z) with an exactly known mean field u and root x*.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rtsa/rng.hpp"
#include "rtsa/vec.hpp"

namespace rtsa {

/// Zero-mean Gaussian noise added to the mean field.
///
/// AdditiveGaussian:     U(x, g) = u(x) + sigma * g
/// StateScaledGaussian:  U(x, g) = u(x) + sigma * (1 + |x|^2) * g
///
/// g is a vector of d independent standard normals. sigma == 0 is accepted
/// and gives a noiseless oracle that still consumes its draws.
struct NoiseModel {
  enum class Kind { AdditiveGaussian, StateScaledGaussian };
  Kind kind = Kind::AdditiveGaussian;
  double sigma = 1.0;

  double scale_at(ConstVec x) const {
    return kind == Kind::AdditiveGaussian ? sigma : sigma * (1.0 + norm2(x));
  }
};

std::string_view to_string(NoiseModel::Kind k);

using MeanField = std::function<void(ConstVec x, MutVec out)>;

/// Upper bound on sup_{|x - x*| <= r} of the drift norm squared.
using DriftBound = std::function<double(double r)>;

class StochasticProblem {
 public:
  /// Throws std::invalid_argument if |u(root)| > 1e-12, the noise level is
  /// negative, or the dimensions disagree.
  StochasticProblem(std::string name, Point root, MeanField mean_field, NoiseModel noise,
                    DriftBound drift_bound = {});

  const std::string& name() const { return name_; }
  std::size_t dim() const { return root_.size(); }
  const Point& root() const { return root_; }
  const NoiseModel& noise() const { return noise_; }

  void mean_field(ConstVec x, MutVec out) const { mean_field_(x, out); }
  Point mean_field(ConstVec x) const;

  /// Normals consumed by one oracle call.
  std::size_t draws_per_sample() const { return dim(); }

  /// U(x, g) for an explicit normal vector g (size dim()).
  void evaluate_oracle(ConstVec x, ConstVec g, MutVec out) const {
    mean_field_(x, out);
    const double s = noise_.scale_at(x);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * g[i];
  }

  /// One fresh draw of U(x, Z). `scratch` must hold dim() doubles.
  template <NormalSource S>
  void sample_oracle(ConstVec x, S& source, MutVec scratch, MutVec out) const {
    source.fill_standard_normals(scratch);
    evaluate_oracle(x, scratch, out);
  }

  /// Upper bound on E|U(x, Z)|^2 over the ball B(root, r), when the problem
  /// knows its own growth.
  std::optional<double> second_moment_bound(double r) const;

 private:
  std::string name_;
  Point root_;
  MeanField mean_field_;
  NoiseModel noise_;
  DriftBound drift_bound_;
};

/// u(x) = A (x - x*) for symmetric positive-definite A (row-major, d x d).
/// Throws std::invalid_argument if A is not SPD.
StochasticProblem make_linear(std::size_t dim, std::vector<double> matrix, Point x_star,
                              NoiseModel noise);

/// u(x) = |x - x*|^2 (x - x*). Mean field grows cubically.
StochasticProblem make_cubic(std::size_t dim, Point x_star, NoiseModel noise);

/// u = grad V with V(x) = |x|^4 / 4 + |x|^2 / 2, i.e. u(x) = (|x|^2 + 1) x, root 0.
StochasticProblem make_convex_potential(std::size_t dim, NoiseModel noise);

/// u(x) = -(x - x*). Pushes away from the root; fails the monotonicity
/// hypothesis on purpose and exists as a negative fixture for the checkers.
StochasticProblem make_repulsive(std::size_t dim, Point x_star, NoiseModel noise);

// ---------------------------------------------------------------------------
// Hypothesis samplers. These falsify; a pass is evidence, not proof.

struct H1SamplerSpec {
  std::vector<double> radii{0.5, 1.0, 2.0};
  std::size_t points_per_radius = 64;
  std::uint64_t seed = 1;
};

struct H1Violation {
  Point x;
  double inner_product;
};

struct H1Report {
  double min_inner_product = 0.0;
  Point argmin;
  std::size_t points_checked = 0;
  std::vector<H1Violation> violations;
  bool passed() const { return violations.empty(); }
};

/// Evaluates (u(x) | x - x*) on spheres around x*. d = 1 uses the two points
/// +-r; d = 2 uses equally spaced angles starting at e1; d >= 3 uses the
/// coordinate axes plus seeded random directions.
H1Report check_h1(const StochasticProblem& problem, const H1SamplerSpec& spec);

struct MomentEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Monte Carlo estimate of E|U(x, Z)|^2.
MomentEstimate estimate_second_moment(const StochasticProblem& problem, ConstVec x,
                                      std::size_t n_samples, NormalStream& stream);

struct H3Report {
  double radius = 0.0;
  double max_second_moment = 0.0;
  double standard_error = 0.0;
  Point argmax;
  std::size_t points_checked = 0;
  std::optional<double> analytic_bound;
  bool passed() const { return std::isfinite(max_second_moment); }
};

/// Second-moment estimates at x*, at +-r/2 and +-r along every axis.
/// Requires n_samples >= 1000.
H3Report check_h3(const StochasticProblem& problem, double radius, std::size_t n_samples,
                  NormalStream& stream);

}  // namespace rtsa
