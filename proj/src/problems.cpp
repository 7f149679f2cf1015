#include "rtsa/problems.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>
#include <numbers>
#include <stdexcept>

namespace rtsa {

std::string_view to_string(NoiseModel::Kind k) {
  return k == NoiseModel::Kind::AdditiveGaussian ? "additive" : "state_scaled";
}

StochasticProblem::StochasticProblem(std::string name, Point root, MeanField field,
                                     NoiseModel noise, DriftBound drift_bound)
    : name_(std::move(name)),
      root_(std::move(root)),
      mean_field_(std::move(field)),
      noise_(noise),
      drift_bound_(std::move(drift_bound)) {
  if (root_.empty()) throw std::invalid_argument("problem.dim must be >= 1");
  if (!all_finite(root_)) throw std::invalid_argument("problem.x_star must be finite");
  if (!(noise_.sigma >= 0.0) || !std::isfinite(noise_.sigma))
    throw std::invalid_argument("noise.sigma must be finite and >= 0");
  if (!mean_field_) throw std::invalid_argument("problem needs a mean field");
  const Point at_root = mean_field(root_);
  if (norm(at_root) > 1e-12)
    throw std::invalid_argument(
        fmt::format("mean field of '{}' does not vanish at its root (|u(x*)| = {})", name_,
                    norm(at_root)));
}

Point StochasticProblem::mean_field(ConstVec x) const {
  Point out(x.size());
  mean_field_(x, out);
  return out;
}

std::optional<double> StochasticProblem::second_moment_bound(double r) const {
  if (!drift_bound_) return std::nullopt;
  const double d = static_cast<double>(dim());
  double noise_term = noise_.sigma * noise_.sigma * d;
  if (noise_.kind == NoiseModel::Kind::StateScaledGaussian) {
    const double far = norm(root_) + r;
    const double s = 1.0 + far * far;
    noise_term *= s * s;
  }
  return drift_bound_(r) + noise_term;
}

StochasticProblem make_linear(std::size_t dim, std::vector<double> matrix, Point x_star,
                              NoiseModel noise) {
  if (matrix.size() != dim * dim)
    throw std::invalid_argument(
        fmt::format("linear problem needs a {}x{} matrix, got {} entries", dim, dim, matrix.size()));
  if (x_star.size() != dim) throw std::invalid_argument("problem.x_star has the wrong dimension");
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd a = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                     Eigen::RowMajor>>(matrix.data(), n, n);
  if (!a.isApprox(a.transpose(), 1e-12))
    throw std::invalid_argument("linear problem matrix must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("linear problem matrix must be positive definite");
  const double lambda_max = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues().maxCoeff();

  auto u = [a, root = x_star](ConstVec x, MutVec out) {
    const auto n = static_cast<Eigen::Index>(x.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) s += a(i, j) * (x[j] - root[j]);
      out[i] = s;
    }
  };
  auto bound = [lambda_max](double r) { return lambda_max * lambda_max * r * r; };
  return {"linear", std::move(x_star), u, noise, bound};
}

StochasticProblem make_cubic(std::size_t dim, Point x_star, NoiseModel noise) {
  if (x_star.size() != dim) throw std::invalid_argument("problem.x_star has the wrong dimension");
  auto u = [root = x_star](ConstVec x, MutVec out) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = x[i] - root[i];
      r2 += e * e;
    }
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = r2 * (x[i] - root[i]);
  };
  auto bound = [](double r) { return r * r * r * r * r * r; };
  return {"cubic", std::move(x_star), u, noise, bound};
}

StochasticProblem make_convex_potential(std::size_t dim, NoiseModel noise) {
  auto u = [](ConstVec x, MutVec out) {
    const double s = norm2(x) + 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = s * x[i];
  };
  auto bound = [](double r) {
    const double v = (r * r + 1.0) * r;
    return v * v;
  };
  return {"convex_potential", Point(dim, 0.0), u, noise, bound};
}

StochasticProblem make_repulsive(std::size_t dim, Point x_star, NoiseModel noise) {
  if (x_star.size() != dim) throw std::invalid_argument("problem.x_star has the wrong dimension");
  auto u = [root = x_star](ConstVec x, MutVec out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = root[i] - x[i];
  };
  auto bound = [](double r) { return r * r; };
  return {"repulsive", std::move(x_star), u, noise, bound};
}

namespace {

std::vector<Point> sphere_directions(std::size_t dim, std::size_t per_radius, std::uint64_t seed) {
  std::vector<Point> dirs;
  if (dim == 1) return {Point{1.0}, Point{-1.0}};
  if (dim == 2) {
    const std::size_t k = std::max<std::size_t>(per_radius, 4);
    for (std::size_t i = 0; i < k; ++i) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(k);
      dirs.push_back({std::cos(t), std::sin(t)});
    }
    return dirs;
  }
  for (std::size_t axis = 0; axis < dim; ++axis) {
    dirs.push_back(unit_vector(dim, axis, 1.0));
    dirs.push_back(unit_vector(dim, axis, -1.0));
  }
  NormalStream stream(seed);
  Point g(dim);
  for (std::size_t i = 0; i < per_radius; ++i) {
    stream.fill_standard_normals(g);
    const double n = norm(g);
    if (n == 0.0) continue;
    for (double& v : g) v /= n;
    dirs.push_back(g);
  }
  return dirs;
}

}  // namespace

H1Report check_h1(const StochasticProblem& problem, const H1SamplerSpec& spec) {
  H1Report report;
  report.min_inner_product = std::numeric_limits<double>::infinity();
  const std::size_t d = problem.dim();
  const Point& root = problem.root();
  const auto dirs = sphere_directions(d, spec.points_per_radius, spec.seed);
  Point x(d), offset(d), u(d);
  for (double r : spec.radii) {
    if (!(r > 0.0)) continue;
    for (const Point& dir : dirs) {
      for (std::size_t i = 0; i < d; ++i) {
        x[i] = root[i] + r * dir[i];
        offset[i] = x[i] - root[i];
      }
      problem.mean_field(x, u);
      const double ip = dot(u, offset);
      ++report.points_checked;
      if (ip < report.min_inner_product) {
        report.min_inner_product = ip;
        report.argmin = x;
      }
      if (!(ip > 0.0)) report.violations.push_back({x, ip});
    }
  }
  return report;
}

MomentEstimate estimate_second_moment(const StochasticProblem& problem, ConstVec x,
                                      std::size_t n_samples, NormalStream& stream) {
  const std::size_t d = problem.dim();
  Point g(d), out(d);
  // Welford keeps the variance estimate stable when E|U|^2 is large.
  double mean = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    problem.sample_oracle(x, stream, g, out);
    const double v = norm2(out);
    const double delta = v - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (v - mean);
  }
  const double var = n_samples > 1 ? m2 / static_cast<double>(n_samples - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(n_samples))};
}

H3Report check_h3(const StochasticProblem& problem, double radius, std::size_t n_samples,
                  NormalStream& stream) {
  if (n_samples < 1000) throw std::invalid_argument("check_h3 needs at least 1000 samples per point");
  if (!(radius > 0.0)) throw std::invalid_argument("check_h3 radius must be positive");
  const std::size_t d = problem.dim();
  const Point& root = problem.root();
  std::vector<Point> points{root};
  for (double frac : {0.5, 1.0})
    for (std::size_t axis = 0; axis < d; ++axis)
      for (double sign : {1.0, -1.0}) {
        Point x = root;
        x[axis] += sign * frac * radius;
        points.push_back(std::move(x));
      }

  H3Report report;
  report.radius = radius;
  report.analytic_bound = problem.second_moment_bound(radius);
  report.max_second_moment = -1.0;
  for (const Point& x : points) {
    const MomentEstimate est = estimate_second_moment(problem, x, n_samples, stream);
    ++report.points_checked;
    if (!std::isfinite(est.mean)) {
      report.max_second_moment = est.mean;
      report.argmax = x;
      break;
    }
    if (est.mean > report.max_second_moment) {
      report.max_second_moment = est.mean;
      report.standard_error = est.standard_error;
      report.argmax = x;
    }
  }
  return report;
}

}  // namespace rtsa
