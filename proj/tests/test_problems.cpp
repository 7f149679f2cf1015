#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rtsa/problems.hpp"
#include "rtsa/step.hpp"

using namespace rtsa;

namespace {

NoiseModel additive(double s) { return {NoiseModel::Kind::AdditiveGaussian, s}; }
NoiseModel scaled(double s) { return {NoiseModel::Kind::StateScaledGaussian, s}; }

std::vector<StochasticProblem> builtins(NoiseModel noise) {
  return {make_linear(1, {1.0}, {0.0}, noise),
          make_linear(2, {2.0, 0.5, 0.5, 1.0}, {1.0, -1.0}, noise),
          make_cubic(1, {0.0}, noise),
          make_cubic(3, {0.5, 0.0, -0.5}, noise),
          make_convex_potential(1, noise),
          make_convex_potential(2, noise)};
}

}  // namespace

TEST_CASE("linear mean field") {
  const auto p1 = make_linear(1, {1.0}, {0.0}, additive(1));
  CHECK(p1.mean_field(Point{0.5}) == Point{0.5});
  const auto p2 = make_linear(2, {1, 0, 0, 1}, {1.0, 1.0}, additive(1));
  CHECK(p2.mean_field(Point{1.0, 1.0}) == Point{0.0, 0.0});
}

TEST_CASE("linear rejects matrices that are not SPD") {
  CHECK_THROWS_AS(make_linear(2, {1, 0, 0, -1}, {0, 0}, additive(1)), std::invalid_argument);
  CHECK_THROWS_AS(make_linear(2, {1, 2, 0, 1}, {0, 0}, additive(1)), std::invalid_argument);
  CHECK_THROWS_AS(make_linear(2, {1, 0, 0}, {0, 0}, additive(1)), std::invalid_argument);
}

TEST_CASE("cubic mean field") {
  const auto p = make_cubic(1, {0.0}, additive(1));
  CHECK(p.mean_field(Point{2.0}) == Point{8.0});
  CHECK(p.mean_field(Point{0.0}) == Point{0.0});
  const auto p3 = make_cubic(3, {0, 0, 0}, additive(1));
  CHECK(p3.mean_field(Point{1, 0, 0}) == Point{1, 0, 0});
}

TEST_CASE("convex potential mean field") {
  CHECK(make_convex_potential(1, additive(1)).mean_field(Point{1.0}) == Point{2.0});
  CHECK(make_convex_potential(4, additive(1)).mean_field(Point(4, 0.0)) == Point(4, 0.0));
  CHECK(make_convex_potential(2, additive(1)).mean_field(Point{1, 1}) == Point{3, 3});
}

TEST_CASE("mean field vanishes at the root of every built-in problem") {
  for (const auto& p : builtins(additive(1))) {
    CAPTURE(p.name());
    CHECK(norm(p.mean_field(p.root())) <= 1e-12);
  }
  CHECK_THROWS_AS(StochasticProblem("bad", {0.0}, [](ConstVec, MutVec out) { out[0] = 1.0; }, additive(1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_cubic(1, {0.0}, additive(-1)), std::invalid_argument);
}

TEST_CASE("oracle with explicit normals") {
  const auto p = make_cubic(1, {0.0}, additive(1));
  Point out(1);
  p.evaluate_oracle(Point{0.7}, Point{0.0}, out);
  CHECK(out == p.mean_field(Point{0.7}));
  p.evaluate_oracle(Point{0.7}, Point{2.0}, out);
  CHECK(out[0] == doctest::Approx(0.343 + 2.0).epsilon(1e-15));

  const auto ps = make_cubic(1, {0.0}, scaled(0.5));
  ps.evaluate_oracle(Point{1.0}, Point{2.0}, out);
  CHECK(out[0] == 1.0 + 0.5 * 2.0 * 2.0);

  FixedNormals zero({0.0});
  Point scratch(1);
  p.sample_oracle(Point{0.3}, zero, scratch, out);
  CHECK(out == p.mean_field(Point{0.3}));
}

TEST_CASE("sample_oracle consumes 2*ceil(d/2) uniforms and is deterministic") {
  for (std::size_t d : {1, 2, 3, 5}) {
    const auto p = make_cubic(d, Point(d, 0.0), additive(1));
    NormalStream a(77), b(77);
    Point scratch(d), out_a(d), out_b(d);
    const Point x(d, 0.4);
    p.sample_oracle(x, a, scratch, out_a);
    p.sample_oracle(x, b, scratch, out_b);
    CHECK(out_a == out_b);
    CHECK(a.uniforms_drawn() == 2 * ((d + 1) / 2));
  }
}

TEST_CASE("cubic oracle mean at x = 1 (Monte Carlo, CLT bound)") {
  const auto p = make_cubic(1, {0.0}, additive(1));
  NormalStream s(31);
  Point scratch(1), out(1);
  const std::size_t n = 100000;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    p.sample_oracle(Point{1.0}, s, scratch, out);
    sum += out[0];
  }
  CHECK(std::abs(sum / n - 1.0) <= 5.0 * 1.0 / std::sqrt(double(n)));  // 0.016
}

TEST_CASE("oracles are unbiased on a test grid") {
  for (const auto noise : {additive(1.0), scaled(0.5)}) {
    for (const auto& p : builtins(noise)) {
      const std::size_t d = p.dim();
      std::vector<Point> grid{p.root()};
      for (double r : {-1.5, 0.5, 1.0}) {
        Point x = p.root();
        for (std::size_t i = 0; i < d; ++i) x[i] += r * (i % 2 ? -1.0 : 1.0);
        grid.push_back(x);
      }
      NormalStream s(derive_seed(5, d));
      Point scratch(d), out(d);
      for (const Point& x : grid) {
        const std::size_t n = 100000;
        std::vector<double> sum(d, 0.0), sum2(d, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
          p.sample_oracle(x, s, scratch, out);
          for (std::size_t i = 0; i < d; ++i) {
            sum[i] += out[i];
            sum2[i] += out[i] * out[i];
          }
        }
        const Point u = p.mean_field(x);
        for (std::size_t i = 0; i < d; ++i) {
          const double mean = sum[i] / n;
          const double sd = std::sqrt(std::max(0.0, sum2[i] / n - mean * mean));
          CAPTURE(p.name());
          CAPTURE(i);
          CHECK(std::abs(mean - u[i]) <= 5.0 * sd / std::sqrt(double(n)));
        }
      }
    }
  }
}

TEST_CASE("H1 sampler examples") {
  H1SamplerSpec spec;
  spec.radii = {0.5, 1.0, 2.0};
  const auto cubic = check_h1(make_cubic(1, {0.0}, additive(1)), spec);
  CHECK(cubic.min_inner_product == 0.0625);
  CHECK(cubic.violations.empty());

  H1SamplerSpec circle;
  circle.radii = {1.0};
  circle.points_per_radius = 360;
  const auto lin = check_h1(make_linear(2, {1, 0, 0, 4}, {0, 0}, additive(1)), circle);
  CHECK(lin.points_checked == 360);
  CHECK(lin.min_inner_product == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(lin.argmin[0]) == doctest::Approx(1.0));
  CHECK(lin.passed());

  const auto rep = check_h1(make_repulsive(1, {0.0}, additive(1)), spec);
  CHECK_FALSE(rep.violations.empty());
  CHECK(rep.min_inner_product < 0.0);
}

TEST_CASE("H1 holds for every built-in problem") {
  H1SamplerSpec spec;
  spec.radii = {0.01, 0.5, 1.0, 3.0, 10.0};
  for (const auto noise : {additive(1.0), scaled(1.0)})
    for (const auto& p : builtins(noise)) {
      CAPTURE(p.name());
      CHECK(check_h1(p, spec).passed());
    }
}

TEST_CASE("second moment: additive cubic at x = 2") {
  const auto p = make_cubic(1, {0.0}, additive(1));
  NormalStream s(8);
  const auto est = estimate_second_moment(p, Point{2.0}, 20000, s);
  // E|U|^2 = u(x)^2 + sigma^2 = 64 + 1.
  CHECK(std::abs(est.mean - 65.0) <= 3.0 * est.standard_error);
  CHECK(p.second_moment_bound(2.0).value() == 65.0);

  NormalStream s2(9);
  const auto h3 = check_h3(p, 2.0, 20000, s2);
  CHECK(h3.passed());
  CHECK(std::abs(h3.argmax[0]) == 2.0);
  CHECK(std::abs(h3.max_second_moment - 65.0) <= 4.0 * h3.standard_error);
}

TEST_CASE("second moment: zero noise is exact") {
  const auto p = make_cubic(1, {0.0}, additive(0.0));
  NormalStream s(1);
  const auto h3 = check_h3(p, 2.0, 1000, s);
  CHECK(h3.max_second_moment == 64.0);
  CHECK(h3.standard_error == 0.0);
}

TEST_CASE("second moment: state-scaled noise at x = 1") {
  const auto p = make_cubic(1, {0.0}, scaled(1.0));
  NormalStream s(10);
  const auto est = estimate_second_moment(p, Point{1.0}, 20000, s);
  // u(1)^2 + (1 + |x|^2)^2 sigma^2 = 1 + 4.
  CHECK(std::abs(est.mean - 5.0) <= 3.0 * est.standard_error);
  NormalStream s2(1);
  CHECK_THROWS_AS(check_h3(p, 1.0, 999, s2), std::invalid_argument);
}
