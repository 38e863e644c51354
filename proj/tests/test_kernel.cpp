#include "doctest.h"

#include "ntkx/errors.hpp"
#include "ntkx/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace ntkx;

namespace {

// Independent oracle for the expectation over w ~ N(0, I). Only the
// projection of w onto span{x, y} matters; in polar coordinates on that
// plane E[r²] = 2 and the angular part is integrated by the midpoint rule.
double ntk_quadrature(const Vector& x, const Vector& y) {
  const Vector e1 = x / x.norm();
  Vector rest = y - y.dot(e1) * e1;
  const bool colinear = rest.norm() < 1e-14 * y.norm();
  const Vector e2 = colinear ? Vector::Zero(x.size()) : Vector(rest / rest.norm());
  const double x1 = x.dot(e1), y1 = y.dot(e1), y2 = colinear ? 0.0 : y.dot(e2);
  // In the (e1, e2) plane w·x >= 0 on [−π/2, π/2] and w·y >= 0 on
  // [θ−π/2, θ+π/2]. Integrate the smooth part over the intersection only.
  const double theta = std::atan2(y2, y1);
  const double lo = std::max(-std::numbers::pi / 2, theta - std::numbers::pi / 2);
  const double hi = std::min(std::numbers::pi / 2, theta + std::numbers::pi / 2);
  if (hi <= lo) return 0.0;
  const int steps = 20000;
  const double h = (hi - lo) / steps;
  double weighted = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double phi = lo + (k + 0.5) * h;
    weighted += (x1 * std::cos(phi)) * (y1 * std::cos(phi) + y2 * std::sin(phi));
  }
  const double both = (hi - lo) / (2.0 * std::numbers::pi);
  // E[<w,x><w,y> 1 1] = E[r²]·(angular mean) with E[r²] = 2 in the plane.
  return x.dot(y) * both + 2.0 * weighted * h / (2.0 * std::numbers::pi);
}

AugmentedPoint ap(std::initializer_list<double> c) { return AugmentedPoint(Point(c)); }

Vector random_point(std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(static_cast<Eigen::Index>(d));
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("sample_features is deterministic and validated") {
  const auto a = sample_features(2, 4, 7);
  const auto b = sample_features(2, 4, 7);
  CHECK(a.weights() == b.weights());
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.fingerprint() != sample_features(2, 4, 8).fingerprint());
  CHECK_THROWS_AS(sample_features(3, 0, 0), InvalidInput);
}

TEST_CASE("sample_features has standard normal coordinates") {
  const std::size_t k = 1000000;
  const auto fs = sample_features(1, k, 1);
  for (Eigen::Index r = 0; r < 2; ++r) {
    const double mean = fs.weights().row(r).mean();
    const double var = (fs.weights().row(r).array() - mean).square().mean();
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(k)));
    CHECK(var == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("indicator uses >= with ties active") {
  CHECK(indicator((Vector(2) << 0.5, -0.3).finished(), AugmentedPoint::from_augmented((Vector(2) << 2, 1).finished())) == 1);
  CHECK(indicator((Vector(2) << 0.5, -1.0).finished(), AugmentedPoint::from_augmented((Vector(2) << 2, 1).finished())) == 1);
  CHECK(indicator((Vector(3) << -1, 0, 0).finished(), ap({5, 5})) == 0);
}

TEST_CASE("limit_indicator reads the sign of <w, -v>") {
  CHECK(limit_indicator((Vector(3) << -0.3, 0.8, 0.1).finished(), Direction{1, 0}) == 1);
  CHECK(limit_indicator((Vector(3) << 0.3, -0.2, 0.5).finished(), Direction{1, 0}) == 0);
  CHECK(limit_indicator((Vector(3) << 0.0, 0.7, -2.0).finished(), Direction{1, 0}) == 1);
}

TEST_CASE("<w_check, v> equals <w, [v|0]>") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 20; ++trial) {
    Vector w(4);
    for (auto& x : w) x = n01(rng);
    const Direction v(Vector(random_point(3, rng)));
    CHECK(w.head(3).dot(v.coords()) == doctest::Approx(w.dot(augment_direction(v))).epsilon(1e-15));
  }
}

TEST_CASE("feature_map blocks") {
  SUBCASE("active and inactive") {
    Matrix w(2, 2);
    w << 0.5, -1, -0.3, 0;
    const FeatureSample fs(w, 0);
    const Vector phi = feature_map(AugmentedPoint::from_augmented((Vector(2) << 2, 1).finished()), fs);
    REQUIRE(phi.size() == 6);
    CHECK(phi[0] == 2);
    CHECK(phi[1] == 1);
    CHECK(phi[2] == doctest::Approx(0.7));
    CHECK(phi.tail(3).isZero(0.0));
  }
  SUBCASE("origin keeps only the bias") {
    Matrix w(3, 1);
    w << -0.4, 1.2, 0.9;
    const Vector phi = feature_map(ap({0, 0}), FeatureSample(w, 0));
    CHECK(phi == Vector((Vector(4) << 0, 0, 1, 0.9).finished()));
  }
}

TEST_CASE("analytic kernel values") {
  CHECK(ntk(ap({0}), ap({0}), Analytic{}).value == doctest::Approx(1.0).epsilon(1e-15));
  const double perp = ntk_analytic((Vector(2) << 1, 1).finished(), (Vector(2) << -1, 1).finished());
  CHECK(perp == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
  const Point x{0.3, -1.7, 2.2};
  CHECK(ntk(AugmentedPoint(x), AugmentedPoint(x), Analytic{}).value ==
        doctest::Approx(x.coords().squaredNorm() + 1.0).epsilon(1e-14));
}

TEST_CASE("analytic kernel matches angular quadrature") {
  std::mt19937_64 rng(11);
  for (std::size_t d : {1u, 2u, 5u}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Vector x = AugmentedPoint(Point(random_point(d, rng))).coords();
      const Vector y = AugmentedPoint(Point(Vector(3.0 * random_point(d, rng)))).coords();
      CHECK(ntk_analytic(x, y) == doctest::Approx(ntk_quadrature(x, y)).epsilon(1e-8));
    }
  }
}

TEST_CASE("Monte Carlo equals the feature-map inner product exactly") {
  const auto fs = sample_features(3, 5000, 42);
  const auto shared = share(fs);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const AugmentedPoint x(Point(random_point(3, rng)));
    const AugmentedPoint y(Point(random_point(3, rng)));
    const double mc = ntk(x, y, MonteCarlo{shared}).value;
    CHECK(mc == feature_inner(feature_map(x, fs), feature_map(y, fs), fs));
  }
}

TEST_CASE("kernel symmetry is bit-exact in both modes") {
  const auto fs = share(sample_features(2, 3000, 9));
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const AugmentedPoint x(Point(random_point(2, rng)));
    const AugmentedPoint y(Point(Vector(5.0 * random_point(2, rng))));
    CHECK(ntk(x, y, Analytic{}).value == ntk(y, x, Analytic{}).value);
    CHECK(ntk(x, y, MonteCarlo{fs}).value == ntk(y, x, MonteCarlo{fs}).value);
  }
}

TEST_CASE("analytic kernel is rotation invariant but not translation invariant") {
  std::mt19937_64 rng(8);
  const double a = 0.83;
  Matrix rot(2, 2);
  rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = random_point(2, rng), y = random_point(2, rng);
    const double base = ntk(AugmentedPoint(Point(x)), AugmentedPoint(Point(y)), Analytic{}).value;
    const double turned = ntk(AugmentedPoint(Point(Vector(rot * x))), AugmentedPoint(Point(Vector(rot * y))), Analytic{}).value;
    CHECK(std::abs(base - turned) <= 1e-12);
  }
  const Vector c = (Vector(2) << 3.0, -2.0).finished();
  const Vector x = (Vector(2) << 0.2, 0.1).finished(), y = (Vector(2) << -0.4, 0.6).finished();
  const double moved = ntk(AugmentedPoint(Point(Vector(x + c))), AugmentedPoint(Point(Vector(y + c))), Analytic{}).value;
  CHECK(std::abs(moved - ntk(AugmentedPoint(Point(x)), AugmentedPoint(Point(y)), Analytic{}).value) > 0.1);
}

TEST_CASE("analytic and Monte Carlo agree within 4 standard errors") {
  std::mt19937_64 rng(21);
  for (std::size_t d : {1u, 2u, 5u}) {
    const auto fs = share(sample_features(d, 200000, 100 + d));
    int within = 0;
    const int pairs = 20;
    for (int p = 0; p < pairs; ++p) {
      const AugmentedPoint x(Point(random_point(d, rng)));
      const AugmentedPoint y(Point(random_point(d, rng)));
      const KernelEstimate mc = ntk(x, y, MonteCarlo{fs});
      CHECK(mc.std_error > 0.0);
      within += std::abs(mc.value - ntk(x, y, Analytic{}).value) <= 4.0 * mc.std_error;
    }
    CHECK(within >= 19);
  }
}

TEST_CASE("kappa") {
  CHECK(kappa(Direction{3, 4}, Analytic{}).value == 25.0 * kappa(Direction{0.6, 0.8}, Analytic{}).value);
  CHECK(kappa(Direction{0.6, 0.8}, Analytic{}).value == doctest::Approx(1.0).epsilon(1e-15));
  const auto fs = share(sample_features(2, 1000000, 77));
  const KernelEstimate mc = kappa(Direction{0.6, 0.8}, MonteCarlo{fs});
  CHECK(std::abs(mc.value - 1.0) <= 4.0 * mc.std_error);
  CHECK_THROWS_AS(kappa(Direction({0, 0}), Analytic{}), DegenerateDirection);
}

TEST_CASE("agnosticism rate") {
  const auto fs = sample_features(2, 100000, 31);
  SUBCASE("points already on the -v ray agree with the limit") {
    // All x̂_i = (−s v, 1) with s large; the bias is negligible for almost all w.
    const Direction v{0.6, 0.8};
    const Realization phi({Point{-0.6e9, -0.8e9}, Point{-1.2e9, -1.6e9}});
    const auto ts = shift_set(phi, v, 0, TargetFunction::constant(2, 0));
    CHECK(agnosticism_rate(ts, fs) < 1e-6);
  }
  SUBCASE("decreases about tenfold per decade of t") {
    const Realization phi({Point{0.3, -0.7}, Point{-0.9, 0.2}, Point{0.5, 0.5}, Point{-0.1, -0.4}});
    const Direction v{0.8, -0.6};
    const auto g = TargetFunction::constant(2, 1);
    const double r2 = agnosticism_rate(shift_set(phi, v, 1e2, g), fs);
    const double r3 = agnosticism_rate(shift_set(phi, v, 1e3, g), fs);
    CHECK(r3 < r2);
    CHECK(r2 / r3 > 5.0);
    CHECK(r2 / r3 < 20.0);
  }
}
