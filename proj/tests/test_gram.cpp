#include "doctest.h"

#include "ntkx/errors.hpp"
#include "ntkx/gram.hpp"

#include <algorithm>
#include <random>
#include <sstream>

using namespace ntkx;

namespace {

Matrix dense_inverse(std::size_t n, double kappa, double t, double delta) {
  const auto m = static_cast<Eigen::Index>(n);
  const Matrix a = delta * Matrix::Identity(m, m) + Matrix::Constant(m, m, kappa * t * t);
  return a.partialPivLu().inverse();
}

}  // namespace

TEST_CASE("assemble_gram") {
  SUBCASE("single origin point") {
    const auto ts = shift_set(Realization({Point{0}}), Direction{1}, 0, TargetFunction::constant(1, 0));
    const GramMatrix k = assemble_gram(ts, Analytic{});
    REQUIRE(k.size() == 1);
    CHECK(k.entries(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("symmetric and duplicate rows identical") {
    const Realization phi({Point{0.2, 0.4}, Point{-0.5, 0.1}, Point{0.2, 0.4}, Point{0.9, -0.8}});
    const auto ts = shift_set(phi, Direction{0.6, -0.8}, 50, TargetFunction::constant(2, 1));
    const auto fs = share(sample_features(2, 2000, 5));
    for (const KernelMode& mode : {KernelMode{Analytic{}}, KernelMode{MonteCarlo{fs}}}) {
      const GramMatrix k = assemble_gram(ts, mode);
      CHECK(k.entries == k.entries.transpose());
      CHECK(k.entries.row(0) == k.entries.row(2));
    }
    CHECK(assemble_gram(ts, MonteCarlo{fs}).features == FeatureTag::of(*fs));
  }
}

TEST_CASE("asymptotic_gram") {
  CHECK(asymptotic_gram(2, 2, 3).entries == Matrix::Constant(2, 2, 18.0));
  CHECK(asymptotic_gram(1, 1, 1).entries == Matrix::Constant(1, 1, 1.0));
  const GramMatrix z = asymptotic_gram(3, 0, 10);
  CHECK(z.entries.isZero(0.0));
  CHECK(z.degenerate);
}

TEST_CASE("Sherman-Morrison inverse") {
  SUBCASE("against dense inversion") {
    const Matrix m = sherman_morrison_inverse(2, 1, 10, 0.01);
    const Matrix ref = dense_inverse(2, 1, 10, 0.01);
    CHECK(m(0, 0) == doctest::Approx(50.0024998750062).epsilon(1e-12));
    CHECK(m(0, 1) == doctest::Approx(-49.9975001249938).epsilon(1e-12));
    CHECK((m - ref).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("special cases") {
    CHECK(sherman_morrison_inverse(3, 0, 10, 0.5).isApprox(2.0 * Matrix::Identity(3, 3)));
    CHECK(sherman_morrison_inverse(1, 1, 1, 1)(0, 0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(sherman_morrison_inverse(2, 1, 1, 0), InvalidRegularization);
    CHECK_THROWS_AS(sherman_morrison_inverse(2, 1, 1, -1), InvalidRegularization);
  }
  SUBCASE("identity product over a grid") {
    // Rounding in M grows like 1/rel; the bound tracks that conditioning.
    for (std::size_t n : {1u, 2u, 8u, 32u, 64u}) {
      for (double kappa : {0.5, 1.0, 4.0}) {
        for (double t : {10.0, 100.0, 1000.0}) {
          for (double rel : {1e-2, 1e-6, 1e-10}) {
            const double delta = rel * static_cast<double>(n) * kappa * t * t;
            const auto nn = static_cast<Eigen::Index>(n);
            const Matrix a = delta * Matrix::Identity(nn, nn) + Matrix::Constant(nn, nn, kappa * t * t);
            const double resid = (sherman_morrison_inverse(n, kappa, t, delta) * a - Matrix::Identity(nn, nn)).cwiseAbs().maxCoeff();
            CHECK(resid < std::max(1e-8, 1e-15 / rel));
          }
        }
      }
    }
  }
}

TEST_CASE("tikhonov_solve") {
  GramMatrix one;
  one.entries = Matrix::Constant(1, 1, 1.0);
  const AlphaVector a = tikhonov_solve(one, TikhonovConfig::absolute(1), (Vector(1) << 2).finished());
  CHECK(a.values[0] == doctest::Approx(1.0));
  CHECK(a.delta == 1.0);

  const AlphaVector b = tikhonov_solve(asymptotic_gram(2, 1, 10), TikhonovConfig::absolute(0.01), (Vector(2) << 1, 2).finished());
  CHECK(b.values[0] == doctest::Approx(-49.99250037498125).epsilon(1e-10));
  CHECK(b.values[1] == doctest::Approx(50.00749962501875).epsilon(1e-10));

  CHECK(tikhonov_solve(asymptotic_gram(3, 1, 10), TikhonovConfig::absolute(0.01), Vector::Zero(3)).values.isZero(0.0));
  CHECK_THROWS_AS(tikhonov_solve(one, TikhonovConfig::absolute(0), Vector::Ones(1)), InvalidRegularization);
  CHECK_THROWS_AS(tikhonov_solve(one, TikhonovConfig::absolute(1), Vector::Ones(2)), DimensionError);
}

TEST_CASE("tikhonov residual stays small relative to the labels") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Point> pts;
  for (int i = 0; i < 16; ++i) pts.push_back(Point{u(rng), u(rng)});
  Vector y(16);
  for (auto& yi : y) yi = u(rng);
  for (double t : {1e2, 1e3, 1e4}) {
    const auto ts = shift_set(Realization(pts), Direction{0.6, 0.8}, t, TargetFunction::constant(2, 0));
    const GramMatrix k = assemble_gram(ts, Analytic{});
    const AlphaVector a = tikhonov_solve(k, TikhonovConfig::relative(1e-8), y);
    CHECK(a.residual <= 1e-8 * y.norm());
    CHECK(a.delta == doctest::Approx(1e-8 * k.mean_diagonal()));
  }
}

TEST_CASE("regularized gram stays positive definite") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Point> pts;
  for (int i = 0; i < 10; ++i) pts.push_back(Point{u(rng), u(rng), u(rng)});
  const auto ts = shift_set(Realization(pts), Direction{1, 0, 0}, 100, TargetFunction::constant(3, 0));
  const GramMatrix k = assemble_gram(ts, Analytic{});
  const double delta = TikhonovConfig::relative(1e-8).effective_delta(k);
  const auto nn = static_cast<Eigen::Index>(k.size());
  Eigen::SelfAdjointEigenSolver<Matrix> es(k.entries + delta * Matrix::Identity(nn, nn));
  CHECK(es.eigenvalues().minCoeff() >= delta * (1 - 1e-8) - 1e-12 * k.entries.cwiseAbs().maxCoeff());
}

TEST_CASE("asymptotic_alpha") {
  const Vector y = (Vector(2) << 1, 2).finished();
  const AlphaVector a = asymptotic_alpha(y, 2, 1, 10, 0.01);
  CHECK(a.values[0] == doctest::Approx(-49.99250037498125).epsilon(1e-10));
  CHECK(a.values[1] == doctest::Approx(50.00749962501875).epsilon(1e-10));
  CHECK(asymptotic_alpha(Vector::Zero(4), 4, 1, 10, 0.1).values.isZero(0.0));

  // Equal labels: α_i = y0/(nκt² + δ).
  const AlphaVector c = asymptotic_alpha(Vector::Constant(5, 3.0), 5, 2.0, 7.0, 0.3);
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(c.values[i] == doctest::Approx(3.0 / (5 * 2.0 * 49 + 0.3)).epsilon(1e-12));
  CHECK_THROWS_AS(asymptotic_alpha(y, 2, 1, 10, 0), InvalidRegularization);
}

TEST_CASE("asymptotic_alpha matches the dense solve") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  for (std::size_t n : {1u, 2u, 8u, 32u, 64u}) {
    Vector y(static_cast<Eigen::Index>(n));
    for (auto& yi : y) yi = n01(rng);
    for (double t : {10.0, 1000.0}) {
      const double delta = 1e-6 * t * t;
      const Vector a = asymptotic_alpha(y, n, 1.0, t, delta).values;
      const Vector b = tikhonov_solve(asymptotic_gram(n, 1.0, t), TikhonovConfig::absolute(delta), y).values;
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-8 * b.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("write_matrix_csv uses 17 significant digits") {
  std::ostringstream os;
  Matrix m(1, 2);
  m << 0.1, 1.0 / 3.0;
  write_matrix_csv(os, m);
  CHECK(os.str() == "0.10000000000000001,0.33333333333333331\n");
}
