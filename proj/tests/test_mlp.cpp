#include "doctest.h"

#include "ntkx/errors.hpp"
#include "ntkx/mlp.hpp"

#include <cmath>
#include <sstream>

using namespace ntkx;

namespace {

ShiftedTrainingSet single_point() {
  return shift_set(Realization({Point{0.3, -0.4}}), Direction{1, 0}, 0,
                   TargetFunction::constant(2, 0.7));
}

// f(x) recomputed from the definition, as the oracle for evaluate().
double reference_forward(const MLPModel& m, const Point& x) {
  const Vector xh = AugmentedPoint(x).coords();
  double s = 0.0;
  for (Eigen::Index k = 0; k < m.hidden().rows(); ++k) s += m.output()[k] * std::max(0.0, m.hidden().row(k).dot(xh));
  return s / std::sqrt(static_cast<double>(m.width()));
}

}  // namespace

TEST_CASE("init") {
  MLPConfig cfg;
  cfg.width = 2000;
  cfg.seed = 3;
  const MLPModel a = init(cfg, 2);
  const MLPModel b = init(cfg, 2);
  CHECK(a.hidden() == b.hidden());
  CHECK(a.output() == b.output());
  CHECK(a.hidden().rows() == 2000);
  CHECK(a.hidden().cols() == 3);
  for (Eigen::Index k = 0; k < a.output().size(); ++k) CHECK(std::abs(a.output()[k]) == 1.0);
  const double mean = a.hidden().mean();
  const double var = (a.hidden().array() - mean).square().mean();
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.1);
  CHECK(a.parameters().size() == 2000 * 3 + 2000);

  cfg.seed = 4;
  CHECK(init(cfg, 2).hidden() != a.hidden());
}

TEST_CASE("evaluate") {
  Matrix w(2, 2);
  w << 1, 0, -1, 1;
  const MLPModel m(w, (Vector(2) << 1, -1).finished());
  // x̂ = (2, 1): ReLU values 2 and 0, so f = (2 − 0)/√2.
  CHECK(evaluate(m, Point{2.0}) == doctest::Approx(std::sqrt(2.0)));
  MLPConfig cfg;
  cfg.width = 128;
  cfg.seed = 9;
  const MLPModel r = init(cfg, 3);
  for (double s : {-1.0, 0.0, 0.5, 2.0}) {
    const Point x{s, 0.3 * s, -0.2};
    CHECK(evaluate(r, x) == doctest::Approx(reference_forward(r, x)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(evaluate(r, Point{1.0}), DimensionError);
}

TEST_CASE("training drives the single-point loss down") {
  const auto ts = single_point();
  MLPConfig cfg;
  cfg.width = 512;
  cfg.seed = 1;
  cfg.steps = 5000;
  const MLPModel start = init(cfg, 2);
  const TrainResult r = train(start, ts, cfg);
  REQUIRE(r.loss_trace.size() >= 2);
  CHECK(r.loss_trace.back() < 1e-4 * r.loss_trace.front());
  CHECK(r.learning_rate == doctest::Approx(default_learning_rate(start, ts)));
  CHECK(relative_displacement(start, r.model) > 0.0);
  CHECK(relative_displacement(start, start) == 0.0);
}

TEST_CASE("training is deterministic") {
  const auto ts = single_point();
  MLPConfig cfg;
  cfg.width = 64;
  cfg.seed = 2;
  cfg.steps = 300;
  const auto a = train(init(cfg, 2), ts, cfg);
  const auto b = train(init(cfg, 2), ts, cfg);
  CHECK(a.loss_trace == b.loss_trace);
  CHECK(a.model.parameters() == b.model.parameters());
}

TEST_CASE("early stopping") {
  const auto ts = single_point();
  MLPConfig cfg;
  cfg.width = 256;
  cfg.seed = 1;
  cfg.steps = 100000;
  cfg.stop_ratio = 1e-3;
  const auto r = train(init(cfg, 2), ts, cfg);
  CHECK(r.loss_trace.back() <= 1e-3 * r.loss_trace.front());
  CHECK(r.loss_trace.size() < 100001);
}

TEST_CASE("an oversized learning rate is reported as divergence") {
  const auto ts = single_point();
  MLPConfig cfg;
  cfg.width = 64;
  cfg.seed = 1;
  cfg.steps = 200;
  const MLPModel m = init(cfg, 2);
  cfg.lr = 100.0 * default_learning_rate(m, ts);
  CHECK_THROWS_AS(train(m, ts, cfg), DivergenceError);
}

TEST_CASE("wider networks move less") {
  const auto ts = single_point();
  double previous = INFINITY;
  for (std::size_t m : {64u, 1024u, 16384u}) {
    MLPConfig cfg;
    cfg.width = m;
    cfg.seed = 5;
    cfg.steps = 20000;
    cfg.stop_ratio = 1e-6;
    const MLPModel start = init(cfg, 2);
    const double disp = relative_displacement(start, train(start, ts, cfg).model);
    CHECK(disp < previous);
    previous = disp;
  }
}

TEST_CASE("write_loss_trace_csv") {
  std::ostringstream os;
  write_loss_trace_csv(os, {0.5, 0.1});
  CHECK(os.str() == "step,loss\n0,0.5\n1,0.10000000000000001\n");
}
