#include "ntkx/mlp.hpp"

#include "ntkx/errors.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>

namespace ntkx {
namespace {

// Augmented training inputs as the columns of a (d+1) × n matrix.
Matrix augmented_inputs(const ShiftedTrainingSet& ts) {
  Matrix x(static_cast<Eigen::Index>(ts.dim() + 1), static_cast<Eigen::Index>(ts.size()));
  for (std::size_t i = 0; i < ts.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = ts.augmented(i).coords();
  return x;
}

double half_squared_loss(const Vector& residual) { return 0.5 * residual.squaredNorm(); }

}  // namespace

MLPModel::MLPModel(Matrix hidden, Vector output) : hidden_(std::move(hidden)), output_(std::move(output)) {
  if (hidden_.rows() < 1 || hidden_.cols() < 2) throw DimensionError("MLPModel: need m >= 1, d >= 1");
  if (output_.size() != hidden_.rows()) throw DimensionError("MLPModel: output length != width");
}

Vector MLPModel::parameters() const {
  Vector p(hidden_.size() + output_.size());
  p.head(hidden_.size()) = Eigen::Map<const Vector>(hidden_.data(), hidden_.size());
  p.tail(output_.size()) = output_;
  return p;
}

MLPModel init(const MLPConfig& cfg, std::size_t d) {
  if (cfg.width < 1) throw InvalidInput("MLPConfig: width must be at least 1");
  if (d < 1) throw DimensionError("init: d must be at least 1");
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const auto m = static_cast<Eigen::Index>(cfg.width);
  Matrix hidden(m, static_cast<Eigen::Index>(d + 1));
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index j = 0; j < hidden.cols(); ++j) hidden(k, j) = normal(rng);
  }
  Vector output(m);
  for (Eigen::Index k = 0; k < m; ++k) output[k] = coin(rng) ? 1.0 : -1.0;
  return MLPModel(std::move(hidden), std::move(output));
}

double evaluate(const MLPModel& model, const Point& x) {
  if (x.dim() != model.input_dim()) throw DimensionError("evaluate: input dimension mismatch");
  const Vector xh = AugmentedPoint(x).coords();
  const Vector pre = model.hidden() * xh;
  return model.output().dot(pre.cwiseMax(0.0)) / std::sqrt(static_cast<double>(model.width()));
}

double default_learning_rate(const MLPModel& model, const ShiftedTrainingSet& ts) {
  // Diagonal of the empirical tangent kernel at x_i:
  //   (1/m) Σ_k [a_k² ‖x̂_i‖² 1(<w_k,x̂_i> > 0) + ReLU(<w_k,x̂_i>)²].
  const Matrix x = augmented_inputs(ts);
  const Matrix pre = model.hidden() * x;
  const double m = static_cast<double>(model.width());
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    const double xx = x.col(i).squaredNorm();
    for (Eigen::Index k = 0; k < pre.rows(); ++k) {
      const double z = pre(k, i);
      if (z > 0.0) total += model.output()[k] * model.output()[k] * xx + z * z;
    }
  }
  const double mean_diag = total / (m * static_cast<double>(x.cols()));
  if (!(mean_diag > 0.0)) throw InvalidInput("default_learning_rate: empty tangent kernel");
  return 0.1 / mean_diag;
}

TrainResult train(MLPModel model, const ShiftedTrainingSet& ts, const MLPConfig& cfg) {
  if (ts.dim() != model.input_dim()) throw DimensionError("train: input dimension mismatch");
  const double lr = cfg.lr > 0.0 ? cfg.lr : default_learning_rate(model, ts);
  const Matrix x = augmented_inputs(ts);
  const double scale = 1.0 / std::sqrt(static_cast<double>(model.width()));

  TrainResult out{model, {}, lr};
  auto& net = out.model;
  out.loss_trace.reserve(cfg.steps + 1);

  auto forward = [&](Matrix& pre, Matrix& act, Vector& residual) {
    pre.noalias() = net.hidden() * x;  // m × n
    act = pre.cwiseMax(0.0);
    residual = scale * (act.transpose() * net.output()) - ts.labels;
  };

  Matrix pre, act, gated, grad_hidden;
  Vector residual, grad_out;
  forward(pre, act, residual);
  const double initial = half_squared_loss(residual);
  out.loss_trace.push_back(initial);

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const double loss = out.loss_trace.back();
    if (cfg.stop_ratio > 0.0 && loss <= cfg.stop_ratio * initial) break;

    // ∂L/∂a_k = scale Σ_i r_i ReLU(z_ki);  ∂L/∂w_k = scale a_k Σ_i r_i 1(z_ki > 0) x̂_i.
    grad_out.noalias() = scale * (act * residual);
    gated = (pre.array() > 0.0).cast<double>().matrix();
    gated.array().rowwise() *= residual.transpose().array();
    grad_hidden.noalias() = gated * x.transpose();
    grad_hidden.array().colwise() *= (scale * net.output()).array();

    net.hidden() -= lr * grad_hidden;
    if (cfg.train_both_layers) net.output() -= lr * grad_out;

    forward(pre, act, residual);
    const double next = half_squared_loss(residual);
    if (!std::isfinite(next)) throw NaNError("train: non-finite loss at step " + std::to_string(step + 1));
    if (next > 10.0 * initial) {
      throw DivergenceError("train: loss grew past 10x its initial value at step " + std::to_string(step + 1));
    }
    if (step >= 10 && next > loss * (1.0 + 1e-9)) {
      throw DivergenceError("train: loss increased at step " + std::to_string(step + 1) +
                            "; lower the learning rate");
    }
    out.loss_trace.push_back(next);
  }
  return out;
}

double relative_displacement(const MLPModel& initial, const MLPModel& trained) {
  const Vector p0 = initial.parameters();
  return (trained.parameters() - p0).norm() / p0.norm();
}

void write_loss_trace_csv(std::ostream& os, const std::vector<double>& trace) {
  os << "step,loss\n";
  char buf[32];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", trace[i]);
    os << i << ',' << buf << '\n';
  }
}

}  // namespace ntkx
