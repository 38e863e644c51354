#pragma once

// Finite-width two-layer ReLU network in NTK parameterization,
//   f(x) = (1/√m) Σ_k a_k · ReLU(<w_k, x̂>),
// trained by full-batch gradient descent on ½ Σ_i (f(x_i) − y_i)².

#include "ntkx/geometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ntkx {

struct MLPConfig {
  std::size_t width = 1024;
  double lr = 0.0;  // <= 0 selects default_learning_rate()
  std::size_t steps = 20000;
  std::uint64_t seed = 0;
  bool train_both_layers = true;
  /// Stop once loss <= stop_ratio·initial loss; 0 disables early stopping.
  double stop_ratio = 0.0;
};

class MLPModel {
 public:
  MLPModel(Matrix hidden, Vector output);

  std::size_t width() const { return static_cast<std::size_t>(hidden_.rows()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(hidden_.cols()) - 1; }
  const Matrix& hidden() const { return hidden_; }  // m × (d+1)
  const Vector& output() const { return output_; }
  Matrix& hidden() { return hidden_; }
  Vector& output() { return output_; }

  /// Flattened (hidden, output) parameter vector.
  Vector parameters() const;

 private:
  Matrix hidden_;
  Vector output_;
};

/// Hidden weights N(0, 1), output weights uniform on {−1, +1}, both drawn from
/// a Mersenne Twister seeded with cfg.seed.
MLPModel init(const MLPConfig& cfg, std::size_t d);

double evaluate(const MLPModel& model, const Point& x);

/// 0.1 / mean diagonal of the model's empirical tangent-kernel gram on ts.
double default_learning_rate(const MLPModel& model, const ShiftedTrainingSet& ts);

struct TrainResult {
  MLPModel model;
  std::vector<double> loss_trace;  // loss before each step, then the final loss
  double learning_rate = 0.0;
};

/// Throws NaNError on a non-finite loss, DivergenceError if the loss exceeds
/// 10× its initial value or rises after the first 10 steps.
TrainResult train(MLPModel model, const ShiftedTrainingSet& ts, const MLPConfig& cfg);

/// ‖θ − θ_0‖ / ‖θ_0‖.
double relative_displacement(const MLPModel& initial, const MLPModel& trained);

/// "step,loss" CSV, 17 significant digits.
void write_loss_trace_csv(std::ostream& os, const std::vector<double>& trace);

}  // namespace ntkx
