#pragma once

// Kernel regression on shifted training sets in its two equivalent forms:
// point-wise (Σ α_i k(x, x_i)) and feature-space (<β, φ(x)>), plus the
// shift-limit closed form of the per-feature coefficient blocks β¹_w, β²_w.

#include "ntkx/gram.hpp"

#include <variant>
#include <vector>

namespace ntkx {

// The closed-form β blocks are differences of O(t/δ) terms; they are
// accumulated in quad precision where the compiler provides it.
#if defined(__SIZEOF_FLOAT128__)
using ExtendedReal = __float128;
#else
using ExtendedReal = long double;
#endif

/// Per-feature coefficient blocks: column k of beta1 (length d+1) and entry k
/// of beta2 pair with the two parts of feature block k.
struct BetaComponents {
  Matrix beta1;
  Vector beta2;
  FeatureSampleRef features;
};

/// Shift-limit constants shared by every feature:
///   C = −t²κ/(δ(nκt² + δ)),  g_sum = Σ_i g(x̂_i^∞),
/// and the sums Σ_i x̂_i^∞ and Σ_i x̂_i^∞ g(x̂_i^∞).
struct ClosedFormContext {
  std::size_t n = 0;
  double t = 0.0;
  double delta = 0.0;
  double kappa = 0.0;
  double c = 0.0;
  double g_sum = 0.0;
  Vector sum_points;
  Vector sum_weighted;
  /// C·g_sum·Σx̂_i^∞ + (1/δ)·Σx̂_i^∞g_i in extended precision. On active
  /// features β¹_w is this vector and β²_w its inner product with w.
  std::vector<ExtendedReal> combined;
};

ClosedFormContext make_closed_form_context(const Realization& phi, const Direction& v, double t,
                                           double delta, double kappa, const TargetFunction& g);

BetaComponents beta_from_alpha(const ShiftedTrainingSet& ts, const AlphaVector& alpha,
                               FeatureSampleRef fs);

BetaComponents beta_closed_form(const Realization& phi, const Direction& v, double t, double delta,
                                double kappa, const TargetFunction& g, FeatureSampleRef fs);

/// β¹_w and β²_w of the closed form for a single weight vector.
Vector closed_form_beta1(const ClosedFormContext& ctx, const Vector& w, const Direction& v);
double closed_form_beta2(const ClosedFormContext& ctx, const Vector& w, const Direction& v);

struct PointWise {
  std::vector<AugmentedPoint> train;
  Vector alpha;
  KernelMode mode;
};

struct FeatureSpace {
  BetaComponents beta;
};

class Predictor {
 public:
  using Variant = std::variant<PointWise, FeatureSpace>;

  explicit Predictor(Variant v);
  const Variant& variant() const { return v_; }
  std::size_t input_dim() const { return dim_; }

 private:
  Variant v_;
  std::size_t dim_;
};

/// Assembles the gram in `mode`, solves with `cfg` and returns the point-wise predictor.
Predictor fit_point_wise(const ShiftedTrainingSet& ts, const KernelMode& mode,
                         const TikhonovConfig& cfg);

double predict(const Predictor& pred, const Point& x);

/// Default finite-difference step 1e-4·(1 + |w_{d+1}|).
double default_bias_step(const Vector& w);

/// Central difference of β²_w in the bias coordinate w_{d+1}. Off the
/// indicator boundary it equals g_sum/(nκt² + δ)·1(<w,−v̂> >= 0).
/// Throws BoundaryTooClose unless |<w,−v̂>| >= 10·step·‖v‖.
double beta_bias_sensitivity(const ClosedFormContext& ctx, const Vector& w, const Direction& v,
                             double step);

/// Max-abs central difference of β¹_w in w_{d+1}; zero off the boundary.
double beta1_bias_sensitivity(const ClosedFormContext& ctx, const Vector& w, const Direction& v,
                              double step);

}  // namespace ntkx
