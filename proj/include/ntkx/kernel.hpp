#pragma once

// Two-layer ReLU neural tangent kernel: sampled features, the induced feature
// map, Monte Carlo and closed-form (arc-cosine) evaluation, and kappa.
//
// For a feature w ~ N(0, I_{d+1}) the per-feature contribution to the kernel is
//
//   (x̂·ŷ + <w,x̂><w,ŷ>) · 1(<w,x̂> >= 0) · 1(<w,ŷ> >= 0),
//
// and the kernel is its expectation over w. Monte Carlo mode averages it over
// a fixed FeatureSample; Analytic mode uses the first-order arc-cosine form.

#include "ntkx/geometry.hpp"

#include <cstdint>
#include <memory>
#include <variant>

namespace ntkx {

/// K weight vectors of length d+1, stored as the columns of a matrix. Each
/// column splits as (w̌, w_{d+1}): the input part and the bias coordinate.
class FeatureSample {
 public:
  FeatureSample(Matrix weights, std::uint64_t seed);

  std::size_t input_dim() const { return static_cast<std::size_t>(weights_.rows()) - 1; }
  std::size_t count() const { return static_cast<std::size_t>(weights_.cols()); }
  std::uint64_t seed() const { return seed_; }
  /// Hash of the weight bits; two samples with equal fingerprints hold the same weights.
  std::uint64_t fingerprint() const { return fingerprint_; }

  const Matrix& weights() const { return weights_; }
  auto weight(std::size_t k) const { return weights_.col(static_cast<Eigen::Index>(k)); }
  auto check(std::size_t k) const {
    return weights_.col(static_cast<Eigen::Index>(k)).head(weights_.rows() - 1);
  }
  double bias(std::size_t k) const {
    return weights_(weights_.rows() - 1, static_cast<Eigen::Index>(k));
  }

 private:
  Matrix weights_;
  std::uint64_t seed_;
  std::uint64_t fingerprint_;
};

using FeatureSampleRef = std::shared_ptr<const FeatureSample>;

/// Draws K i.i.d. N(0, I_{d+1}) weights from a 64-bit Mersenne Twister seeded with `seed`.
FeatureSample sample_features(std::size_t d, std::size_t count, std::uint64_t seed);
FeatureSampleRef share(FeatureSample fs);

struct Analytic {};
struct MonteCarlo {
  FeatureSampleRef features;
};
using KernelMode = std::variant<Analytic, MonteCarlo>;

struct KernelEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 in Analytic mode
};

/// 1 iff <w, p> >= 0 (ties count as active).
int indicator(const Vector& w, const AugmentedPoint& p);

/// 1 iff <w, -v̂> >= 0 with v̂ = [v | 0]: the shift-limit of indicator().
int limit_indicator(const Vector& w, const Direction& v);

/// K blocks of length d+2, block k = (p, <w_k, p>) when feature k is active
/// at p and zero otherwise.
Vector feature_map(const AugmentedPoint& p, const FeatureSample& fs);

/// (1/K) Σ_k <block_k(a), block_k(b)> over two feature maps of the same sample.
double feature_inner(const Vector& a, const Vector& b, const FeatureSample& fs);

KernelEstimate ntk(const AugmentedPoint& x, const AugmentedPoint& y, const KernelMode& mode);

/// Closed form: with θ the angle between x and y,
///   (x·y)(π−θ)/(2π) + ‖x‖‖y‖((π−θ)cosθ + sinθ)/(2π).
double ntk_analytic(const Vector& x, const Vector& y);

/// ∫ (‖v̂‖² + <w,v̂>²) 1(<w,−v̂> >= 0) dP(w); equals ‖v‖² in closed form.
KernelEstimate kappa(const Direction& v, const KernelMode& mode);

/// Fraction of (point, feature) pairs whose indicator at x̂_i^∞ differs from
/// the shift-limit indicator of the training direction.
double agnosticism_rate(const ShiftedTrainingSet& ts, const FeatureSample& fs);

}  // namespace ntkx
