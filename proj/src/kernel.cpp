#include "ntkx/kernel.hpp"

#include "ntkx/errors.hpp"
#include "ntkx/parallel.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace ntkx {
namespace {

// Plain left-to-right dot product. Used everywhere a Monte Carlo term is
// formed so that ntk() and feature_inner() round identically.
inline double seq_dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += a[j] * b[j];
  return s;
}

std::uint64_t fnv1a(const Matrix& m) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  mix(&rows, sizeof rows);
  mix(&cols, sizeof cols);
  mix(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
  return h;
}

void require_sample_dim(const FeatureSample& fs, std::size_t augmented_dim, const char* what) {
  if (fs.input_dim() + 1 != augmented_dim) {
    throw DimensionError(std::string(what) + ": feature sample has input dimension " +
                         std::to_string(fs.input_dim()) + ", point has augmented dimension " +
                         std::to_string(augmented_dim));
  }
}

// Mean and standard error of per-feature terms, both via fixed-schedule sums.
KernelEstimate summarize(const std::vector<double>& terms) {
  const auto k = static_cast<double>(terms.size());
  const double mean = parallel::deterministic_sum(terms) / k;
  if (terms.size() < 2) return {mean, 0.0};
  std::vector<double> sq(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double r = terms[i] - mean;
    sq[i] = r * r;
  }
  const double var = parallel::deterministic_sum(sq) / (k - 1.0);
  return {mean, std::sqrt(var / k)};
}

// Evaluates term(k) for every feature, in parallel over fixed chunks.
template <typename Term>
std::vector<double> per_feature(std::size_t count, Term&& term) {
  std::vector<double> out(count);
  const std::size_t chunks = (count + parallel::kChunk - 1) / parallel::kChunk;
  parallel::parallel_for(chunks, [&](std::size_t c) {
    const std::size_t lo = c * parallel::kChunk;
    const std::size_t hi = std::min(count, lo + parallel::kChunk);
    for (std::size_t k = lo; k < hi; ++k) out[k] = term(k);
  });
  return out;
}

}  // namespace

FeatureSample::FeatureSample(Matrix weights, std::uint64_t seed)
    : weights_(std::move(weights)), seed_(seed) {
  if (weights_.rows() < 2) throw DimensionError("FeatureSample: weights need d+1 >= 2 rows");
  if (weights_.cols() < 1) throw InvalidInput("FeatureSample: need at least one feature");
  if (!weights_.allFinite()) throw InvalidInput("FeatureSample: non-finite weight");
  fingerprint_ = fnv1a(weights_);
}

FeatureSample sample_features(std::size_t d, std::size_t count, std::uint64_t seed) {
  if (d < 1) throw DimensionError("sample_features: d must be at least 1");
  if (count < 1) throw InvalidInput("sample_features: K must be at least 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix w(static_cast<Eigen::Index>(d + 1), static_cast<Eigen::Index>(count));
  for (Eigen::Index k = 0; k < w.cols(); ++k) {
    for (Eigen::Index j = 0; j < w.rows(); ++j) w(j, k) = normal(rng);
  }
  return FeatureSample(std::move(w), seed);
}

FeatureSampleRef share(FeatureSample fs) {
  return std::make_shared<const FeatureSample>(std::move(fs));
}

int indicator(const Vector& w, const AugmentedPoint& p) {
  if (static_cast<std::size_t>(w.size()) != p.dim()) {
    throw DimensionError("indicator: weight and point lengths differ");
  }
  return seq_dot(w.data(), p.coords().data(), p.dim()) >= 0.0 ? 1 : 0;
}

int limit_indicator(const Vector& w, const Direction& v) {
  if (static_cast<std::size_t>(w.size()) != v.dim() + 1) {
    throw DimensionError("limit_indicator: weight must have length d+1");
  }
  // <w, -v̂> = -<w̌, v>; the bias entry of v̂ is zero.
  return -seq_dot(w.data(), v.coords().data(), v.dim()) >= 0.0 ? 1 : 0;
}

Vector feature_map(const AugmentedPoint& p, const FeatureSample& fs) {
  require_sample_dim(fs, p.dim(), "feature_map");
  const std::size_t n = p.dim();
  const std::size_t block = n + 1;
  Vector out = Vector::Zero(static_cast<Eigen::Index>(block * fs.count()));
  const double* x = p.coords().data();
  for (std::size_t k = 0; k < fs.count(); ++k) {
    const double wx = seq_dot(fs.weights().col(static_cast<Eigen::Index>(k)).data(), x, n);
    if (wx < 0.0) continue;
    double* b = out.data() + k * block;
    for (std::size_t j = 0; j < n; ++j) b[j] = x[j];
    b[n] = wx;
  }
  return out;
}

double feature_inner(const Vector& a, const Vector& b, const FeatureSample& fs) {
  const std::size_t block = fs.input_dim() + 2;
  if (static_cast<std::size_t>(a.size()) != block * fs.count() || a.size() != b.size()) {
    throw DimensionError("feature_inner: feature maps do not match the sample");
  }
  const auto terms = per_feature(fs.count(), [&](std::size_t k) {
    const double* pa = a.data() + k * block;
    const double* pb = b.data() + k * block;
    return seq_dot(pa, pb, block - 1) + pa[block - 1] * pb[block - 1];
  });
  return parallel::deterministic_sum(terms) / static_cast<double>(fs.count());
}

double ntk_analytic(const Vector& x, const Vector& y) {
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0) return 0.0;
  // Kahan's angle formula stays accurate for nearly parallel inputs, which is
  // exactly the regime of far-shifted training points.
  const Vector ux = x / nx;
  const Vector uy = y / ny;
  const double theta = 2.0 * std::atan2((ux - uy).norm(), (ux + uy).norm());
  const double pi = std::numbers::pi;
  const double dot = seq_dot(x.data(), y.data(), static_cast<std::size_t>(x.size()));
  return dot * (pi - theta) / (2.0 * pi) +
         nx * ny * ((pi - theta) * std::cos(theta) + std::sin(theta)) / (2.0 * pi);
}

KernelEstimate ntk(const AugmentedPoint& x, const AugmentedPoint& y, const KernelMode& mode) {
  if (x.dim() != y.dim()) throw DimensionError("ntk: points have different dimensions");

  if (std::holds_alternative<Analytic>(mode)) {
    return {ntk_analytic(x.coords(), y.coords()), 0.0};
  }

  const FeatureSample& fs = *std::get<MonteCarlo>(mode).features;
  require_sample_dim(fs, x.dim(), "ntk");
  const std::size_t n = x.dim();
  const double* px = x.coords().data();
  const double* py = y.coords().data();
  const double xy = seq_dot(px, py, n);
  const auto terms = per_feature(fs.count(), [&](std::size_t k) {
    const double* w = fs.weights().col(static_cast<Eigen::Index>(k)).data();
    const double wx = seq_dot(w, px, n);
    const double wy = seq_dot(w, py, n);
    if (wx < 0.0 || wy < 0.0) return 0.0;
    // Same rounding as the block product in feature_inner.
    return xy + wx * wy;
  });
  return summarize(terms);
}

KernelEstimate kappa(const Direction& v, const KernelMode& mode) {
  const double vv = seq_dot(v.coords().data(), v.coords().data(), v.dim());
  if (std::holds_alternative<Analytic>(mode)) return {vv, 0.0};

  const FeatureSample& fs = *std::get<MonteCarlo>(mode).features;
  require_sample_dim(fs, v.dim() + 1, "kappa");
  const auto terms = per_feature(fs.count(), [&](std::size_t k) {
    const double* w = fs.weights().col(static_cast<Eigen::Index>(k)).data();
    const double wv = seq_dot(w, v.coords().data(), v.dim());
    return -wv >= 0.0 ? vv + wv * wv : 0.0;
  });
  return summarize(terms);
}

double agnosticism_rate(const ShiftedTrainingSet& ts, const FeatureSample& fs) {
  require_sample_dim(fs, ts.dim() + 1, "agnosticism_rate");
  const auto points = ts.augmented_points();
  const auto mismatches = per_feature(fs.count(), [&](std::size_t k) {
    const Vector w = fs.weight(k);
    const int limit = limit_indicator(w, ts.direction);
    double count = 0.0;
    for (const auto& p : points) count += indicator(w, p) != limit ? 1.0 : 0.0;
    return count;
  });
  const double total = parallel::deterministic_sum(mismatches);
  return total / (static_cast<double>(fs.count()) * static_cast<double>(points.size()));
}

}  // namespace ntkx
