#include "ntkx/regression.hpp"

#include "ntkx/errors.hpp"
#include "ntkx/parallel.hpp"

#include <cmath>
#include <string>

namespace ntkx {
namespace {

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw InvalidInput(std::string(what) + " must be positive");
}

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

ExtendedReal dot_extended(const std::vector<ExtendedReal>& b, const Vector& w) {
  ExtendedReal s = 0;
  for (std::size_t j = 0; j < b.size(); ++j) {
    s += b[j] * static_cast<ExtendedReal>(w[static_cast<Eigen::Index>(j)]);
  }
  return s;
}

ExtendedReal closed_form_beta2_extended(const ClosedFormContext& ctx, const Vector& w,
                                        const Direction& v) {
  if (limit_indicator(w, v) == 0) return 0;
  return dot_extended(ctx.combined, w);
}

Vector combined_vector(const ClosedFormContext& ctx) {
  Vector out(static_cast<Eigen::Index>(ctx.combined.size()));
  for (std::size_t j = 0; j < ctx.combined.size(); ++j) {
    out[static_cast<Eigen::Index>(j)] = static_cast<double>(ctx.combined[j]);
  }
  return out;
}

// Central difference in w_{d+1}; the effective step is the exact distance
// between the two perturbed weights.
template <typename F>
auto bias_difference(const Vector& w, double step, F&& f) {
  const Eigen::Index bias = w.size() - 1;
  Vector hi = w;
  Vector lo = w;
  hi[bias] += step;
  lo[bias] -= step;
  const double h = hi[bias] - lo[bias];
  using R = decltype(f(w));
  const R up = f(hi);
  const R down = f(lo);
  return std::make_pair(R(up - down), h);
}

void require_off_boundary(const Vector& w, const Direction& v, double step) {
  if (!(step > 0.0)) throw InvalidInput("bias sensitivity: step must be positive");
  if (static_cast<std::size_t>(w.size()) != v.dim() + 1) {
    throw DimensionError("bias sensitivity: weight must have length d+1");
  }
  const double margin = std::abs(dot(Vector(w.head(w.size() - 1)), v.coords()));
  if (margin < 10.0 * step * v.norm()) {
    throw BoundaryTooClose("bias sensitivity: |<w, -v>| = " + std::to_string(margin) +
                           " is inside the 10*step*|v| guard band");
  }
}

}  // namespace

ClosedFormContext make_closed_form_context(const Realization& phi, const Direction& v, double t,
                                           double delta, double kappa, const TargetFunction& g) {
  require_positive(t, "closed form: t");
  require_positive(delta, "closed form: delta");
  require_positive(kappa, "closed form: kappa");
  const ShiftedTrainingSet ts = shift_set(phi, v, t, g);

  ClosedFormContext ctx;
  ctx.n = ts.size();
  ctx.t = t;
  ctx.delta = delta;
  ctx.kappa = kappa;
  using X = ExtendedReal;
  const X n = static_cast<X>(ctx.n);
  const X tt = static_cast<X>(t);
  const X kt2 = static_cast<X>(kappa) * tt * tt;
  const X dd = static_cast<X>(delta);
  const X c = -kt2 / (dd * (n * kt2 + dd));
  ctx.c = static_cast<double>(c);

  const Eigen::Index m = static_cast<Eigen::Index>(ts.dim() + 1);
  std::vector<X> sum_points(static_cast<std::size_t>(m), X(0));
  std::vector<X> sum_weighted(static_cast<std::size_t>(m), X(0));
  X g_sum = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Vector x = ts.augmented(i).coords();
    const X gi = static_cast<X>(ts.labels[static_cast<Eigen::Index>(i)]);
    g_sum += gi;
    for (Eigen::Index j = 0; j < m; ++j) {
      sum_points[static_cast<std::size_t>(j)] += static_cast<X>(x[j]);
      sum_weighted[static_cast<std::size_t>(j)] += static_cast<X>(x[j]) * gi;
    }
  }
  ctx.g_sum = static_cast<double>(g_sum);
  ctx.sum_points.resize(m);
  ctx.sum_weighted.resize(m);
  ctx.combined.resize(static_cast<std::size_t>(m));
  for (std::size_t j = 0; j < static_cast<std::size_t>(m); ++j) {
    ctx.sum_points[static_cast<Eigen::Index>(j)] = static_cast<double>(sum_points[j]);
    ctx.sum_weighted[static_cast<Eigen::Index>(j)] = static_cast<double>(sum_weighted[j]);
    ctx.combined[j] = c * g_sum * sum_points[j] + sum_weighted[j] / dd;
  }
  return ctx;
}

Vector closed_form_beta1(const ClosedFormContext& ctx, const Vector& w, const Direction& v) {
  if (limit_indicator(w, v) == 0) return Vector::Zero(static_cast<Eigen::Index>(ctx.combined.size()));
  return combined_vector(ctx);
}

double closed_form_beta2(const ClosedFormContext& ctx, const Vector& w, const Direction& v) {
  return static_cast<double>(closed_form_beta2_extended(ctx, w, v));
}

BetaComponents beta_from_alpha(const ShiftedTrainingSet& ts, const AlphaVector& alpha,
                               FeatureSampleRef fs) {
  if (alpha.features && !(*alpha.features == FeatureTag::of(*fs))) {
    throw FeatureMismatch("beta_from_alpha: alpha was solved on a different feature sample");
  }
  if (static_cast<std::size_t>(alpha.values.size()) != ts.size()) {
    throw DimensionError("beta_from_alpha: alpha length differs from the training set");
  }
  if (fs->input_dim() != ts.dim()) throw DimensionError("beta_from_alpha: sample dimension");

  const auto points = ts.augmented_points();
  const Eigen::Index m = static_cast<Eigen::Index>(ts.dim() + 1);
  BetaComponents out;
  out.beta1 = Matrix::Zero(m, static_cast<Eigen::Index>(fs->count()));
  out.beta2 = Vector::Zero(static_cast<Eigen::Index>(fs->count()));
  out.features = fs;
  parallel::parallel_for(fs->count(), [&](std::size_t k) {
    const Vector w = fs->weight(k);
    const auto col = static_cast<Eigen::Index>(k);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const Vector& x = points[i].coords();
      const double wx = dot(w, x);
      if (wx < 0.0) continue;
      const double a = alpha.values[static_cast<Eigen::Index>(i)];
      out.beta1.col(col) += a * x;
      out.beta2[col] += a * wx;
    }
  });
  return out;
}

BetaComponents beta_closed_form(const Realization& phi, const Direction& v, double t, double delta,
                                double kappa, const TargetFunction& g, FeatureSampleRef fs) {
  if (fs->input_dim() != phi.dim()) throw DimensionError("beta_closed_form: sample dimension");
  const ClosedFormContext ctx = make_closed_form_context(phi, v, t, delta, kappa, g);
  const Vector b1 = combined_vector(ctx);
  BetaComponents out;
  out.beta1 = Matrix::Zero(b1.size(), static_cast<Eigen::Index>(fs->count()));
  out.beta2 = Vector::Zero(static_cast<Eigen::Index>(fs->count()));
  out.features = fs;
  for (std::size_t k = 0; k < fs->count(); ++k) {
    const Vector w = fs->weight(k);
    if (limit_indicator(w, v) == 0) continue;
    out.beta1.col(static_cast<Eigen::Index>(k)) = b1;
    out.beta2[static_cast<Eigen::Index>(k)] = closed_form_beta2(ctx, w, v);
  }
  return out;
}

Predictor::Predictor(Variant v) : v_(std::move(v)) {
  if (const auto* pw = std::get_if<PointWise>(&v_)) {
    if (pw->train.empty()) throw InvalidInput("Predictor: empty training set");
    if (static_cast<std::size_t>(pw->alpha.size()) != pw->train.size()) {
      throw DimensionError("Predictor: alpha length differs from the training set");
    }
    dim_ = pw->train.front().dim() - 1;
  } else {
    const auto& fsp = std::get<FeatureSpace>(v_);
    if (!fsp.beta.features) throw InvalidInput("Predictor: beta without a feature sample");
    dim_ = fsp.beta.features->input_dim();
  }
}

Predictor fit_point_wise(const ShiftedTrainingSet& ts, const KernelMode& mode,
                         const TikhonovConfig& cfg) {
  const GramMatrix k = assemble_gram(ts, mode);
  const AlphaVector alpha = tikhonov_solve(k, cfg, ts.labels);
  return Predictor(PointWise{ts.augmented_points(), alpha.values, mode});
}

double predict(const Predictor& pred, const Point& x) {
  if (x.dim() != pred.input_dim()) throw DimensionError("predict: input dimension mismatch");
  const AugmentedPoint xh(x);

  if (const auto* pw = std::get_if<PointWise>(&pred.variant())) {
    double s = 0.0;
    for (std::size_t i = 0; i < pw->train.size(); ++i) {
      s += pw->alpha[static_cast<Eigen::Index>(i)] * ntk(xh, pw->train[i], pw->mode).value;
    }
    return s;
  }

  const BetaComponents& beta = std::get<FeatureSpace>(pred.variant()).beta;
  const FeatureSample& fs = *beta.features;
  std::vector<double> terms(fs.count(), 0.0);
  parallel::parallel_for(fs.count(), [&](std::size_t k) {
    const Vector w = fs.weight(k);
    const double wx = dot(w, xh.coords());
    if (wx < 0.0) return;
    const auto col = static_cast<Eigen::Index>(k);
    terms[k] = dot(beta.beta1.col(col), xh.coords()) + beta.beta2[col] * wx;
  });
  return parallel::deterministic_sum(terms) / static_cast<double>(fs.count());
}

double default_bias_step(const Vector& w) { return 1e-4 * (1.0 + std::abs(w[w.size() - 1])); }

double beta_bias_sensitivity(const ClosedFormContext& ctx, const Vector& w, const Direction& v,
                             double step) {
  require_off_boundary(w, v, step);
  const auto [diff, h] = bias_difference(
      w, step, [&](const Vector& p) { return closed_form_beta2_extended(ctx, p, v); });
  return static_cast<double>(diff / static_cast<ExtendedReal>(h));
}

double beta1_bias_sensitivity(const ClosedFormContext& ctx, const Vector& w, const Direction& v,
                              double step) {
  require_off_boundary(w, v, step);
  const auto [diff, h] = bias_difference(
      w, step, [&](const Vector& p) { return closed_form_beta1(ctx, p, v); });
  return (diff / h).cwiseAbs().maxCoeff();
}

}  // namespace ntkx
