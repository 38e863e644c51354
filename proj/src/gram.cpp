#include "ntkx/gram.hpp"

#include "ntkx/errors.hpp"
#include "ntkx/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

namespace ntkx {
namespace {

void require_delta(double delta, const char* what) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw InvalidRegularization(std::string(what) + ": delta must be positive and finite");
  }
}

// Residual Y − (K + δI)α accumulated in extended precision.
Vector residual(const Matrix& k, double delta, const Vector& alpha, const Vector& y) {
  const Eigen::Index n = k.rows();
  Vector r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    long double s = y[i];
    for (Eigen::Index j = 0; j < n; ++j) {
      s -= static_cast<long double>(k(i, j)) * static_cast<long double>(alpha[j]);
    }
    s -= static_cast<long double>(delta) * static_cast<long double>(alpha[i]);
    r[i] = static_cast<double>(s);
  }
  return r;
}

}  // namespace

double TikhonovConfig::effective_delta(const GramMatrix& k) const {
  require_delta(delta, "TikhonovConfig");
  if (mode == Mode::Absolute) return delta;
  const double scale = k.mean_diagonal();
  const double d = delta * scale;
  require_delta(d, "TikhonovConfig (relative to a zero diagonal)");
  return d;
}

GramMatrix assemble_gram(const ShiftedTrainingSet& ts, const KernelMode& mode) {
  const std::size_t n = ts.size();
  if (n == 0) throw InvalidInput("assemble_gram: empty training set");
  const auto points = ts.augmented_points();

  GramMatrix g;
  g.entries = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (const auto* mc = std::get_if<MonteCarlo>(&mode)) {
    g.kind = GramKind::MonteCarlo;
    g.features = FeatureTag::of(*mc->features);
  }

  // Upper triangle, then mirror. Monte Carlo entries parallelize internally.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = ntk(points[i], points[j], mode).value;
      if (!std::isfinite(v)) throw InvalidInput("assemble_gram: non-finite kernel entry");
      g.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      g.entries(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return g;
}

GramMatrix asymptotic_gram(std::size_t n, double kappa, double t) {
  if (n == 0) throw InvalidInput("asymptotic_gram: n must be at least 1");
  if (kappa < 0.0 || t < 0.0) throw InvalidInput("asymptotic_gram: kappa and t must be >= 0");
  GramMatrix g;
  g.kind = GramKind::Asymptotic;
  g.entries = Matrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n),
                               kappa * t * t);
  g.degenerate = kappa * t * t == 0.0;
  return g;
}

Matrix sherman_morrison_inverse(std::size_t n, double kappa, double t, double delta) {
  require_delta(delta, "sherman_morrison_inverse");
  if (kappa < 0.0 || t < 0.0) throw InvalidInput("sherman_morrison_inverse: kappa, t must be >= 0");
  const double nn = static_cast<double>(n);
  const double off = -(t * t * kappa) / (delta * (nn * kappa * t * t + delta));
  Matrix m = Matrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), off);
  m.diagonal().array() += 1.0 / delta;
  return m;
}

AlphaVector tikhonov_solve(const GramMatrix& k, const TikhonovConfig& cfg, const Vector& y) {
  if (static_cast<std::size_t>(y.size()) != k.size()) {
    throw DimensionError("tikhonov_solve: label count does not match the gram");
  }
  if (!y.allFinite()) throw InvalidInput("tikhonov_solve: non-finite labels");
  const double delta = cfg.effective_delta(k);

  Matrix a = k.entries;
  a.diagonal().array() += delta;
  const Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    const double cond = (k.entries.diagonal().maxCoeff() * static_cast<double>(k.size()) + delta) / delta;
    throw NumericalFailure("tikhonov_solve: Cholesky factorization failed", cond);
  }

  Vector alpha = llt.solve(y);
  // Two rounds of refinement recover most of what the 1/δ conditioning costs.
  for (int round = 0; round < 2; ++round) alpha += llt.solve(residual(k.entries, delta, alpha, y));

  AlphaVector out;
  out.values = std::move(alpha);
  out.delta = delta;
  out.residual = residual(k.entries, delta, out.values, y).norm();
  out.features = k.features;
  if (!out.values.allFinite()) {
    throw NumericalFailure("tikhonov_solve: non-finite solution", std::numeric_limits<double>::infinity());
  }
  return out;
}

AlphaVector asymptotic_alpha(const Vector& y, std::size_t n, double kappa, double t, double delta) {
  require_delta(delta, "asymptotic_alpha");
  if (static_cast<std::size_t>(y.size()) != n) throw DimensionError("asymptotic_alpha: |Y| != n");
  const double nn = static_cast<double>(n);
  const double c = -(t * t * kappa) / (delta * (nn * kappa * t * t + delta));
  const double sum = y.sum();
  AlphaVector out;
  out.values = (c * sum + y.array() / delta).matrix();
  out.delta = delta;
  return out;
}

void write_matrix_csv(std::ostream& os, const Matrix& m) {
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j) os << ',';
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace ntkx
