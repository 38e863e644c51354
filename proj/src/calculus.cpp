#include "ntkx/calculus.hpp"

#include "ntkx/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ntkx {
namespace {

std::int64_t binomial(int n, int k) {
  // Multiplicative form stays exact: each partial product is itself a binomial.
  __int128 r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<std::int64_t>(r);
}

void require_order(int z, int lo, const char* what) {
  if (z < lo || z > 62) {
    throw InvalidInput(std::string(what) + ": order " + std::to_string(z) + " out of range");
  }
}

}  // namespace

PascalCoefficients pascal_coefficients(int z) {
  require_order(z, 0, "pascal_coefficients");
  PascalCoefficients p;
  p.z = z;
  p.coeffs.resize(static_cast<std::size_t>(z) + 1);
  for (int j = 0; j <= z; ++j) {
    p.coeffs[static_cast<std::size_t>(j)] = (j % 2 == 0 ? 1 : -1) * binomial(z, j);
  }
  return p;
}

bool pascal_shift_identity(int z) {
  require_order(z, 1, "pascal_shift_identity");
  const auto row = pascal_coefficients(z);
  const auto prev = pascal_coefficients(z - 1);
  for (int i = 0; i < z; ++i) {
    if (row.at(i) * (z - i) != -static_cast<std::int64_t>(z) * prev.at(i)) return false;
  }
  return true;
}

bool pascal_shift_magnitude_identity(int z) {
  require_order(z, 1, "pascal_shift_magnitude_identity");
  const auto row = pascal_coefficients(z);
  const auto prev = pascal_coefficients(z - 1);
  for (int i = 0; i < z; ++i) {
    if (std::abs(row.at(i)) * (z - i) != static_cast<std::int64_t>(z) * std::abs(prev.at(i))) {
      return false;
    }
  }
  return true;
}

double sigma_identity_check(const AugmentedPoint& x0, const Direction& v, double h,
                            const std::vector<bool>& indicators, int z) {
  require_order(z, 1, "sigma_identity_check");
  if (h == 0.0) throw InvalidInput("sigma_identity_check: h must be nonzero");
  if (indicators.size() != static_cast<std::size_t>(z) + 1) {
    throw DimensionError("sigma_identity_check: need z+1 indicators");
  }
  if (x0.dim() != v.dim() + 1) throw DimensionError("sigma_identity_check: dimension mismatch");

  const Vector vh = augment_direction(v);
  const auto row = pascal_coefficients(z);
  const auto prev = pascal_coefficients(z - 1);
  auto point = [&](int j) -> Vector { return x0.coords() + (j * h) * vh; };
  auto ind = [&](int j) { return indicators[static_cast<std::size_t>(j)] ? 1.0 : 0.0; };

  Vector direct = Vector::Zero(vh.size());
  double sigma_z = 0.0;
  for (int j = 0; j <= z; ++j) {
    direct += static_cast<double>(row.at(j)) * ind(j) * point(j);
    sigma_z += static_cast<double>(row.at(j)) * ind(j);
  }
  double sigma_prev = 0.0;
  for (int j = 0; j < z; ++j) sigma_prev += static_cast<double>(prev.at(j)) * ind(j);

  const Vector regrouped = point(z) * sigma_z + (z * h * sigma_prev) * vh;
  return (direct - regrouped).cwiseAbs().maxCoeff();
}

double default_step(int z, const Point& x0) {
  const double eps = std::numeric_limits<double>::epsilon();
  return std::pow(eps, 1.0 / (z + 1)) * (1.0 + x0.coords().norm());
}

DerivativeEstimate directional_derivative(const ScalarField& f, const Point& x0,
                                          const Direction& v, int z, double h) {
  require_order(z, 1, "directional_derivative");
  if (!(h > 0.0)) throw InvalidInput("directional_derivative: h must be positive");
  if (x0.dim() != v.dim()) throw DimensionError("directional_derivative: dimension mismatch");

  const auto row = pascal_coefficients(z);
  double acc = 0.0;
  for (int i = 0; i <= z; ++i) {
    const double fi = f(Point(Vector(x0.coords() + (i * h) * v.coords())));
    if (std::isnan(fi)) {
      throw EvaluationError("directional_derivative: f returned NaN at stencil point " +
                            std::to_string(i));
    }
    acc += static_cast<double>(row.at(i)) * fi;
  }
  return {z, h, acc / std::pow(h, z), z + 1};
}

ExtrapolationProfile fit_profile(const ScalarField& f, const Point& base, const Direction& v,
                                 double radius, int m, int degmax) {
  if (!(radius > 0.0)) throw InvalidInput("fit_profile: radius must be positive");
  if (degmax < 2 || m < degmax + 3) throw InvalidInput("fit_profile: need degmax >= 2, m >= degmax+3");
  if (base.dim() != v.dim()) throw DimensionError("fit_profile: dimension mismatch");

  std::vector<double> values(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const double s = -radius + 2.0 * radius * k / (m - 1);
    values[static_cast<std::size_t>(k)] = f(Point(Vector(base.coords() + s * v.coords())));
    if (!std::isfinite(values[static_cast<std::size_t>(k)])) {
      throw EvaluationError("fit_profile: non-finite value at offset " + std::to_string(s));
    }
  }
  return fit_profile_values(base, v, radius, std::move(values), degmax);
}

ExtrapolationProfile fit_profile_values(const Point& base, const Direction& v, double radius,
                                        std::vector<double> values, int degmax) {
  const int m = static_cast<int>(values.size());
  if (!(radius > 0.0)) throw InvalidInput("fit_profile: radius must be positive");
  if (degmax < 2 || m < degmax + 3) throw InvalidInput("fit_profile: need degmax >= 2, m >= degmax+3");

  std::vector<double> offsets(static_cast<std::size_t>(m));
  // Vandermonde in the scaled offset u = s/radius ∈ [−1, 1] keeps the fit well
  // conditioned; coefficients are mapped back to s afterwards.
  Matrix a(m, degmax + 1);
  Vector y(m);
  for (int k = 0; k < m; ++k) {
    const double u = -1.0 + 2.0 * k / (m - 1);
    offsets[static_cast<std::size_t>(k)] = radius * u;
    double p = 1.0;
    for (int j = 0; j <= degmax; ++j) {
      a(k, j) = p;
      p *= u;
    }
    y[k] = values[static_cast<std::size_t>(k)];
  }
  const Eigen::ColPivHouseholderQR<Matrix> qr(a);
  if (qr.rank() < degmax + 1) throw FitFailure("fit_profile: rank-deficient design matrix");
  const Vector scaled = qr.solve(y);

  ExtrapolationProfile out{base, v, radius, std::move(offsets), std::move(values), {}, 0.0};
  out.coefficients.resize(static_cast<std::size_t>(degmax) + 1);
  for (int j = 0; j <= degmax; ++j) {
    out.coefficients[static_cast<std::size_t>(j)] = scaled[j] / std::pow(radius, j);
  }
  out.residual = std::sqrt((a * scaled - y).squaredNorm() / m);
  return out;
}

std::string_view to_string(Degree d) {
  switch (d) {
    case Degree::Constant: return "constant";
    case Degree::Linear: return "linear";
    case Degree::Quadratic: return "quadratic";
    case Degree::Higher: return "higher";
  }
  return "unknown";
}

DegreeClass classify(const ExtrapolationProfile& profile, double tol, double floor) {
  const auto& c = profile.coefficients;
  std::vector<double> scaled(c.size());
  double ref = floor;
  for (std::size_t j = 0; j < c.size(); ++j) {
    scaled[j] = std::abs(c[j]) * std::pow(profile.radius, static_cast<double>(j));
    ref = std::max(ref, scaled[j]);
  }
  int highest = 0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (scaled[j] > tol * ref) highest = static_cast<int>(j);
  }

  DegreeClass out;
  out.degree = highest >= 3 ? Degree::Higher : static_cast<Degree>(highest);
  const double c2 = c.size() > 2 ? std::max(std::abs(c[2]), floor) : floor;
  out.ratio32 = c.size() > 3 ? std::abs(c[3]) / c2 : 0.0;
  out.ratio42 = c.size() > 4 ? std::abs(c[4]) / c2 : 0.0;
  return out;
}

}  // namespace ntkx
