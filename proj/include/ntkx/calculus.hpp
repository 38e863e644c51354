#pragma once

// Forward-difference directional derivatives built on sign-alternating Pascal
// coefficients, the algebraic identities those coefficients satisfy, and the
// polynomial profile fits used to read off the extrapolation degree of a
// predictor along a ray.

#include "ntkx/geometry.hpp"

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace ntkx {

using ScalarField = std::function<double(const Point&)>;

/// Row z of the signed Pascal triangle, ordered [P_z, P_{z-1}, ..., P_0] so
/// that coeffs[0] multiplies the farthest stencil point x_z.
/// P_i^{(z)} = (-1)^{z-i} C(z, i).
struct PascalCoefficients {
  int z = 0;
  std::vector<std::int64_t> coeffs;

  /// P_i^{(z)} for i in [0, z].
  std::int64_t at(int i) const { return coeffs[static_cast<std::size_t>(z - i)]; }
};

/// Valid for 0 <= z <= 62 (the largest row that fits in int64).
PascalCoefficients pascal_coefficients(int z);

/// Checks P_i^{(z)}·(z−i) = −z·P_i^{(z−1)} for i = 0..z−1 in exact integers.
/// The two sides always agree in magnitude; adjacent rows alternate in sign,
/// hence the minus.
bool pascal_shift_identity(int z);

/// Magnitude-only form |P_i^{(z)}|·(z−i) = z·|P_i^{(z−1)}|.
bool pascal_shift_magnitude_identity(int z);

/// Builds x̂_j = x̂_0 + j·h·[v|0] and compares
///   Σ_j P_j^{(z)} x̂_j 1_j
/// with the regrouped form
///   x̂_z·Σ_j P_j^{(z)} 1_j + z·h·[v|0]·Σ_{j<z} P_j^{(z−1)} 1_j.
/// Returns the max-abs difference between the two vectors.
double sigma_identity_check(const AugmentedPoint& x0, const Direction& v, double h,
                            const std::vector<bool>& indicators, int z);

struct DerivativeEstimate {
  int order = 0;
  double step = 0.0;
  double value = 0.0;
  int stencil_points = 0;
};

/// Step h_z = ε^{1/(z+1)}·(1 + ‖x0‖).
double default_step(int z, const Point& x0);

/// Σ_i P_i^{(z)} f(x0 + i·h·v) / h^z on the forward stencil x_0..x_z.
DerivativeEstimate directional_derivative(const ScalarField& f, const Point& x0,
                                          const Direction& v, int z, double h);

struct ExtrapolationProfile {
  Point base;
  Direction direction;
  double radius = 0.0;
  std::vector<double> offsets;
  std::vector<double> values;
  std::vector<double> coefficients;  // c_0..c_degmax in the offset s
  double residual = 0.0;             // RMS
};

/// Least-squares polynomial of degree `degmax` through f(base + s·v) at m
/// equispaced s in [−radius, radius].
ExtrapolationProfile fit_profile(const ScalarField& f, const Point& base, const Direction& v,
                                 double radius, int m, int degmax);

/// Fit from already sampled values (offsets must be those fit_profile would use).
ExtrapolationProfile fit_profile_values(const Point& base, const Direction& v, double radius,
                                        std::vector<double> values, int degmax);

enum class Degree { Constant, Linear, Quadratic, Higher };

std::string_view to_string(Degree d);

struct DegreeClass {
  Degree degree = Degree::Constant;
  double ratio32 = 0.0;  // |c_3| / max(|c_2|, floor)
  double ratio42 = 0.0;  // |c_4| / max(|c_2|, floor)
};

/// The class is the highest j with |c_j|·radius^j > tol·max_i(|c_i|·radius^i, floor).
DegreeClass classify(const ExtrapolationProfile& profile, double tol, double floor);

}  // namespace ntkx
