#pragma once

// Input-space types: points, bias-augmented points, directions, realizations,
// target functions and origin-shifted training sets.

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <variant>
#include <vector>

namespace ntkx {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point of the d-dimensional input space.
class Point {
 public:
  explicit Point(Vector coords);
  Point(std::initializer_list<double> coords);

  std::size_t dim() const { return static_cast<std::size_t>(coords_.size()); }
  const Vector& coords() const { return coords_; }
  double operator[](std::size_t i) const { return coords_[static_cast<Eigen::Index>(i)]; }

  friend bool operator==(const Point& a, const Point& b) { return a.coords_ == b.coords_; }

 private:
  Vector coords_;
};

/// A point with the bias coordinate appended, x̂ = [x | 1].
class AugmentedPoint {
 public:
  explicit AugmentedPoint(const Point& p);

  /// Wraps an already augmented vector; the last entry must be exactly 1.
  static AugmentedPoint from_augmented(Vector coords);

  std::size_t dim() const { return static_cast<std::size_t>(coords_.size()); }
  const Vector& coords() const { return coords_; }
  Point drop_bias() const;

 private:
  AugmentedPoint() = default;
  Vector coords_;
};

/// A nonzero direction in input space. Never normalized implicitly: kappa and
/// profile scales depend on its length.
class Direction {
 public:
  explicit Direction(Vector coords);
  Direction(std::initializer_list<double> coords);

  std::size_t dim() const { return static_cast<std::size_t>(coords_.size()); }
  const Vector& coords() const { return coords_; }
  double norm() const { return coords_.norm(); }
  Direction normalized() const { return Direction(coords_ / coords_.norm()); }

 private:
  Vector coords_;
};

/// The training inputs before shifting.
class Realization {
 public:
  explicit Realization(std::vector<Point> points);

  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return points_.front().dim(); }
  const std::vector<Point>& points() const { return points_; }
  const Point& operator[](std::size_t i) const { return points_[i]; }

 private:
  std::vector<Point> points_;
};

struct LinearTarget {
  Vector a;
  double b = 0.0;
};

struct QuadraticTarget {
  Matrix q;
  Vector a;
  double b = 0.0;
};

/// g(x) = sin(<u, x> + phase).
struct SinusoidalTarget {
  Vector u;
  double phase = 0.0;
};

class TargetFunction {
 public:
  using Kind = std::variant<LinearTarget, QuadraticTarget, SinusoidalTarget>;

  explicit TargetFunction(Kind kind);

  static TargetFunction linear(Vector a, double b);
  static TargetFunction quadratic(Matrix q, Vector a, double b);
  static TargetFunction sinusoidal(Vector u, double phase);
  /// g ≡ c, expressed as a linear target with zero slope.
  static TargetFunction constant(std::size_t dim, double c);

  std::size_t dim() const { return dim_; }
  const Kind& kind() const { return kind_; }
  double operator()(const Point& x) const;

 private:
  Kind kind_;
  std::size_t dim_;
};

/// φ translated by −t·v_φ together with the labels g(x_i − t·v_φ).
struct ShiftedTrainingSet {
  Realization realization;
  Direction direction;
  double t = 0.0;
  std::vector<Point> points;
  Vector labels;

  std::size_t size() const { return points.size(); }
  std::size_t dim() const { return realization.dim(); }
  AugmentedPoint augmented(std::size_t i) const { return AugmentedPoint(points[i]); }
  std::vector<AugmentedPoint> augmented_points() const;
};

AugmentedPoint augment(const Point& p);

/// [v | 0]: directions carry a zero bias coordinate.
Vector augment_direction(const Direction& v);

ShiftedTrainingSet shift_set(const Realization& phi, const Direction& v, double t,
                             const TargetFunction& g);

}  // namespace ntkx
