#include "ntkx/geometry.hpp"

#include "ntkx/errors.hpp"

#include <cmath>
#include <string>

namespace ntkx {
namespace {

Vector from_list(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw InvalidInput(std::string(what) + " has non-finite coordinates");
}

void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(want) +
                         ", got " + std::to_string(got));
  }
}

}  // namespace

Point::Point(Vector coords) : coords_(std::move(coords)) {
  if (coords_.size() < 1) throw DimensionError("Point: dimension must be at least 1");
  require_finite(coords_, "Point");
}

Point::Point(std::initializer_list<double> coords) : Point(from_list(coords)) {}

AugmentedPoint::AugmentedPoint(const Point& p) : coords_(p.dim() + 1) {
  coords_.head(static_cast<Eigen::Index>(p.dim())) = p.coords();
  coords_[static_cast<Eigen::Index>(p.dim())] = 1.0;
}

AugmentedPoint AugmentedPoint::from_augmented(Vector coords) {
  if (coords.size() < 2) throw DimensionError("AugmentedPoint: need at least 2 coordinates");
  require_finite(coords, "AugmentedPoint");
  if (coords[coords.size() - 1] != 1.0) {
    throw InvalidInput("AugmentedPoint: bias coordinate must be exactly 1");
  }
  AugmentedPoint p;
  p.coords_ = std::move(coords);
  return p;
}

Point AugmentedPoint::drop_bias() const { return Point(Vector(coords_.head(coords_.size() - 1))); }

Direction::Direction(Vector coords) : coords_(std::move(coords)) {
  if (coords_.size() < 1) throw DimensionError("Direction: dimension must be at least 1");
  require_finite(coords_, "Direction");
  if (coords_.isZero(0.0)) throw DegenerateDirection("Direction: zero vector");
}

Direction::Direction(std::initializer_list<double> coords) : Direction(from_list(coords)) {}

Realization::Realization(std::vector<Point> points) : points_(std::move(points)) {
  if (points_.empty()) throw InvalidInput("Realization: need at least one point");
  for (const auto& p : points_) require_dim(p.dim(), points_.front().dim(), "Realization");
}

TargetFunction::TargetFunction(Kind kind) : kind_(std::move(kind)) {
  struct DimOf {
    std::size_t operator()(const LinearTarget& k) const {
      return static_cast<std::size_t>(k.a.size());
    }
    std::size_t operator()(const QuadraticTarget& k) const {
      if (k.q.rows() != k.a.size() || k.q.cols() != k.a.size()) {
        throw DimensionError("QuadraticTarget: Q must be d x d with d = len(a)");
      }
      return static_cast<std::size_t>(k.a.size());
    }
    std::size_t operator()(const SinusoidalTarget& k) const {
      return static_cast<std::size_t>(k.u.size());
    }
  };
  dim_ = std::visit(DimOf{}, kind_);
  if (dim_ < 1) throw DimensionError("TargetFunction: dimension must be at least 1");
}

TargetFunction TargetFunction::linear(Vector a, double b) {
  return TargetFunction(LinearTarget{std::move(a), b});
}

TargetFunction TargetFunction::quadratic(Matrix q, Vector a, double b) {
  return TargetFunction(QuadraticTarget{std::move(q), std::move(a), b});
}

TargetFunction TargetFunction::sinusoidal(Vector u, double phase) {
  return TargetFunction(SinusoidalTarget{std::move(u), phase});
}

TargetFunction TargetFunction::constant(std::size_t dim, double c) {
  return linear(Vector::Zero(static_cast<Eigen::Index>(dim)), c);
}

double TargetFunction::operator()(const Point& x) const {
  require_dim(x.dim(), dim_, "TargetFunction");
  struct Eval {
    const Vector& x;
    double operator()(const LinearTarget& k) const { return k.a.dot(x) + k.b; }
    double operator()(const QuadraticTarget& k) const { return x.dot(k.q * x) + k.a.dot(x) + k.b; }
    double operator()(const SinusoidalTarget& k) const { return std::sin(k.u.dot(x) + k.phase); }
  };
  return std::visit(Eval{x.coords()}, kind_);
}

std::vector<AugmentedPoint> ShiftedTrainingSet::augmented_points() const {
  std::vector<AugmentedPoint> out;
  out.reserve(points.size());
  for (const auto& p : points) out.emplace_back(p);
  return out;
}

AugmentedPoint augment(const Point& p) { return AugmentedPoint(p); }

Vector augment_direction(const Direction& v) {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(v.dim() + 1));
  out.head(static_cast<Eigen::Index>(v.dim())) = v.coords();
  return out;
}

ShiftedTrainingSet shift_set(const Realization& phi, const Direction& v, double t,
                             const TargetFunction& g) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidInput("shift_set: t must be finite and >= 0");
  require_dim(v.dim(), phi.dim(), "shift_set direction");
  require_dim(g.dim(), phi.dim(), "shift_set target");

  std::vector<Point> shifted;
  shifted.reserve(phi.size());
  Vector labels(static_cast<Eigen::Index>(phi.size()));
  for (std::size_t i = 0; i < phi.size(); ++i) {
    shifted.emplace_back(Vector(phi[i].coords() - t * v.coords()));
    labels[static_cast<Eigen::Index>(i)] = g(shifted.back());
  }
  return ShiftedTrainingSet{phi, v, t, std::move(shifted), std::move(labels)};
}

}  // namespace ntkx
