#pragma once

// NTK gram matrices of shifted training sets and their regularized solves.

#include "ntkx/geometry.hpp"
#include "ntkx/kernel.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>

namespace ntkx {

/// Identifies the feature sample a Monte Carlo quantity was built from.
struct FeatureTag {
  std::size_t input_dim = 0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::uint64_t fingerprint = 0;

  static FeatureTag of(const FeatureSample& fs) {
    return {fs.input_dim(), fs.count(), fs.seed(), fs.fingerprint()};
  }
  friend bool operator==(const FeatureTag&, const FeatureTag&) = default;
};

enum class GramKind { Analytic, MonteCarlo, Asymptotic };

struct GramMatrix {
  Matrix entries;
  GramKind kind = GramKind::Analytic;
  std::optional<FeatureTag> features;  // set for MonteCarlo
  bool degenerate = false;             // all-zero asymptotic form (kappa == 0)

  std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
  double mean_diagonal() const { return entries.diagonal().mean(); }
};

struct TikhonovConfig {
  enum class Mode { Absolute, RelativeToMeanDiagonal };

  double delta = 1e-8;
  Mode mode = Mode::RelativeToMeanDiagonal;

  static TikhonovConfig absolute(double delta) { return {delta, Mode::Absolute}; }
  static TikhonovConfig relative(double factor) { return {factor, Mode::RelativeToMeanDiagonal}; }

  /// The δ actually added to the diagonal of `k`.
  double effective_delta(const GramMatrix& k) const;
};

struct AlphaVector {
  Vector values;
  double delta = 0.0;
  double residual = 0.0;  // ‖(K + δI)α − Y‖
  std::optional<FeatureTag> features;
};

GramMatrix assemble_gram(const ShiftedTrainingSet& ts, const KernelMode& mode);

/// κt²·J, the shift-limit of the gram.
GramMatrix asymptotic_gram(std::size_t n, double kappa, double t);

/// (1/δ)I − t²κ/(δ(nκt² + δ))·J, the inverse of δI + κt²J.
Matrix sherman_morrison_inverse(std::size_t n, double kappa, double t, double delta);

/// Solves (K + δI)α = Y by Cholesky with iterative refinement.
AlphaVector tikhonov_solve(const GramMatrix& k, const TikhonovConfig& cfg, const Vector& y);

/// α_i = −t²κ/(δ(nκt² + δ))·Σ_j Y_j + Y_i/δ.
AlphaVector asymptotic_alpha(const Vector& y, std::size_t n, double kappa, double t, double delta);

/// Row-major CSV with 17 significant digits.
void write_matrix_csv(std::ostream& os, const Matrix& m);

}  // namespace ntkx
