#pragma once

// Scenario configuration: one JSON document fixes every input and every
// random draw of a run. Unknown keys are rejected so typos fail loudly.

#include "ntkx/calculus.hpp"
#include "ntkx/geometry.hpp"
#include "ntkx/gram.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ntkx {

struct RealizationSpec {
  enum class Kind { Explicit, UniformBox };
  Kind kind = Kind::UniformBox;
  std::vector<std::vector<double>> points;  // Explicit
  double low = -1.0;                        // UniformBox
  double high = 1.0;
};

struct DeltaSpec {
  TikhonovConfig::Mode mode = TikhonovConfig::Mode::RelativeToMeanDiagonal;
  std::vector<double> values{1e-8};
};

struct KernelSpec {
  bool monte_carlo = false;
  std::size_t features = 100000;
};

struct TargetSpec {
  enum class Kind { Sinusoidal, Linear, Quadratic, Constant };
  Kind kind = Kind::Sinusoidal;
  std::vector<double> u;  // sinusoidal frequency or linear slope; empty draws u ~ N(0, I)
  double phase = 0.3;     // sinusoidal phase or linear/quadratic offset
  std::vector<std::vector<double>> q;  // Quadratic
  double value = 1.0;                  // Constant
};

struct DirectionSpec {
  std::size_t random = 8;
  bool include_shift = true;
  bool include_orthogonal = true;
  std::vector<std::vector<double>> explicit_dirs;
};

struct ProfileSpec {
  double radius = 0.1;
  int points = 41;
  int degmax = 4;
  double tol = 0.05;
  double floor = 1e-10;
};

struct FarFieldSpec {
  std::vector<double> distances{100.0, 1000.0};
  double window_fraction = 0.1;
};

struct InverseSpec {
  std::vector<std::size_t> n{1, 2, 8, 32};
  std::vector<double> kappa{0.5, 1.0, 4.0};
  std::vector<double> t{10.0, 100.0, 1000.0};
  std::vector<double> delta{1e-2, 1e-6};
};

struct MLPSpec {
  std::vector<std::size_t> widths{64, 4096};
  double lr = 0.0;
  std::size_t steps = 200000;
  double stop_ratio = 1e-6;
  std::size_t eval_points = 5;
  double eval_radius = 0.5;
  double rel_tol = 0.1;
  double abs_tol = 0.05;
};

struct KernelCheckSpec {
  std::vector<std::size_t> dims{1, 2, 5};
  std::size_t pairs = 20;
  std::size_t features = 200000;
  std::size_t diagonal_repeats = 32;
  std::size_t diagonal_features = 1000000;
};

struct KappaSpec {
  std::size_t directions = 5;
  std::size_t features = 1000000;
};

struct Lemma2Spec {
  std::size_t features = 64;
};

struct PredictorFormsSpec {
  std::size_t features = 10000;
  std::size_t eval_points = 100;
  double t = 10.0;
};

struct PascalSpec {
  int max_order = 16;
  std::size_t instances = 100;
  int max_derivative_order = 4;
};

struct ScenarioConfig {
  std::string id = "scenario";
  std::uint64_t seed = 0;
  std::size_t d = 2;
  std::size_t n = 8;
  RealizationSpec realization;
  std::vector<double> shift_direction;  // empty draws a random unit vector
  std::vector<double> t_list{100.0, 1000.0, 10000.0};
  DeltaSpec delta;
  KernelSpec kernel;
  TargetSpec target;
  DirectionSpec directions;
  ProfileSpec profile;
  FarFieldSpec far_field;
  InverseSpec inverse;
  MLPSpec mlp;
  KernelCheckSpec kernel_check;
  KappaSpec kappa;
  Lemma2Spec lemma2;
  PredictorFormsSpec predictor_forms;
  PascalSpec pascal;
  bool record_timing = false;
  std::string output;
};

ScenarioConfig parse_config(std::string_view json_text);
ScenarioConfig load_config(const std::string& path);
std::string dump_config(const ScenarioConfig& cfg);

/// Independent 64-bit seed for one named purpose ("realization", "features", ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0);

Realization make_realization(const ScenarioConfig& cfg);
Direction make_shift_direction(const ScenarioConfig& cfg);
TargetFunction make_target(const ScenarioConfig& cfg);

struct EvalDirection {
  std::string id;
  Direction direction;
  bool orthogonal = false;
};

/// Unit directions r0..r{k-1}, then the shift direction and one orthogonal to
/// it (d >= 2), then any explicit ones, in that order.
std::vector<EvalDirection> make_eval_directions(const ScenarioConfig& cfg, const Direction& shift);

}  // namespace ntkx
