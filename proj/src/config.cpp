#include "ntkx/config.hpp"

#include "ntkx/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <random>
#include <sstream>

namespace ntkx {
namespace {

using nlohmann::json;

void allow_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [k, _] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw ConfigError(std::string(where) + ": unknown key '" + k + "'");
    }
  }
}

template <class T>
void read(const json& j, const char* key, T& out, std::string_view where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(where) + "." + key + ": " + e.what());
  }
}

std::string mode_name(TikhonovConfig::Mode m) {
  return m == TikhonovConfig::Mode::Absolute ? "absolute" : "relative";
}

TikhonovConfig::Mode parse_mode(const std::string& s) {
  if (s == "absolute") return TikhonovConfig::Mode::Absolute;
  if (s == "relative") return TikhonovConfig::Mode::RelativeToMeanDiagonal;
  throw ConfigError("delta.mode: expected 'relative' or 'absolute', got '" + s + "'");
}

const char* target_name(TargetSpec::Kind k) {
  switch (k) {
    case TargetSpec::Kind::Sinusoidal: return "sinusoidal";
    case TargetSpec::Kind::Linear: return "linear";
    case TargetSpec::Kind::Quadratic: return "quadratic";
    case TargetSpec::Kind::Constant: return "constant";
  }
  return "sinusoidal";
}

TargetSpec::Kind parse_target(const std::string& s) {
  if (s == "sinusoidal") return TargetSpec::Kind::Sinusoidal;
  if (s == "linear") return TargetSpec::Kind::Linear;
  if (s == "quadratic") return TargetSpec::Kind::Quadratic;
  if (s == "constant") return TargetSpec::Kind::Constant;
  throw ConfigError("target.kind: unknown kind '" + s + "'");
}

void validate(const ScenarioConfig& c) {
  if (c.d < 1) throw ConfigError("d must be at least 1");
  if (c.n < 1) throw ConfigError("n must be at least 1");
  if (!c.shift_direction.empty() && c.shift_direction.size() != c.d) {
    throw ConfigError("shift_direction must have d entries");
  }
  for (double t : c.t_list) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("t_list entries must be finite and >= 0");
  }
  for (double dl : c.delta.values) {
    if (!(dl > 0.0)) throw ConfigError("delta.values must be positive");
  }
  if (c.realization.kind == RealizationSpec::Kind::Explicit) {
    if (c.realization.points.size() != c.n) throw ConfigError("realization.points must hold n points");
    for (const auto& p : c.realization.points) {
      if (p.size() != c.d) throw ConfigError("realization.points entries must have d coordinates");
    }
  } else if (!(c.realization.low < c.realization.high)) {
    throw ConfigError("realization: low must be below high");
  }
  if (c.kernel.monte_carlo && c.kernel.features < 1) throw ConfigError("kernel.features must be >= 1");
  if (!c.target.u.empty() && c.target.u.size() != c.d) throw ConfigError("target.u must have d entries");
  if (c.target.kind == TargetSpec::Kind::Quadratic) {
    if (c.target.q.size() != c.d) throw ConfigError("target.q must be d x d");
    for (const auto& r : c.target.q) {
      if (r.size() != c.d) throw ConfigError("target.q must be d x d");
    }
  }
  for (const auto& e : c.directions.explicit_dirs) {
    if (e.size() != c.d) throw ConfigError("directions.explicit entries must have d coordinates");
  }
  if (!(c.profile.radius > 0.0)) throw ConfigError("profile.radius must be positive");
  if (c.profile.degmax < 2 || c.profile.points < c.profile.degmax + 3) {
    throw ConfigError("profile: need degmax >= 2 and points >= degmax + 3");
  }
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  allow_keys(j, "config",
             {"id", "seed", "d", "n", "realization", "shift_direction", "t_list", "delta", "kernel",
              "target", "directions", "profile", "far_field", "inverse", "mlp", "kernel_check",
              "kappa", "lemma2", "predictor_forms", "pascal", "record_timing", "output"});
  ScenarioConfig c;
  read(j, "id", c.id, "config");
  read(j, "seed", c.seed, "config");
  read(j, "d", c.d, "config");
  read(j, "n", c.n, "config");
  read(j, "shift_direction", c.shift_direction, "config");
  read(j, "t_list", c.t_list, "config");
  read(j, "record_timing", c.record_timing, "config");
  read(j, "output", c.output, "config");

  if (j.contains("realization")) {
    const auto& r = j["realization"];
    allow_keys(r, "realization", {"kind", "points", "low", "high"});
    std::string kind = "uniform_box";
    read(r, "kind", kind, "realization");
    if (kind == "explicit") {
      c.realization.kind = RealizationSpec::Kind::Explicit;
    } else if (kind == "uniform_box") {
      c.realization.kind = RealizationSpec::Kind::UniformBox;
    } else {
      throw ConfigError("realization.kind: expected 'explicit' or 'uniform_box'");
    }
    read(r, "points", c.realization.points, "realization");
    read(r, "low", c.realization.low, "realization");
    read(r, "high", c.realization.high, "realization");
  }
  if (j.contains("delta")) {
    const auto& r = j["delta"];
    allow_keys(r, "delta", {"mode", "values"});
    std::string mode = "relative";
    read(r, "mode", mode, "delta");
    c.delta.mode = parse_mode(mode);
    read(r, "values", c.delta.values, "delta");
  }
  if (j.contains("kernel")) {
    const auto& r = j["kernel"];
    allow_keys(r, "kernel", {"mode", "features"});
    std::string mode = "analytic";
    read(r, "mode", mode, "kernel");
    if (mode != "analytic" && mode != "monte_carlo") {
      throw ConfigError("kernel.mode: expected 'analytic' or 'monte_carlo'");
    }
    c.kernel.monte_carlo = mode == "monte_carlo";
    read(r, "features", c.kernel.features, "kernel");
  }
  if (j.contains("target")) {
    const auto& r = j["target"];
    allow_keys(r, "target", {"kind", "u", "phase", "q", "value"});
    std::string kind = "sinusoidal";
    read(r, "kind", kind, "target");
    c.target.kind = parse_target(kind);
    read(r, "u", c.target.u, "target");
    read(r, "phase", c.target.phase, "target");
    read(r, "q", c.target.q, "target");
    read(r, "value", c.target.value, "target");
  }
  if (j.contains("directions")) {
    const auto& r = j["directions"];
    allow_keys(r, "directions", {"random", "include_shift", "include_orthogonal", "explicit"});
    read(r, "random", c.directions.random, "directions");
    read(r, "include_shift", c.directions.include_shift, "directions");
    read(r, "include_orthogonal", c.directions.include_orthogonal, "directions");
    read(r, "explicit", c.directions.explicit_dirs, "directions");
  }
  if (j.contains("profile")) {
    const auto& r = j["profile"];
    allow_keys(r, "profile", {"radius", "points", "degmax", "tol", "floor"});
    read(r, "radius", c.profile.radius, "profile");
    read(r, "points", c.profile.points, "profile");
    read(r, "degmax", c.profile.degmax, "profile");
    read(r, "tol", c.profile.tol, "profile");
    read(r, "floor", c.profile.floor, "profile");
  }
  if (j.contains("far_field")) {
    const auto& r = j["far_field"];
    allow_keys(r, "far_field", {"distances", "window_fraction"});
    read(r, "distances", c.far_field.distances, "far_field");
    read(r, "window_fraction", c.far_field.window_fraction, "far_field");
  }
  if (j.contains("inverse")) {
    const auto& r = j["inverse"];
    allow_keys(r, "inverse", {"n", "kappa", "t", "delta"});
    read(r, "n", c.inverse.n, "inverse");
    read(r, "kappa", c.inverse.kappa, "inverse");
    read(r, "t", c.inverse.t, "inverse");
    read(r, "delta", c.inverse.delta, "inverse");
  }
  if (j.contains("mlp")) {
    const auto& r = j["mlp"];
    allow_keys(r, "mlp", {"widths", "lr", "steps", "stop_ratio", "eval_points", "eval_radius",
                          "rel_tol", "abs_tol"});
    read(r, "widths", c.mlp.widths, "mlp");
    read(r, "lr", c.mlp.lr, "mlp");
    read(r, "steps", c.mlp.steps, "mlp");
    read(r, "stop_ratio", c.mlp.stop_ratio, "mlp");
    read(r, "eval_points", c.mlp.eval_points, "mlp");
    read(r, "eval_radius", c.mlp.eval_radius, "mlp");
    read(r, "rel_tol", c.mlp.rel_tol, "mlp");
    read(r, "abs_tol", c.mlp.abs_tol, "mlp");
  }
  if (j.contains("kernel_check")) {
    const auto& r = j["kernel_check"];
    allow_keys(r, "kernel_check", {"dims", "pairs", "features", "diagonal_repeats", "diagonal_features"});
    read(r, "dims", c.kernel_check.dims, "kernel_check");
    read(r, "pairs", c.kernel_check.pairs, "kernel_check");
    read(r, "features", c.kernel_check.features, "kernel_check");
    read(r, "diagonal_repeats", c.kernel_check.diagonal_repeats, "kernel_check");
    read(r, "diagonal_features", c.kernel_check.diagonal_features, "kernel_check");
  }
  if (j.contains("kappa")) {
    const auto& r = j["kappa"];
    allow_keys(r, "kappa", {"directions", "features"});
    read(r, "directions", c.kappa.directions, "kappa");
    read(r, "features", c.kappa.features, "kappa");
  }
  if (j.contains("lemma2")) {
    const auto& r = j["lemma2"];
    allow_keys(r, "lemma2", {"features"});
    read(r, "features", c.lemma2.features, "lemma2");
  }
  if (j.contains("predictor_forms")) {
    const auto& r = j["predictor_forms"];
    allow_keys(r, "predictor_forms", {"features", "eval_points", "t"});
    read(r, "features", c.predictor_forms.features, "predictor_forms");
    read(r, "eval_points", c.predictor_forms.eval_points, "predictor_forms");
    read(r, "t", c.predictor_forms.t, "predictor_forms");
  }
  if (j.contains("pascal")) {
    const auto& r = j["pascal"];
    allow_keys(r, "pascal", {"max_order", "instances", "max_derivative_order"});
    read(r, "max_order", c.pascal.max_order, "pascal");
    read(r, "instances", c.pascal.instances, "pascal");
    read(r, "max_derivative_order", c.pascal.max_derivative_order, "pascal");
  }
  validate(c);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ScenarioConfig& c) {
  json j;
  j["id"] = c.id;
  j["seed"] = c.seed;
  j["d"] = c.d;
  j["n"] = c.n;
  j["realization"] = {
      {"kind", c.realization.kind == RealizationSpec::Kind::Explicit ? "explicit" : "uniform_box"},
      {"points", c.realization.points},
      {"low", c.realization.low},
      {"high", c.realization.high}};
  j["shift_direction"] = c.shift_direction;
  j["t_list"] = c.t_list;
  j["delta"] = {{"mode", mode_name(c.delta.mode)}, {"values", c.delta.values}};
  j["kernel"] = {{"mode", c.kernel.monte_carlo ? "monte_carlo" : "analytic"},
                 {"features", c.kernel.features}};
  j["target"] = {{"kind", target_name(c.target.kind)},
                 {"u", c.target.u},
                 {"phase", c.target.phase},
                 {"q", c.target.q},
                 {"value", c.target.value}};
  j["directions"] = {{"random", c.directions.random},
                     {"include_shift", c.directions.include_shift},
                     {"include_orthogonal", c.directions.include_orthogonal},
                     {"explicit", c.directions.explicit_dirs}};
  j["profile"] = {{"radius", c.profile.radius},
                  {"points", c.profile.points},
                  {"degmax", c.profile.degmax},
                  {"tol", c.profile.tol},
                  {"floor", c.profile.floor}};
  j["far_field"] = {{"distances", c.far_field.distances},
                    {"window_fraction", c.far_field.window_fraction}};
  j["inverse"] = {{"n", c.inverse.n},
                  {"kappa", c.inverse.kappa},
                  {"t", c.inverse.t},
                  {"delta", c.inverse.delta}};
  j["mlp"] = {{"widths", c.mlp.widths},         {"lr", c.mlp.lr},
              {"steps", c.mlp.steps},           {"stop_ratio", c.mlp.stop_ratio},
              {"eval_points", c.mlp.eval_points}, {"eval_radius", c.mlp.eval_radius},
              {"rel_tol", c.mlp.rel_tol},       {"abs_tol", c.mlp.abs_tol}};
  j["kernel_check"] = {{"dims", c.kernel_check.dims},
                       {"pairs", c.kernel_check.pairs},
                       {"features", c.kernel_check.features},
                       {"diagonal_repeats", c.kernel_check.diagonal_repeats},
                       {"diagonal_features", c.kernel_check.diagonal_features}};
  j["kappa"] = {{"directions", c.kappa.directions}, {"features", c.kappa.features}};
  j["lemma2"] = {{"features", c.lemma2.features}};
  j["predictor_forms"] = {{"features", c.predictor_forms.features},
                          {"eval_points", c.predictor_forms.eval_points},
                          {"t", c.predictor_forms.t}};
  j["pascal"] = {{"max_order", c.pascal.max_order},
                 {"instances", c.pascal.instances},
                 {"max_derivative_order", c.pascal.max_derivative_order}};
  j["record_timing"] = c.record_timing;
  j["output"] = c.output;
  return j.dump(2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose, std::uint64_t index) {
  // FNV-1a of the purpose, folded with the index, then one splitmix64 round.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : purpose) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t z = seed ^ h ^ (index * 0x9e3779b97f4a7c15ULL);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Realization make_realization(const ScenarioConfig& c) {
  std::vector<Point> pts;
  pts.reserve(c.n);
  if (c.realization.kind == RealizationSpec::Kind::Explicit) {
    for (const auto& p : c.realization.points) {
      pts.emplace_back(Vector(Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size()))));
    }
  } else {
    std::mt19937_64 rng(derive_seed(c.seed, "realization"));
    std::uniform_real_distribution<double> unif(c.realization.low, c.realization.high);
    for (std::size_t i = 0; i < c.n; ++i) {
      Vector x(static_cast<Eigen::Index>(c.d));
      for (auto& xi : x) xi = unif(rng);
      pts.emplace_back(std::move(x));
    }
  }
  return Realization(std::move(pts));
}

namespace {

Vector random_unit(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(d));
  do {
    for (auto& vi : v) vi = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

Vector to_vector(const std::vector<double>& x) {
  return Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
}

}  // namespace

Direction make_shift_direction(const ScenarioConfig& c) {
  if (!c.shift_direction.empty()) return Direction(to_vector(c.shift_direction));
  std::mt19937_64 rng(derive_seed(c.seed, "shift"));
  return Direction(random_unit(c.d, rng));
}

TargetFunction make_target(const ScenarioConfig& c) {
  Vector u;
  if (!c.target.u.empty()) {
    u = to_vector(c.target.u);
  } else {
    std::mt19937_64 rng(derive_seed(c.seed, "target"));
    std::normal_distribution<double> normal(0.0, 1.0);
    u.resize(static_cast<Eigen::Index>(c.d));
    for (auto& ui : u) ui = normal(rng);
  }
  switch (c.target.kind) {
    case TargetSpec::Kind::Sinusoidal: return TargetFunction::sinusoidal(u, c.target.phase);
    case TargetSpec::Kind::Linear: return TargetFunction::linear(u, c.target.phase);
    case TargetSpec::Kind::Quadratic: {
      const auto d = static_cast<Eigen::Index>(c.d);
      Matrix q(d, d);
      for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index k = 0; k < d; ++k) {
          q(r, k) = c.target.q[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)];
        }
      }
      return TargetFunction::quadratic(q, u, c.target.phase);
    }
    case TargetSpec::Kind::Constant: return TargetFunction::constant(c.d, c.target.value);
  }
  throw ConfigError("target: unhandled kind");
}

std::vector<EvalDirection> make_eval_directions(const ScenarioConfig& c, const Direction& shift) {
  std::vector<EvalDirection> out;
  std::mt19937_64 rng(derive_seed(c.seed, "directions"));
  for (std::size_t k = 0; k < c.directions.random; ++k) {
    out.push_back({"r" + std::to_string(k), Direction(random_unit(c.d, rng)), false});
  }
  const Vector s = shift.coords() / shift.norm();
  if (c.directions.include_shift) out.push_back({"shift", Direction(s), false});
  if (c.directions.include_orthogonal && c.d >= 2) {
    // Project out the shift from the coordinate axis least aligned with it.
    Eigen::Index axis = 0;
    s.cwiseAbs().minCoeff(&axis);
    Vector e = Vector::Unit(s.size(), axis);
    e -= e.dot(s) * s;
    out.push_back({"orth", Direction(e / e.norm()), true});
  }
  for (std::size_t k = 0; k < c.directions.explicit_dirs.size(); ++k) {
    out.push_back({"e" + std::to_string(k), Direction(to_vector(c.directions.explicit_dirs[k])), false});
  }
  return out;
}

}  // namespace ntkx
