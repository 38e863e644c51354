#include "ntkx/runner.hpp"

#include "ntkx/calculus.hpp"
#include "ntkx/errors.hpp"
#include "ntkx/gram.hpp"
#include "ntkx/kernel.hpp"
#include "ntkx/mlp.hpp"
#include "ntkx/parallel.hpp"
#include "ntkx/regression.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>

namespace ntkx {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::int64_t as_int(std::size_t x) { return static_cast<std::int64_t>(x); }

// Runs one cell, recording failures in the row rather than propagating them.
template <typename F>
void guarded(ReportRow& row, bool timing, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  try {
    body();
  } catch (const BoundaryTooClose& e) {
    row.status = "skipped";
    row.set("error", std::string(e.what()));
  } catch (const std::exception& e) {
    row.status = "error";
    row.set("error", std::string(e.what()));
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  row.set("wall_time", timing ? elapsed.count() : 0.0);
}

ReportRow make_row(const ScenarioConfig& cfg, std::string check) {
  ReportRow r;
  r.scenario = cfg.id;
  r.check = std::move(check);
  return r;
}

KernelMode make_mode(const ScenarioConfig& cfg) {
  if (!cfg.kernel.monte_carlo) return Analytic{};
  return MonteCarlo{share(sample_features(cfg.d, cfg.kernel.features, derive_seed(cfg.seed, "features")))};
}

TikhonovConfig tikhonov(const ScenarioConfig& cfg, double value) { return {value, cfg.delta.mode}; }

/// δ for the shift-limit formulas: relative mode scales by the limit diagonal κt².
double limit_delta(const ScenarioConfig& cfg, double value, double kappa, double t) {
  return cfg.delta.mode == TikhonovConfig::Mode::Absolute ? value : value * kappa * t * t;
}

double max_abs_limit_error(const GramMatrix& k, double kappa, double t) {
  return (k.entries / (t * t) - Matrix::Constant(k.entries.rows(), k.entries.cols(), kappa))
      .cwiseAbs()
      .maxCoeff();
}

/// Least-squares slope of log y against log x over the finite positive pairs.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) pts.emplace_back(std::log(x[i]), std::log(y[i]));
  }
  if (pts.size() < 2) return kNaN;
  double mx = 0.0, my = 0.0;
  for (const auto& [a, b] : pts) {
    mx += a;
    my += b;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [a, b] : pts) {
    sxy += (a - mx) * (b - my);
    sxx += (a - mx) * (a - mx);
  }
  return sxx > 0.0 ? sxy / sxx : kNaN;
}

Vector random_vector(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(d));
  for (auto& vi : v) vi = normal(rng);
  return v;
}

Vector uniform_vector(std::size_t d, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Vector v(static_cast<Eigen::Index>(d));
  for (auto& vi : v) vi = unif(rng);
  return v;
}

void set_coefficients(ReportRow& row, const ExtrapolationProfile& p) {
  for (std::size_t j = 0; j < p.coefficients.size(); ++j) {
    row.set("c" + std::to_string(j), p.coefficients[j]);
  }
  row.set("fit_residual", p.residual);
}

struct FittedCell {
  std::optional<Predictor> predictor;
  std::string error;
  double delta = kNaN;
  double kappa = kNaN;
  double kappa_se = kNaN;
  double gram_error = kNaN;
  double agnosticism = kNaN;
};

}  // namespace

Report run_theorem1(const ScenarioConfig& cfg) {
  const Realization phi = make_realization(cfg);
  const Direction v = make_shift_direction(cfg);
  const TargetFunction g = make_target(cfg);
  const KernelMode mode = make_mode(cfg);
  const auto dirs = make_eval_directions(cfg, v);
  const Point origin(Vector::Zero(static_cast<Eigen::Index>(cfg.d)));

  const std::size_t nt = cfg.t_list.size();
  const std::size_t nd = cfg.delta.values.size();
  std::vector<FittedCell> fits(nt * nd);
  parallel::parallel_for(fits.size(), [&](std::size_t idx) {
    const double t = cfg.t_list[idx / nd];
    const double dv = cfg.delta.values[idx % nd];
    FittedCell& cell = fits[idx];
    try {
      const ShiftedTrainingSet ts = shift_set(phi, v, t, g);
      const GramMatrix k = assemble_gram(ts, mode);
      const TikhonovConfig tc = tikhonov(cfg, dv);
      cell.delta = tc.effective_delta(k);
      const AlphaVector alpha = tikhonov_solve(k, tc, ts.labels);
      cell.predictor.emplace(PointWise{ts.augmented_points(), alpha.values, mode});
      const KernelEstimate kap = kappa(v, mode);
      cell.kappa = kap.value;
      cell.kappa_se = kap.std_error;
      if (t > 0.0) cell.gram_error = max_abs_limit_error(k, kap.value, t);
      if (const auto* mc = std::get_if<MonteCarlo>(&mode)) cell.agnosticism = agnosticism_rate(ts, *mc->features);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  });

  Report report{"theorem1", {}};
  report.rows.resize(nt * nd * dirs.size());
  parallel::parallel_for(report.rows.size(), [&](std::size_t idx) {
    const std::size_t fit_idx = idx / dirs.size();
    const EvalDirection& dir = dirs[idx % dirs.size()];
    const FittedCell& fit = fits[fit_idx];
    ReportRow& row = report.rows[idx];
    row = make_row(cfg, "profile");
    row.set("t", cfg.t_list[fit_idx / nd]);
    row.set("delta_factor", cfg.delta.values[fit_idx % nd]);
    row.set("delta", fit.delta);
    row.set("direction", dir.id);
    row.set("orthogonal", std::int64_t{dir.orthogonal});
    guarded(row, cfg.record_timing, [&] {
      if (!fit.predictor) throw FitFailure("fit failed: " + fit.error);
      const Predictor& pred = *fit.predictor;
      const ExtrapolationProfile p =
          fit_profile([&](const Point& x) { return predict(pred, x); }, origin, dir.direction,
                      cfg.profile.radius, cfg.profile.points, cfg.profile.degmax);
      const DegreeClass cls = classify(p, cfg.profile.tol, cfg.profile.floor);
      set_coefficients(row, p);
      row.set("ratio32", cls.ratio32);
      row.set("ratio42", cls.ratio42);
      row.set("ratio32_scaled", cls.ratio32 * cfg.profile.radius);
      row.set("ratio42_scaled", cls.ratio42 * cfg.profile.radius * cfg.profile.radius);
      row.set("classification", std::string(to_string(cls.degree)));
      row.set("kappa", fit.kappa);
      row.set("kappa_se", fit.kappa_se);
      row.set("gram_limit_error", fit.gram_error);
      row.set("agnosticism", std::isnan(fit.agnosticism) ? Cell{} : Cell{fit.agnosticism});
    });
  });

  // Per δ: how many random directions have both ratios below tol at the
  // largest t and strictly decreasing across t.
  for (std::size_t di = 0; di < nd; ++di) {
    ReportRow sum = make_row(cfg, "summary");
    sum.set("delta_factor", cfg.delta.values[di]);
    std::int64_t total = 0, pass32 = 0, pass42 = 0, pass_both = 0;
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      if (dirs[k].id.front() != 'r') continue;
      ++total;
      bool ok32 = true, ok42 = true;
      double prev32 = std::numeric_limits<double>::infinity(), prev42 = prev32;
      for (std::size_t ti = 0; ti < nt; ++ti) {
        const ReportRow& r = report.rows[(ti * nd + di) * dirs.size() + k];
        const double r32 = r.number("ratio32"), r42 = r.number("ratio42");
        if (!r.ok() || !(r32 < prev32)) ok32 = false;
        if (!r.ok() || !(r42 < prev42)) ok42 = false;
        prev32 = r32;
        prev42 = r42;
      }
      ok32 = ok32 && prev32 < cfg.profile.tol;
      ok42 = ok42 && prev42 < cfg.profile.tol;
      pass32 += ok32;
      pass42 += ok42;
      pass_both += ok32 && ok42;
    }
    sum.set("random_directions", total);
    sum.set("passing_ratio32", pass32);
    sum.set("passing_ratio42", pass42);
    sum.set("passing_both", pass_both);
    report.rows.push_back(std::move(sum));
  }
  return report;
}

Report run_farfield(const ScenarioConfig& cfg) {
  const Realization phi = make_realization(cfg);
  const Direction v = make_shift_direction(cfg);
  const TargetFunction g = make_target(cfg);
  const KernelMode mode = make_mode(cfg);
  const auto dirs = make_eval_directions(cfg, v);

  std::optional<Predictor> pred;
  std::string fit_error;
  try {
    pred.emplace(fit_point_wise(shift_set(phi, v, 0.0, g), mode, tikhonov(cfg, cfg.delta.values.front())));
  } catch (const std::exception& e) {
    fit_error = e.what();
  }

  const auto& dist = cfg.far_field.distances;
  Report report{"farfield", {}};
  report.rows.resize(dist.size() * dirs.size());
  parallel::parallel_for(report.rows.size(), [&](std::size_t idx) {
    const double s = dist[idx / dirs.size()];
    const EvalDirection& dir = dirs[idx % dirs.size()];
    const double window = cfg.far_field.window_fraction * s;
    ReportRow& row = report.rows[idx];
    row = make_row(cfg, "window");
    row.set("distance", s);
    row.set("window", window);
    row.set("direction", dir.id);
    guarded(row, cfg.record_timing, [&] {
      if (!pred) throw FitFailure("fit failed: " + fit_error);
      const Direction u = dir.direction.normalized();
      const Point base(Vector(s * u.coords()));
      const ExtrapolationProfile p =
          fit_profile([&](const Point& x) { return predict(*pred, x); }, base, u, window,
                      cfg.profile.points, cfg.profile.degmax);
      const DegreeClass cls = classify(p, cfg.profile.tol, cfg.profile.floor);
      set_coefficients(row, p);
      const double c1 = std::abs(p.coefficients[1]);
      const double c2 = std::abs(p.coefficients[2]);
      row.set("quadratic_over_linear", c1 > 0.0 ? c2 * window / c1 : std::numeric_limits<double>::infinity());
      row.set("classification", std::string(to_string(cls.degree)));
    });
  });

  for (double s : dist) {
    ReportRow sum = make_row(cfg, "summary");
    sum.set("distance", s);
    std::int64_t total = 0, pass = 0;
    for (const auto& r : report.rows) {
      if (r.check != "window" || r.number("distance") != s) continue;
      ++total;
      pass += r.ok() && r.number("quadratic_over_linear") < cfg.profile.tol;
    }
    sum.set("directions", total);
    sum.set("passing", pass);
    report.rows.push_back(std::move(sum));
  }
  return report;
}

Report run_gram_limit(const ScenarioConfig& cfg) {
  const Realization phi = make_realization(cfg);
  const Direction v = make_shift_direction(cfg);
  const TargetFunction g = make_target(cfg);
  std::optional<FeatureSample> fs;
  if (cfg.kernel.monte_carlo) {
    fs.emplace(sample_features(cfg.d, cfg.kernel.features, derive_seed(cfg.seed, "features")));
  }
  FeatureSampleRef fs_ref = fs ? share(*fs) : nullptr;

  Report report{"gram-limit", {}};
  report.rows.resize(cfg.t_list.size());
  parallel::parallel_for(cfg.t_list.size(), [&](std::size_t i) {
    const double t = cfg.t_list[i];
    ReportRow& row = report.rows[i];
    row = make_row(cfg, "t");
    row.set("t", t);
    guarded(row, cfg.record_timing, [&] {
      if (!(t > 0.0)) throw InvalidInput("gram-limit: t must be positive");
      const ShiftedTrainingSet ts = shift_set(phi, v, t, g);
      const double kap = kappa(v, Analytic{}).value;
      row.set("kappa_analytic", kap);
      row.set("gram_error_analytic", max_abs_limit_error(assemble_gram(ts, Analytic{}), kap, t));
      if (fs_ref) {
        const MonteCarlo mc{fs_ref};
        const KernelEstimate km = kappa(v, mc);
        row.set("kappa_mc", km.value);
        row.set("kappa_mc_se", km.std_error);
        row.set("kappa_z", km.std_error > 0.0 ? std::abs(km.value - kap) / km.std_error : kNaN);
        // The Monte Carlo gram is compared with κ on the same sample so that
        // sampling noise cancels and only the shift error remains.
        row.set("gram_error_mc", max_abs_limit_error(assemble_gram(ts, mc), km.value, t));
        row.set("agnosticism", agnosticism_rate(ts, *fs_ref));
      }
    });
  });

  std::vector<double> ts, ea, em, ag;
  for (const auto& r : report.rows) {
    ts.push_back(r.number("t"));
    ea.push_back(r.number("gram_error_analytic"));
    em.push_back(r.number("gram_error_mc"));
    ag.push_back(r.number("agnosticism"));
  }
  ReportRow fit = make_row(cfg, "fit");
  fit.set("exponent_analytic", loglog_slope(ts, ea));
  if (fs_ref) {
    fit.set("exponent_mc", loglog_slope(ts, em));
    fit.set("exponent_agnosticism", loglog_slope(ts, ag));
    // Reduction factor per decade of t between consecutive sweep points.
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      const double decades = std::log10(ts[i + 1] / ts[i]);
      const double f = std::pow(ag[i] / ag[i + 1], 1.0 / decades);
      lo = std::min(lo, std::isfinite(f) ? f : kNaN);
      hi = std::max(hi, std::isfinite(f) ? f : kNaN);
    }
    fit.set("agnosticism_decade_factor_min", ts.size() > 1 ? lo : kNaN);
    fit.set("agnosticism_decade_factor_max", ts.size() > 1 ? hi : kNaN);
  }
  report.rows.push_back(std::move(fit));
  return report;
}

Report run_inverse_check(const ScenarioConfig& cfg) {
  const auto& s = cfg.inverse;
  const std::size_t cells = s.n.size() * s.kappa.size() * s.t.size() * s.delta.size();
  Report report{"inverse-check", {}};
  report.rows.resize(cells);
  parallel::parallel_for(cells, [&](std::size_t idx) {
    std::size_t r = idx;
    const double dv = s.delta[r % s.delta.size()];
    r /= s.delta.size();
    const double t = s.t[r % s.t.size()];
    r /= s.t.size();
    const double kap = s.kappa[r % s.kappa.size()];
    const std::size_t n = s.n[r / s.kappa.size()];

    ReportRow& row = report.rows[idx];
    row = make_row(cfg, "cell");
    row.set("n", as_int(n));
    row.set("kappa", kap);
    row.set("t", t);
    row.set("delta_factor", dv);
    guarded(row, cfg.record_timing, [&] {
      if (kap == 0.0) {
        row.status = "skipped";
        row.set("degenerate", std::int64_t{1});
        return;
      }
      row.set("degenerate", std::int64_t{0});
      const double delta = limit_delta(cfg, dv, kap, t);
      row.set("delta", delta);
      const auto nn = static_cast<Eigen::Index>(n);
      const Matrix a = delta * Matrix::Identity(nn, nn) + Matrix::Constant(nn, nn, kap * t * t);
      const Matrix m = sherman_morrison_inverse(n, kap, t, delta);
      row.set("identity_residual", (m * a - Matrix::Identity(nn, nn)).cwiseAbs().maxCoeff());

      std::mt19937_64 rng(derive_seed(cfg.seed, "labels", idx));
      const Vector y = random_vector(n, rng);
      const AlphaVector closed = asymptotic_alpha(y, n, kap, t, delta);
      const AlphaVector dense = tikhonov_solve(asymptotic_gram(n, kap, t), TikhonovConfig::absolute(delta), y);
      row.set("alpha_rel_diff",
              (closed.values - dense.values).cwiseAbs().maxCoeff() / dense.values.cwiseAbs().maxCoeff());
    });
  });
  return report;
}

Report run_mlp_compare(const ScenarioConfig& cfg) {
  const Realization phi = make_realization(cfg);
  const Direction v = make_shift_direction(cfg);
  const TargetFunction g = make_target(cfg);
  const double t = cfg.t_list.front();
  const ShiftedTrainingSet ts = shift_set(phi, v, t, g);
  const auto train_pts = ts.augmented_points();

  std::mt19937_64 rng(derive_seed(cfg.seed, "eval"));
  std::vector<Point> eval;
  for (std::size_t i = 0; i < cfg.mlp.eval_points; ++i) {
    Vector x = random_vector(cfg.d, rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double radius = cfg.mlp.eval_radius * std::pow(unif(rng), 1.0 / static_cast<double>(cfg.d));
    eval.emplace_back(Vector(radius * x / x.norm()));
  }

  const GramMatrix k = assemble_gram(ts, Analytic{});
  const TikhonovConfig tc = tikhonov(cfg, cfg.delta.values.front());
  const AlphaVector alpha0 = tikhonov_solve(k, tc, ts.labels);
  auto kernel_part = [&](const AlphaVector& a, const Point& x) {
    const AugmentedPoint xh(x);
    double s = 0.0;
    for (std::size_t i = 0; i < train_pts.size(); ++i) {
      s += a.values[static_cast<Eigen::Index>(i)] * ntk_analytic(xh.coords(), train_pts[i].coords());
    }
    return s;
  };

  Report report{"mlp-compare", {}};
  const auto& widths = cfg.mlp.widths;
  std::vector<std::vector<ReportRow>> per_width(widths.size());
  std::vector<double> displacement(widths.size(), kNaN);
  parallel::parallel_for(widths.size(), [&](std::size_t wi) {
    ReportRow row = make_row(cfg, "train");
    row.set("width", as_int(widths[wi]));
    row.set("t", t);
    std::vector<ReportRow> points;
    guarded(row, cfg.record_timing, [&] {
      MLPConfig mc;
      mc.width = widths[wi];
      mc.lr = cfg.mlp.lr;
      mc.steps = cfg.mlp.steps;
      mc.stop_ratio = cfg.mlp.stop_ratio;
      mc.seed = derive_seed(cfg.seed, "mlp", widths[wi]);
      const MLPModel initial = init(mc, cfg.d);
      const TrainResult tr = train(initial, ts, mc);
      const double l0 = tr.loss_trace.front();
      const double l1 = tr.loss_trace.back();
      row.set("learning_rate", tr.learning_rate);
      row.set("steps", as_int(tr.loss_trace.size() - 1));
      row.set("initial_loss", l0);
      row.set("final_loss", l1);
      row.set("loss_ratio", l0 > 0.0 ? l1 / l0 : 0.0);
      row.set("converged", std::int64_t{l1 <= cfg.mlp.stop_ratio * l0});
      displacement[wi] = relative_displacement(initial, tr.model);
      row.set("displacement", displacement[wi]);

      // Kernel predictor started from the network at initialization:
      // f0(x) + k(x, X)(K + δI)⁻¹(Y − f0(X)).
      Vector resid = ts.labels;
      for (std::size_t i = 0; i < ts.size(); ++i) resid[static_cast<Eigen::Index>(i)] -= evaluate(initial, ts.points[i]);
      const AlphaVector alpha = tikhonov_solve(k, tc, resid);
      for (std::size_t e = 0; e < eval.size(); ++e) {
        ReportRow pr = make_row(cfg, "point");
        pr.set("width", as_int(widths[wi]));
        pr.set("point", as_int(e));
        const double net = evaluate(tr.model, eval[e]);
        const double ker = evaluate(initial, eval[e]) + kernel_part(alpha, eval[e]);
        const double diff = std::abs(net - ker);
        const double tol = std::max(cfg.mlp.rel_tol * std::abs(ker), cfg.mlp.abs_tol);
        pr.set("network", net);
        pr.set("kernel", ker);
        pr.set("kernel_zero_init", kernel_part(alpha0, eval[e]));
        pr.set("abs_diff", diff);
        pr.set("tolerance", tol);
        pr.set("agree", std::int64_t{diff <= tol});
        pr.set("wall_time", 0.0);
        points.push_back(std::move(pr));
      }
    });
    per_width[wi].push_back(std::move(row));
    for (auto& p : points) per_width[wi].push_back(std::move(p));
  });
  for (auto& rows : per_width) {
    for (auto& r : rows) report.rows.push_back(std::move(r));
  }

  ReportRow sum = make_row(cfg, "summary");
  std::size_t widest = 0;
  for (std::size_t i = 1; i < widths.size(); ++i) {
    if (widths[i] > widths[widest]) widest = i;
  }
  std::int64_t agree = 0, total = 0;
  for (const auto& r : report.rows) {
    if (r.check == "point" && r.number("width") == static_cast<double>(widths[widest])) {
      ++total;
      agree += static_cast<std::int64_t>(r.number("agree"));
    }
  }
  bool shrinks = true;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i != widest && !(displacement[widest] < displacement[i])) shrinks = false;
  }
  sum.set("widest", as_int(widths.empty() ? 0 : widths[widest]));
  sum.set("points", total);
  sum.set("agreeing", agree);
  sum.set("displacement_shrinks", std::int64_t{shrinks});
  report.rows.push_back(std::move(sum));
  return report;
}

Report run_kappa(const ScenarioConfig& cfg) {
  Report report{"kappa", {}};
  report.rows.resize(cfg.kappa.directions);
  parallel::parallel_for(cfg.kappa.directions, [&](std::size_t i) {
    ReportRow& row = report.rows[i];
    row = make_row(cfg, "direction");
    row.set("index", as_int(i));
    guarded(row, cfg.record_timing, [&] {
      std::mt19937_64 rng(derive_seed(cfg.seed, "kappa-direction", i));
      const Direction v(random_vector(cfg.d, rng));
      const double an = kappa(v, Analytic{}).value;
      const auto fs = share(sample_features(cfg.d, cfg.kappa.features, derive_seed(cfg.seed, "kappa-features", i)));
      const KernelEstimate mc = kappa(v, MonteCarlo{fs});
      row.set("norm", v.norm());
      row.set("analytic", an);
      row.set("monte_carlo", mc.value);
      row.set("std_error", mc.std_error);
      row.set("z", std::abs(mc.value - an) / mc.std_error);
      double homog = 0.0;
      for (double c : {0.5, 2.0, 3.0, 10.0}) {
        const double scaled = kappa(Direction(Vector(c * v.coords())), Analytic{}).value;
        homog = std::max(homog, std::abs(scaled - c * c * an) / (c * c * an));
      }
      row.set("homogeneity_error", homog);
    });
  });
  return report;
}

Report run_kernel_check(const ScenarioConfig& cfg) {
  const auto& s = cfg.kernel_check;
  Report report{"kernel-check", {}};
  for (std::size_t di = 0; di < s.dims.size(); ++di) {
    const std::size_t d = s.dims[di];
    std::vector<ReportRow> rows(s.pairs);
    FeatureSampleRef fs;
    std::string fs_error;
    try {
      fs = share(sample_features(d, s.features, derive_seed(cfg.seed, "kernel-features", d)));
    } catch (const std::exception& e) {
      fs_error = e.what();
    }
    parallel::parallel_for(s.pairs, [&](std::size_t p) {
      ReportRow& row = rows[p];
      row = make_row(cfg, "pair");
      row.set("d", as_int(d));
      row.set("pair", as_int(p));
      guarded(row, cfg.record_timing, [&] {
        if (!fs) throw InvalidInput(fs_error);
        std::mt19937_64 rng(derive_seed(cfg.seed, "kernel-pair", d * 1000003 + p));
        const AugmentedPoint x(Point(uniform_vector(d, cfg.realization.low, cfg.realization.high, rng)));
        const AugmentedPoint y(Point(uniform_vector(d, cfg.realization.low, cfg.realization.high, rng)));
        const double an = ntk(x, y, Analytic{}).value;
        const KernelEstimate mc = ntk(x, y, MonteCarlo{fs});
        row.set("analytic", an);
        row.set("monte_carlo", mc.value);
        row.set("std_error", mc.std_error);
        const double z = std::abs(mc.value - an) / mc.std_error;
        row.set("z", z);
        row.set("within", std::int64_t{z <= 4.0});
      });
    });
    std::int64_t within = 0;
    for (auto& r : rows) {
      within += r.ok() && r.number("within") == 1.0;
      report.rows.push_back(std::move(r));
    }

    // Diagonal: averaging independent samples keeps memory bounded while
    // reaching the effective sample size repeats·features.
    ReportRow diag = make_row(cfg, "diagonal");
    diag.set("d", as_int(d));
    guarded(diag, cfg.record_timing, [&] {
      std::mt19937_64 rng(derive_seed(cfg.seed, "kernel-diagonal", d));
      const Point xp(uniform_vector(d, cfg.realization.low, cfg.realization.high, rng));
      const AugmentedPoint x(xp);
      const double expected = xp.coords().squaredNorm() + 1.0;
      std::vector<double> means(s.diagonal_repeats);
      std::vector<double> vars(s.diagonal_repeats);
      for (std::size_t r = 0; r < s.diagonal_repeats; ++r) {
        const auto sample = share(sample_features(d, s.diagonal_features,
                                                  derive_seed(cfg.seed, "kernel-diagonal-features", d * 1000 + r)));
        const KernelEstimate e = ntk(x, x, MonteCarlo{sample});
        means[r] = e.value;
        vars[r] = e.std_error * e.std_error;
      }
      double mean = 0.0, var = 0.0;
      for (std::size_t r = 0; r < means.size(); ++r) {
        mean += means[r];
        var += vars[r];
      }
      const double reps = static_cast<double>(means.size());
      mean /= reps;
      const double se = std::sqrt(var) / reps;
      diag.set("expected", expected);
      diag.set("analytic", ntk(x, x, Analytic{}).value);
      diag.set("monte_carlo", mean);
      diag.set("std_error", se);
      diag.set("effective_features", as_int(s.diagonal_repeats * s.diagonal_features));
      diag.set("rel_error", std::abs(mean - expected) / expected);
    });
    report.rows.push_back(std::move(diag));

    ReportRow sum = make_row(cfg, "summary");
    sum.set("d", as_int(d));
    sum.set("pairs", as_int(s.pairs));
    sum.set("within", within);
    sum.set("fraction_within", s.pairs ? static_cast<double>(within) / static_cast<double>(s.pairs) : kNaN);
    report.rows.push_back(std::move(sum));
  }
  return report;
}

Report run_predictor_forms(const ScenarioConfig& cfg) {
  const auto& s = cfg.predictor_forms;
  const Realization phi = make_realization(cfg);
  const Direction v = make_shift_direction(cfg);
  const TargetFunction g = make_target(cfg);

  Report report{"predictor-forms", {}};
  std::optional<Predictor> pw, fsp;
  ReportRow fit = make_row(cfg, "fit");
  fit.set("t", s.t);
  fit.set("features", as_int(s.features));
  guarded(fit, cfg.record_timing, [&] {
    const auto fs = share(sample_features(cfg.d, s.features, derive_seed(cfg.seed, "features")));
    const MonteCarlo mode{fs};
    const ShiftedTrainingSet ts = shift_set(phi, v, s.t, g);
    const GramMatrix k = assemble_gram(ts, mode);
    const TikhonovConfig tc = tikhonov(cfg, cfg.delta.values.front());
    AlphaVector alpha = tikhonov_solve(k, tc, ts.labels);
    fit.set("delta", alpha.delta);
    fit.set("solve_residual", alpha.residual);
    pw.emplace(PointWise{ts.augmented_points(), alpha.values, mode});
    fsp.emplace(FeatureSpace{beta_from_alpha(ts, alpha, fs)});
  });
  const bool fitted = fit.ok();
  report.rows.push_back(std::move(fit));
  if (!fitted) return report;

  std::vector<ReportRow> rows(s.eval_points);
  parallel::parallel_for(s.eval_points, [&](std::size_t i) {
    ReportRow& row = rows[i];
    row = make_row(cfg, "point");
    row.set("point", as_int(i));
    guarded(row, cfg.record_timing, [&] {
      std::mt19937_64 rng(derive_seed(cfg.seed, "eval", i));
      const Point x(uniform_vector(cfg.d, cfg.realization.low, cfg.realization.high, rng));
      const double a = predict(*pw, x);
      const double b = predict(*fsp, x);
      row.set("point_wise", a);
      row.set("feature_space", b);
      row.set("rel_diff", std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}));
    });
  });
  double worst = 0.0;
  for (auto& r : rows) {
    worst = std::max(worst, r.ok() ? r.number("rel_diff") : std::numeric_limits<double>::infinity());
    report.rows.push_back(std::move(r));
  }
  ReportRow sum = make_row(cfg, "summary");
  sum.set("max_rel_diff", worst);
  report.rows.push_back(std::move(sum));
  return report;
}

Report run_pascal(const ScenarioConfig& cfg) {
  const auto& s = cfg.pascal;
  Report report{"pascal", {}};

  for (int z = 1; z <= s.max_order; ++z) {
    ReportRow row = make_row(cfg, "shift");
    row.set("z", std::int64_t{z});
    guarded(row, cfg.record_timing, [&] {
      row.set("exact", std::int64_t{pascal_shift_identity(z)});
      row.set("magnitude_exact", std::int64_t{pascal_shift_magnitude_identity(z)});
    });
    report.rows.push_back(std::move(row));
  }

  std::mt19937_64 rng(derive_seed(cfg.seed, "pascal"));
  std::uniform_int_distribution<int> order(1, 8);
  std::uniform_real_distribution<double> step(0.01, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < s.instances; ++i) {
    ReportRow row = make_row(cfg, "sigma");
    row.set("instance", as_int(i));
    const int z = order(rng);
    const Point x0(random_vector(cfg.d, rng));
    const Vector vv = random_vector(cfg.d, rng);
    const double h = step(rng);
    std::vector<bool> ind(static_cast<std::size_t>(z) + 1);
    for (std::size_t j = 0; j < ind.size(); ++j) ind[j] = coin(rng);
    row.set("z", std::int64_t{z});
    guarded(row, cfg.record_timing, [&] {
      const Direction v(vv);
      const AugmentedPoint xh(x0);
      const auto p = pascal_coefficients(z);
      // Size of the largest term in the sum being regrouped.
      double scale = 0.0;
      for (int j = 0; j <= z; ++j) {
        const Vector xj = xh.coords() + (j * h) * augment_direction(v);
        scale += std::abs(static_cast<double>(p.at(j))) * xj.cwiseAbs().maxCoeff();
      }
      const double disc = sigma_identity_check(xh, v, h, ind, z);
      row.set("scale", scale);
      row.set("discrepancy", disc);
      row.set("relative", disc / scale);
    });
    report.rows.push_back(std::move(row));
  }

  // For f(x) = (<a, x> + b)^p the scaled z-th forward difference along v is
  // exactly z!<a,v>^z when p = z and 0 when p < z, for any step.
  for (int z = 1; z <= s.max_derivative_order; ++z) {
    for (int p = 0; p <= z; ++p) {
      ReportRow row = make_row(cfg, "derivative");
      row.set("z", std::int64_t{z});
      row.set("degree", std::int64_t{p});
      const Vector a = random_vector(cfg.d, rng);
      const double b = step(rng);
      const Point x0(random_vector(cfg.d, rng));
      const Vector vv = random_vector(cfg.d, rng);
      guarded(row, cfg.record_timing, [&] {
        const Direction v(vv);
        auto f = [&](const Point& x) { return std::pow(a.dot(x.coords()) + b, p); };
        const double h = 0.5;
        const DerivativeEstimate est = directional_derivative(f, x0, v, z, h);
        double expected = 0.0;
        if (p == z) {
          expected = std::pow(a.dot(vv), z);
          for (int k = 2; k <= z; ++k) expected *= k;
        }
        // Rounding in the stencil sum is relative to the evaluated magnitudes.
        double mag = 0.0;
        const auto pc = pascal_coefficients(z);
        for (int i = 0; i <= z; ++i) {
          mag += std::abs(static_cast<double>(pc.at(i)) * f(Point(Vector(x0.coords() + (i * h) * vv))));
        }
        mag /= std::pow(h, z);
        row.set("estimate", est.value);
        row.set("expected", expected);
        row.set("abs_error", std::abs(est.value - expected));
        row.set("relative", std::abs(est.value - expected) / std::max(mag, 1e-300));
      });
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

Report run_lemma2(const ScenarioConfig& cfg) {
  const Realization phi = make_realization(cfg);
  const Direction v = make_shift_direction(cfg);
  const TargetFunction g = make_target(cfg);
  const auto fs = sample_features(cfg.d, cfg.lemma2.features, derive_seed(cfg.seed, "features"));
  const double kap = kappa(v, Analytic{}).value;
  const double dv = cfg.delta.values.front();

  Report report{"lemma2", {}};
  std::vector<double> scaled(cfg.t_list.size(), kNaN);
  for (std::size_t ti = 0; ti < cfg.t_list.size(); ++ti) {
    const double t = cfg.t_list[ti];
    std::optional<ClosedFormContext> ctx;
    std::string ctx_error;
    const double delta = limit_delta(cfg, dv, kap, t);
    try {
      ctx.emplace(make_closed_form_context(phi, v, t, delta, kap, g));
    } catch (const std::exception& e) {
      ctx_error = e.what();
    }
    std::vector<ReportRow> rows(fs.count());
    parallel::parallel_for(fs.count(), [&](std::size_t k) {
      ReportRow& row = rows[k];
      row = make_row(cfg, "feature");
      row.set("t", t);
      row.set("delta", delta);
      row.set("feature", as_int(k));
      guarded(row, cfg.record_timing, [&] {
        if (!ctx) throw InvalidInput(ctx_error);
        const Vector w = fs.weight(k);
        const double step = default_bias_step(w);
        const int active = limit_indicator(w, v);
        row.set("active", std::int64_t{active});
        row.set("margin", std::abs(Vector(w.head(w.size() - 1)).dot(v.coords())));
        const double sens = beta_bias_sensitivity(*ctx, w, v, step);
        const double expected = active ? ctx->g_sum / (static_cast<double>(ctx->n) * kap * t * t + delta) : 0.0;
        row.set("g_sum", ctx->g_sum);
        row.set("sensitivity", sens);
        row.set("expected", expected);
        row.set("rel_error", expected != 0.0 ? std::abs(sens - expected) / std::abs(expected) : std::abs(sens));
        row.set("beta1_sensitivity", beta1_bias_sensitivity(*ctx, w, v, step));
      });
    });
    double worst = 0.0, worst_b1 = 0.0;
    std::int64_t checked = 0;
    for (auto& r : rows) {
      if (r.status == "ok" && r.number("active") == 1.0) {
        ++checked;
        worst = std::max(worst, r.number("rel_error"));
        if (std::isnan(scaled[ti])) scaled[ti] = r.number("sensitivity") / r.number("g_sum");
      }
      if (r.status == "ok") worst_b1 = std::max(worst_b1, r.number("beta1_sensitivity"));
      report.rows.push_back(std::move(r));
    }
    ReportRow sum = make_row(cfg, "summary");
    sum.set("t", t);
    sum.set("delta", delta);
    sum.set("active_checked", checked);
    sum.set("max_rel_error", worst);
    sum.set("max_beta1_sensitivity", worst_b1);
    sum.set("sensitivity_per_label_sum", scaled[ti]);
    report.rows.push_back(std::move(sum));
  }
  for (std::size_t ti = 0; ti + 1 < cfg.t_list.size(); ++ti) {
    ReportRow row = make_row(cfg, "scaling");
    row.set("t_from", cfg.t_list[ti]);
    row.set("t_to", cfg.t_list[ti + 1]);
    const double r = scaled[ti] / scaled[ti + 1];
    row.set("ratio", r);
    row.set("expected_ratio", std::pow(cfg.t_list[ti + 1] / cfg.t_list[ti], 2.0));
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<std::string_view> subcommand_names() {
  return {"theorem1", "farfield", "gram-limit", "inverse-check", "mlp-compare",
          "kappa",    "kernel-check", "predictor-forms", "pascal", "lemma2"};
}

Report run_subcommand(std::string_view name, const ScenarioConfig& cfg) {
  if (name == "theorem1") return run_theorem1(cfg);
  if (name == "farfield") return run_farfield(cfg);
  if (name == "gram-limit") return run_gram_limit(cfg);
  if (name == "inverse-check") return run_inverse_check(cfg);
  if (name == "mlp-compare") return run_mlp_compare(cfg);
  if (name == "kappa") return run_kappa(cfg);
  if (name == "kernel-check") return run_kernel_check(cfg);
  if (name == "predictor-forms") return run_predictor_forms(cfg);
  if (name == "pascal") return run_pascal(cfg);
  if (name == "lemma2") return run_lemma2(cfg);
  throw ConfigError("unknown subcommand '" + std::string(name) + "'");
}

}  // namespace ntkx
