#pragma once

// Experiment sweeps. Each subcommand turns a ScenarioConfig into a Report;
// cells run concurrently but rows are always emitted in a fixed order, and a
// failing cell is recorded in its row instead of aborting the sweep.

#include "ntkx/config.hpp"
#include "ntkx/report.hpp"

#include <string_view>
#include <vector>

namespace ntkx {

/// Profile fits of the shifted-data predictor at the origin, one row per
/// (t, δ, direction), followed by one summary row per δ.
Report run_theorem1(const ScenarioConfig& cfg);

/// Profile fits of the unshifted predictor over windows at distance S along
/// each direction, window radius window_fraction·S.
Report run_farfield(const ScenarioConfig& cfg);

/// Per t: |K/t² − κ| in both kernel modes, κ estimates and the agnosticism
/// rate, then a row with the fitted decay exponents.
Report run_gram_limit(const ScenarioConfig& cfg);

/// Sherman–Morrison identity residuals and closed-form α vs dense solve.
Report run_inverse_check(const ScenarioConfig& cfg);

/// Finite-width networks trained by gradient descent against the kernel predictor.
Report run_mlp_compare(const ScenarioConfig& cfg);

/// Analytic κ against Monte Carlo, plus 2-homogeneity.
Report run_kappa(const ScenarioConfig& cfg);

/// Analytic NTK against Monte Carlo on random pairs and on the diagonal.
Report run_kernel_check(const ScenarioConfig& cfg);

/// Point-wise against feature-space predictions under one feature sample.
Report run_predictor_forms(const ScenarioConfig& cfg);

/// Pascal coefficient identities and forward-stencil exactness on monomials.
Report run_pascal(const ScenarioConfig& cfg);

/// Bias-coordinate sensitivity of the closed-form coefficient blocks.
Report run_lemma2(const ScenarioConfig& cfg);

std::vector<std::string_view> subcommand_names();

/// Dispatches by name; throws ConfigError for an unknown subcommand.
Report run_subcommand(std::string_view name, const ScenarioConfig& cfg);

}  // namespace ntkx
