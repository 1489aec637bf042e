#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "joist/dataset.hpp"
#include "joist/models.hpp"
#include "joist/stats.hpp"

namespace joist {

// ---------------------------------------------------------------------------
// Splitting

struct SplitPlan {
  std::uint64_t seed = 0;
  std::size_t n_fit = 0;
  std::size_t n_predict = 0;
};

struct SplitResult {
  Dataset fit_set;
  Dataset predict_set;
};

/// Row indices 0..n-1 shuffled by Fisher-Yates driven by SplitMix64(seed):
/// for i = n-1 down to 1, swap i with j = next() % (i + 1).
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

/// Uniformly random partition. The first n_fit shuffled indices form the fit
/// set; both halves are returned in height order. Throws ShapeError unless
/// n_fit + n_predict == ds.size() and both are at least 1.
SplitResult split(const Dataset& ds, const SplitPlan& plan);

// ---------------------------------------------------------------------------
// Model comparison

struct NamedModel {
  std::string name;
  ModelSpec model;
};

struct ComparisonRow {
  std::string model;        // kind name for fitted models, baseline name otherwise
  ModelKind kind;
  std::string split_label;  // "<n_fit>/<n_predict>"
  ModelSpec spec;           // fitted or given parameters
  EvalReport report;
};

/// Fits every kind in `kinds` on the fit half and evaluates it, together with
/// each fixed baseline, on the predict half. One row per model, fitted kinds
/// first, in the order given.
std::vector<ComparisonRow> run_comparison(const Dataset& ds, const SplitPlan& plan,
                                          std::span<const ModelKind> kinds,
                                          std::span<const NamedModel> baselines);

/// `model,split,n,mae_us,emr,r2,adj_r2,max_abs_error_us,max_prediction_us,n_exceeding`
std::string format_comparison_csv(std::span<const ComparisonRow> rows);

// ---------------------------------------------------------------------------
// Correlation and composition

struct CorrelationEntry {
  std::string_view feature;
  std::optional<double> r;  // nullopt: constant column, r undefined
  std::size_t n = 0;
};

/// Pearson r of each feature column against verify_time_us, in the order
/// transparent_in, transparent_out, spend, output, joinsplit.
std::vector<CorrelationEntry> correlation_table(const Dataset& ds);

/// `feature,r,n`; a constant column prints `degenerate` in the r field.
std::string format_correlation_csv(std::span<const CorrelationEntry> entries);

struct BlockComposition {
  Height height = 0;
  double transparent_in = 0.0;
  double sapling = 0.0;  // Spend plus Output descriptions
  double joinsplit = 0.0;
};

struct CompositionReport {
  std::vector<BlockComposition> blocks;
  double mean_transparent_in = 0.0;
  double mean_sapling = 0.0;
  double mean_joinsplit = 0.0;
  std::size_t n_excluded = 0;  // blocks without any input or description
};

/// Share of transparent inputs, Sapling descriptions and JoinSplits within
/// each block, and the per-block means. Blocks whose total is zero are
/// skipped and counted in n_excluded.
CompositionReport composition_analysis(const Dataset& ds);

/// `height,transparent_in,sapling,joinsplit`, one row per included block.
std::string format_composition_csv(const CompositionReport& report);
/// `n_blocks,n_excluded,mean_transparent_in,mean_sapling,mean_joinsplit`.
std::string format_composition_summary_csv(const CompositionReport& report);

// ---------------------------------------------------------------------------
// Synthetic data

struct CountRange {
  Count lo = 0;
  Count hi = 0;  // inclusive
};

/// size_bytes = base + sum(per_* x count) + Gaussian(0, noise_sigma_bytes),
/// rounded and clamped to at least 1.
struct SizeModel {
  double base_bytes = 1500.0;
  double per_transparent_in = 150.0;
  double per_transparent_out = 34.0;
  double per_spend = 384.0;
  double per_output = 948.0;
  double per_joinsplit = 1802.0;
  double noise_sigma_bytes = 2000.0;
};

struct SynthSpec {
  ModelSpec true_model = ModelSpec::joist(5359.094, 5726.675, 61.411, 16912.591, 4468.949);
  double noise_sigma_us = 0.0;
  CountRange transparent_in{0, 60};
  CountRange transparent_out{1, 60};
  CountRange spend{0, 4};
  CountRange output{0, 8};
  CountRange joinsplit{0, 2};
  SizeModel size;
  std::size_t n_blocks = 1000;
  std::uint64_t seed = 0;
  Height start_height = 1;
};

/// Deterministic synthetic dataset. Per block, SplitMix64(seed) draws, in
/// order: transparent_in, transparent_out, spend, output, joinsplit counts
/// (uniform over their ranges), the time noise, then the size noise. Noise is
/// Box-Muller using one cosine variate per draw.
/// verify_time_us = max(1, round(predict(true_model, block) + noise)).
///
/// Throws SpecError for a non-joist true model, a negative sigma, an empty or
/// inverted range, n_blocks == 0, or ranges under which the noiseless time
/// can never be positive.
Dataset generate_synthetic(const SynthSpec& spec);

/// JSON form of SynthSpec. Every key is optional and falls back to the
/// defaults above; `true_model` uses the model-file layout.
SynthSpec synth_spec_from_json(const nlohmann::json& doc);
nlohmann::json synth_spec_to_json(const SynthSpec& spec);

// ---------------------------------------------------------------------------
// Plot data

/// Sidecar location for the regression line: `plot.csv` -> `plot.line.json`.
std::filesystem::path plot_line_path(const std::filesystem::path& out);

/// Writes `height,measured_us,predicted_us` to `out` and the least-squares
/// line of measured on predicted, `{"slope", "intercept_us"}`, to
/// plot_line_path(out). Returns the line.
LineFit emit_plot_data(const Dataset& predict_set, const ModelSpec& model,
                       const std::filesystem::path& out);

}  // namespace joist
