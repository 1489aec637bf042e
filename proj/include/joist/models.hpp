#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "joist/features.hpp"

namespace joist {

enum class ModelKind { joist, block_size, fixed_rate };

std::string_view to_string(ModelKind kind);
/// Throws UnsupportedKindError for unknown names.
ModelKind model_kind_from_string(std::string_view name);

/// Predictor names of a kind, in the order used by predictor_vector and by
/// ModelSpec::coefficients():
///   joist      -> joinsplit, output, transparent_in, spend
///   block_size -> byte
///   fixed_rate -> byte
std::span<const std::string_view> predictor_names(ModelKind kind);

inline std::size_t predictor_count(ModelKind kind) { return predictor_names(kind).size(); }

/// Design-matrix row for one block, ordered as predictor_names(kind).
std::vector<double> predictor_vector(ModelKind kind, const BlockFeatures& block);

/// A parametrized linear predictor. Coefficients are in microseconds per unit
/// count (joist) or per byte (block_size, fixed_rate); the intercept is in
/// microseconds.
class ModelSpec {
 public:
  /// `coefficients` must be ordered as predictor_names(kind). fixed_rate
  /// requires a zero intercept. Throws SpecError otherwise.
  ModelSpec(ModelKind kind, std::vector<double> coefficients, double intercept_us);

  static ModelSpec joist(double joinsplit, double output, double transparent_in, double spend,
                         double intercept_us);
  static ModelSpec block_size(double per_byte, double intercept_us);
  static ModelSpec fixed_rate(double per_byte);

  ModelKind kind() const noexcept { return kind_; }
  std::span<const double> coefficients() const noexcept { return coefficients_; }
  double intercept_us() const noexcept { return intercept_us_; }

  /// Throws SpecError for a name outside predictor_names(kind()).
  double coefficient(std::string_view predictor) const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;

 private:
  ModelKind kind_;
  std::vector<double> coefficients_;
  double intercept_us_;
};

/// Predicted verification time in microseconds. Not clamped: the result can
/// be negative for fitted models with negative coefficients.
double predict(const ModelSpec& model, const BlockFeatures& block);
std::vector<double> predict_all(const ModelSpec& model, std::span<const BlockFeatures> blocks);

/// Model file: {"kind", "coefficients": {name: value}, "intercept_us", "schema_version": 1}.
nlohmann::json model_to_json(const ModelSpec& model);
ModelSpec model_from_json(const nlohmann::json& doc);
void write_model(const ModelSpec& model, const std::filesystem::path& path);
ModelSpec read_model(const std::filesystem::path& path);

/// A published parameter set together with its benchmark label.
struct ReferenceModel {
  std::string_view label;  // e.g. "5k-ssd"
  ModelSpec model;
};

/// Published JOIST fits for the 5k/20k HDD/SSD benchmarks.
std::vector<ReferenceModel> reference_joist_models();
/// Published block-size fits for the same benchmarks.
std::vector<ReferenceModel> reference_block_size_models();

/// Fixed-rate baseline from the Bitcoin simulator literature: 0.3796 us/B, k = 0.
ModelSpec gervais_baseline();

/// Looks up a reference model by kind and label; nullopt when absent.
std::optional<ModelSpec> find_reference_model(ModelKind kind, std::string_view label);

}  // namespace joist
