#include "joist/models.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <string>

#include "joist/error.hpp"

namespace joist {
namespace {

constexpr std::array<std::string_view, 4> kJoistPredictors = {"joinsplit", "output",
                                                              "transparent_in", "spend"};
constexpr std::array<std::string_view, 1> kSizePredictors = {"byte"};

constexpr int kSchemaVersion = 1;

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::joist: return "joist";
    case ModelKind::block_size: return "block_size";
    case ModelKind::fixed_rate: return "fixed_rate";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
  for (auto kind : {ModelKind::joist, ModelKind::block_size, ModelKind::fixed_rate}) {
    if (to_string(kind) == name) return kind;
  }
  throw UnsupportedKindError("unknown model kind \"" + std::string(name) + "\"");
}

std::span<const std::string_view> predictor_names(ModelKind kind) {
  if (kind == ModelKind::joist) return kJoistPredictors;
  return kSizePredictors;
}

std::vector<double> predictor_vector(ModelKind kind, const BlockFeatures& b) {
  if (kind == ModelKind::joist) {
    return {static_cast<double>(b.n_joinsplit), static_cast<double>(b.n_output),
            static_cast<double>(b.n_transparent_in), static_cast<double>(b.n_spend)};
  }
  return {static_cast<double>(b.size_bytes)};
}

ModelSpec::ModelSpec(ModelKind kind, std::vector<double> coefficients, double intercept_us)
    : kind_(kind), coefficients_(std::move(coefficients)), intercept_us_(intercept_us) {
  if (coefficients_.size() != predictor_count(kind_)) {
    throw SpecError(std::string(to_string(kind_)) + " model needs " +
                    std::to_string(predictor_count(kind_)) + " coefficients, got " +
                    std::to_string(coefficients_.size()));
  }
  if (kind_ == ModelKind::fixed_rate && intercept_us_ != 0.0) {
    throw SpecError("fixed_rate model must have a zero intercept");
  }
}

ModelSpec ModelSpec::joist(double joinsplit, double output, double transparent_in, double spend,
                           double intercept_us) {
  return ModelSpec(ModelKind::joist, {joinsplit, output, transparent_in, spend}, intercept_us);
}

ModelSpec ModelSpec::block_size(double per_byte, double intercept_us) {
  return ModelSpec(ModelKind::block_size, {per_byte}, intercept_us);
}

ModelSpec ModelSpec::fixed_rate(double per_byte) {
  return ModelSpec(ModelKind::fixed_rate, {per_byte}, 0.0);
}

double ModelSpec::coefficient(std::string_view predictor) const {
  const auto names = predictor_names(kind_);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == predictor) return coefficients_[i];
  }
  throw SpecError(std::string(to_string(kind_)) + " model has no predictor \"" +
                  std::string(predictor) + "\"");
}

double predict(const ModelSpec& model, const BlockFeatures& block) {
  const auto x = predictor_vector(model.kind(), block);
  const auto beta = model.coefficients();
  double t = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) t += beta[i] * x[i];
  return t + model.intercept_us();
}

std::vector<double> predict_all(const ModelSpec& model, std::span<const BlockFeatures> blocks) {
  std::vector<double> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.push_back(predict(model, b));
  return out;
}

nlohmann::json model_to_json(const ModelSpec& model) {
  nlohmann::json coefficients = nlohmann::json::object();
  const auto names = predictor_names(model.kind());
  for (std::size_t i = 0; i < names.size(); ++i) {
    coefficients[std::string(names[i])] = model.coefficients()[i];
  }
  return {{"kind", to_string(model.kind())},
          {"coefficients", std::move(coefficients)},
          {"intercept_us", model.intercept_us()},
          {"schema_version", kSchemaVersion}};
}

ModelSpec model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("model", "model document is not an object");
  auto field = [&](const char* name) -> const nlohmann::json& {
    auto it = doc.find(name);
    if (it == doc.end()) {
      throw ParseError(name, std::string("model document is missing \"") + name + "\"");
    }
    return *it;
  };

  const auto& version = field("schema_version");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    throw ParseError("schema_version", "unsupported model schema_version " + version.dump());
  }
  const auto& kind_field = field("kind");
  if (!kind_field.is_string()) throw ParseError("kind", "model kind is not a string");
  const auto kind = model_kind_from_string(kind_field.get<std::string>());

  const auto& coefficients = field("coefficients");
  if (!coefficients.is_object()) {
    throw ParseError("coefficients", "model coefficients are not an object");
  }
  const auto names = predictor_names(kind);
  if (coefficients.size() != names.size()) {
    throw SpecError(std::string(to_string(kind)) + " model needs exactly " +
                    std::to_string(names.size()) + " coefficients");
  }
  std::vector<double> beta;
  for (auto name : names) {
    auto it = coefficients.find(std::string(name));
    if (it == coefficients.end() || !it->is_number()) {
      throw ParseError(std::string(name),
                       "model coefficient \"" + std::string(name) + "\" missing or not a number");
    }
    beta.push_back(it->get<double>());
  }
  const auto& intercept = field("intercept_us");
  if (!intercept.is_number()) throw ParseError("intercept_us", "intercept_us is not a number");
  return ModelSpec(kind, std::move(beta), intercept.get<double>());
}

void write_model(const ModelSpec& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::data, "cannot open " + path.string() + " for writing");
  out << model_to_json(model).dump() << '\n';
  if (!out.flush()) throw Error(ErrorCategory::data, "failed writing " + path.string());
}

ModelSpec read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::data, "cannot open model " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  auto doc = nlohmann::json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded()) throw ParseError("model", path.string() + " is not valid JSON");
  return model_from_json(doc);
}

// Fitted on the 5k/20k-block subsets of the HDD and SSD benchmarks, in us.
std::vector<ReferenceModel> reference_joist_models() {
  return {
      {"5k-hdd", ModelSpec::joist(10999.119, 9862.146, 246.312, 39760.496, 13209.042)},
      {"5k-ssd", ModelSpec::joist(5359.094, 5726.675, 61.411, 16912.591, 4468.949)},
      {"20k-hdd", ModelSpec::joist(10784.519, 12607.155, 139.676, 25227.674, 21760.549)},
      {"20k-ssd", ModelSpec::joist(5349.659, 5782.956, 40.339, 12067.658, 5928.899)},
  };
}

std::vector<ReferenceModel> reference_block_size_models() {
  return {
      {"5k-hdd", ModelSpec::block_size(4.345, 8784.760)},
      {"5k-ssd", ModelSpec::block_size(1.717, 3584.715)},
      {"20k-hdd", ModelSpec::block_size(2.232, 28445.511)},
      {"20k-ssd", ModelSpec::block_size(0.910, 9647.374)},
  };
}

ModelSpec gervais_baseline() { return ModelSpec::fixed_rate(0.3796); }

std::optional<ModelSpec> find_reference_model(ModelKind kind, std::string_view label) {
  if (kind == ModelKind::fixed_rate) {
    if (label == "gervais") return gervais_baseline();
    return std::nullopt;
  }
  const auto models =
      kind == ModelKind::joist ? reference_joist_models() : reference_block_size_models();
  for (const auto& m : models) {
    if (m.label == label) return m.model;
  }
  return std::nullopt;
}

}  // namespace joist
