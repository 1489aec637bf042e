#include "joist/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <numbers>
#include <numeric>

#include "joist/error.hpp"
#include "joist/fit.hpp"
#include "joist/splitmix64.hpp"
#include "joist/text.hpp"

namespace joist {
namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::data, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out.flush()) throw Error(ErrorCategory::data, "failed writing " + path.string());
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices) {
  std::vector<VerificationSample> rows;
  rows.reserve(indices.size());
  for (auto i : indices) rows.push_back(ds[i]);
  return Dataset::from_unordered(std::move(rows));
}

std::string optional_number(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string{};
}

// One standard normal variate (Box-Muller, cosine branch only).
double gaussian(SplitMix64& rng) {
  const double u1 = 1.0 - rng.uniform01();  // (0, 1]
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Count draw(SplitMix64& rng, const CountRange& range) {
  const std::uint64_t span = range.hi - range.lo;
  if (span == std::numeric_limits<std::uint64_t>::max()) return range.lo + rng();
  return range.lo + rng.below(span + 1);
}

std::uint64_t round_positive(double v) {
  if (!(v >= 1.0)) return 1;
  return static_cast<std::uint64_t>(std::llround(v));
}

}  // namespace

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = n; i-- > 1;) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

SplitResult split(const Dataset& ds, const SplitPlan& plan) {
  if (plan.n_fit == 0 || plan.n_predict == 0) {
    throw ShapeError("split: n_fit and n_predict must both be at least 1");
  }
  if (plan.n_fit + plan.n_predict != ds.size()) {
    throw ShapeError("split: n_fit + n_predict = " + std::to_string(plan.n_fit + plan.n_predict) +
                     " but dataset has " + std::to_string(ds.size()) + " rows");
  }
  const auto idx = shuffled_indices(ds.size(), plan.seed);
  const std::span<const std::size_t> all(idx);
  return {subset(ds, all.first(plan.n_fit)), subset(ds, all.subspan(plan.n_fit))};
}

std::vector<ComparisonRow> run_comparison(const Dataset& ds, const SplitPlan& plan,
                                          std::span<const ModelKind> kinds,
                                          std::span<const NamedModel> baselines) {
  const auto [fit_set, predict_set] = split(ds, plan);
  const auto label = std::to_string(plan.n_fit) + "/" + std::to_string(plan.n_predict);
  const auto blocks = predict_set.features();
  const auto observed = predict_set.times_us();

  std::vector<ComparisonRow> rows;
  auto add = [&](std::string name, const ModelSpec& spec) {
    const auto predicted = predict_all(spec, blocks);
    rows.push_back({std::move(name), spec.kind(), label, spec,
                    evaluate(observed, predicted, predictor_count(spec.kind()))});
  };
  for (auto kind : kinds) add(std::string(to_string(kind)), ols_fit(kind, fit_set).model);
  for (const auto& b : baselines) add(b.name, b.model);
  return rows;
}

std::string format_comparison_csv(std::span<const ComparisonRow> rows) {
  std::string out =
      "model,split,n,mae_us,emr,r2,adj_r2,max_abs_error_us,max_prediction_us,n_exceeding\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    out += row.model + ',' + row.split_label + ',' + std::to_string(r.n) + ',' +
           format_number(r.mae_us) + ',' + format_number(r.emr) + ',' + format_number(r.r2) +
           ',' + optional_number(r.adj_r2) + ',' + format_number(r.max_abs_error_us) + ',' +
           format_number(r.max_prediction_us) + ',' +
           std::to_string(r.n_exceeding_max_prediction) + '\n';
  }
  return out;
}

std::vector<CorrelationEntry> correlation_table(const Dataset& ds) {
  struct Column {
    std::string_view name;
    Count BlockFeatures::*field;
  };
  static constexpr Column kColumns[] = {
      {"transparent_in", &BlockFeatures::n_transparent_in},
      {"transparent_out", &BlockFeatures::n_transparent_out},
      {"spend", &BlockFeatures::n_spend},
      {"output", &BlockFeatures::n_output},
      {"joinsplit", &BlockFeatures::n_joinsplit},
  };

  const auto times = ds.times_us();
  std::vector<CorrelationEntry> table;
  for (const auto& col : kColumns) {
    std::vector<double> x;
    x.reserve(ds.size());
    for (const auto& s : ds) x.push_back(static_cast<double>(s.features.*col.field));
    CorrelationEntry entry{col.name, std::nullopt, ds.size()};
    try {
      entry.r = pearson_r(x, times).r;
    } catch (const DegenerateError&) {
      // constant column: r undefined
    }
    table.push_back(entry);
  }
  return table;
}

std::string format_correlation_csv(std::span<const CorrelationEntry> entries) {
  std::string out = "feature,r,n\n";
  for (const auto& e : entries) {
    out += std::string(e.feature) + ',' + (e.r ? format_number(*e.r) : "degenerate") + ',' +
           std::to_string(e.n) + '\n';
  }
  return out;
}

CompositionReport composition_analysis(const Dataset& ds) {
  CompositionReport report;
  std::vector<double> in, sapling, js;
  for (const auto& s : ds) {
    const auto& f = s.features;
    const Count total = f.n_transparent_in + f.n_spend + f.n_output + f.n_joinsplit;
    if (total == 0) {
      ++report.n_excluded;
      continue;
    }
    const double d = static_cast<double>(total);
    BlockComposition c{f.height, static_cast<double>(f.n_transparent_in) / d,
                       static_cast<double>(f.n_spend + f.n_output) / d,
                       static_cast<double>(f.n_joinsplit) / d};
    in.push_back(c.transparent_in);
    sapling.push_back(c.sapling);
    js.push_back(c.joinsplit);
    report.blocks.push_back(c);
  }
  if (!report.blocks.empty()) {
    report.mean_transparent_in = mean(in);
    report.mean_sapling = mean(sapling);
    report.mean_joinsplit = mean(js);
  }
  return report;
}

std::string format_composition_csv(const CompositionReport& report) {
  std::string out = "height,transparent_in,sapling,joinsplit\n";
  for (const auto& b : report.blocks) {
    out += std::to_string(b.height) + ',' + format_number(b.transparent_in) + ',' +
           format_number(b.sapling) + ',' + format_number(b.joinsplit) + '\n';
  }
  return out;
}

std::string format_composition_summary_csv(const CompositionReport& report) {
  return "n_blocks,n_excluded,mean_transparent_in,mean_sapling,mean_joinsplit\n" +
         std::to_string(report.blocks.size()) + ',' + std::to_string(report.n_excluded) + ',' +
         format_number(report.mean_transparent_in) + ',' + format_number(report.mean_sapling) +
         ',' + format_number(report.mean_joinsplit) + '\n';
}

Dataset generate_synthetic(const SynthSpec& spec) {
  const auto& model = spec.true_model;
  if (model.kind() != ModelKind::joist) {
    throw SpecError("synthetic ground truth must be a joist model");
  }
  if (!(spec.noise_sigma_us >= 0.0) || !(spec.size.noise_sigma_bytes >= 0.0)) {
    throw SpecError("noise sigmas must be non-negative");
  }
  if (spec.n_blocks == 0) throw SpecError("n_blocks must be at least 1");

  const std::pair<const char*, const CountRange*> ranges[] = {
      {"transparent_in", &spec.transparent_in}, {"transparent_out", &spec.transparent_out},
      {"spend", &spec.spend},                   {"output", &spec.output},
      {"joinsplit", &spec.joinsplit}};
  for (const auto& [name, r] : ranges) {
    if (r->lo > r->hi) throw SpecError(std::string("range for ") + name + " is inverted");
  }

  // Largest noiseless time reachable within the ranges.
  const CountRange* by_predictor[] = {&spec.joinsplit, &spec.output, &spec.transparent_in,
                                      &spec.spend};
  double best = model.intercept_us();
  for (std::size_t j = 0; j < 4; ++j) {
    const double beta = model.coefficients()[j];
    best += std::max(beta * static_cast<double>(by_predictor[j]->lo),
                     beta * static_cast<double>(by_predictor[j]->hi));
  }
  if (!(best > 0.0)) {
    throw SpecError("count ranges and coefficients never yield a positive verification time");
  }

  SplitMix64 rng(spec.seed);
  std::vector<VerificationSample> rows;
  rows.reserve(spec.n_blocks);
  for (std::size_t i = 0; i < spec.n_blocks; ++i) {
    BlockFeatures f;
    f.height = spec.start_height + i;
    f.n_transparent_in = draw(rng, spec.transparent_in);
    f.n_transparent_out = draw(rng, spec.transparent_out);
    f.n_spend = draw(rng, spec.spend);
    f.n_output = draw(rng, spec.output);
    f.n_joinsplit = draw(rng, spec.joinsplit);
    const double time_noise = gaussian(rng) * spec.noise_sigma_us;
    const double size_noise = gaussian(rng) * spec.size.noise_sigma_bytes;

    const auto& sz = spec.size;
    const double size = sz.base_bytes +
                        sz.per_transparent_in * static_cast<double>(f.n_transparent_in) +
                        sz.per_transparent_out * static_cast<double>(f.n_transparent_out) +
                        sz.per_spend * static_cast<double>(f.n_spend) +
                        sz.per_output * static_cast<double>(f.n_output) +
                        sz.per_joinsplit * static_cast<double>(f.n_joinsplit) + size_noise;
    f.size_bytes = round_positive(size);
    rows.push_back({f, round_positive(predict(model, f) + time_noise)});
  }
  return Dataset(std::move(rows));
}

SynthSpec synth_spec_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("spec", "synthetic spec is not an object");
  SynthSpec spec;
  try {
    if (doc.contains("true_model")) spec.true_model = model_from_json(doc.at("true_model"));
    spec.noise_sigma_us = doc.value("noise_sigma_us", spec.noise_sigma_us);
    spec.n_blocks = doc.value("n_blocks", spec.n_blocks);
    spec.seed = doc.value("seed", spec.seed);
    spec.start_height = doc.value("start_height", spec.start_height);
    if (auto it = doc.find("ranges"); it != doc.end()) {
      auto range = [&](const char* name, CountRange& r) {
        if (auto v = it->find(name); v != it->end()) {
          if (!v->is_array() || v->size() != 2) {
            throw ParseError(name, std::string("range \"") + name + "\" must be [lo, hi]");
          }
          r = {v->at(0).get<Count>(), v->at(1).get<Count>()};
        }
      };
      range("transparent_in", spec.transparent_in);
      range("transparent_out", spec.transparent_out);
      range("spend", spec.spend);
      range("output", spec.output);
      range("joinsplit", spec.joinsplit);
    }
    if (auto it = doc.find("size"); it != doc.end()) {
      auto& s = spec.size;
      s.base_bytes = it->value("base_bytes", s.base_bytes);
      s.per_transparent_in = it->value("per_transparent_in", s.per_transparent_in);
      s.per_transparent_out = it->value("per_transparent_out", s.per_transparent_out);
      s.per_spend = it->value("per_spend", s.per_spend);
      s.per_output = it->value("per_output", s.per_output);
      s.per_joinsplit = it->value("per_joinsplit", s.per_joinsplit);
      s.noise_sigma_bytes = it->value("noise_sigma_bytes", s.noise_sigma_bytes);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("spec", std::string("invalid synthetic spec: ") + e.what());
  }
  return spec;
}

nlohmann::json synth_spec_to_json(const SynthSpec& spec) {
  auto range = [](const CountRange& r) { return nlohmann::json::array({r.lo, r.hi}); };
  const auto& s = spec.size;
  return {{"true_model", model_to_json(spec.true_model)},
          {"noise_sigma_us", spec.noise_sigma_us},
          {"n_blocks", spec.n_blocks},
          {"seed", spec.seed},
          {"start_height", spec.start_height},
          {"ranges",
           {{"transparent_in", range(spec.transparent_in)},
            {"transparent_out", range(spec.transparent_out)},
            {"spend", range(spec.spend)},
            {"output", range(spec.output)},
            {"joinsplit", range(spec.joinsplit)}}},
          {"size",
           {{"base_bytes", s.base_bytes},
            {"per_transparent_in", s.per_transparent_in},
            {"per_transparent_out", s.per_transparent_out},
            {"per_spend", s.per_spend},
            {"per_output", s.per_output},
            {"per_joinsplit", s.per_joinsplit},
            {"noise_sigma_bytes", s.noise_sigma_bytes}}}};
}

std::filesystem::path plot_line_path(const std::filesystem::path& out) {
  auto p = out;
  p.replace_extension(".line.json");
  return p;
}

LineFit emit_plot_data(const Dataset& predict_set, const ModelSpec& model,
                       const std::filesystem::path& out) {
  const auto predicted = predict_all(model, predict_set.features());
  const auto measured = predict_set.times_us();
  const auto line = fit_line(predicted, measured);

  std::string csv = "height,measured_us,predicted_us\n";
  for (std::size_t i = 0; i < predict_set.size(); ++i) {
    csv += std::to_string(predict_set[i].features.height) + ',' +
           std::to_string(predict_set[i].verify_time_us) + ',' + format_number(predicted[i]) +
           '\n';
  }
  write_text(out, csv);
  const nlohmann::json sidecar = {{"slope", line.slope}, {"intercept_us", line.intercept}};
  write_text(plot_line_path(out), sidecar.dump() + "\n");
  return line;
}

}  // namespace joist
