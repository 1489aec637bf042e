#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "joist/error.hpp"
#include "joist/experiment.hpp"
#include "joist/fit.hpp"
#include "joist/ingest.hpp"
#include "joist/models.hpp"
#include "joist/stats.hpp"

namespace joist::cli {
namespace {

// Integral values print without a fractional part.
nlohmann::json json_number(double v) {
  if (std::isfinite(v) && v == std::trunc(v) && std::abs(v) < 0x1.0p53) {
    return static_cast<std::int64_t>(v);
  }
  return v;
}

nlohmann::json report_to_json(const EvalReport& r) {
  return {{"n", r.n},
          {"mae_us", json_number(r.mae_us)},
          {"emr", json_number(r.emr)},
          {"r2", json_number(r.r2)},
          {"adj_r2", r.adj_r2 ? json_number(*r.adj_r2) : nlohmann::json(nullptr)},
          {"max_abs_error_us", json_number(r.max_abs_error_us)},
          {"max_prediction_us", json_number(r.max_prediction_us)},
          {"n_exceeding_max_prediction", r.n_exceeding_max_prediction},
          {"mean_observed_us", json_number(r.mean_observed_us)}};
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string{};
}

int exit_code_for(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::usage: return kUsageError;
    case ErrorCategory::data: return kDataError;
    case ErrorCategory::remote: return kRemoteError;
    case ErrorCategory::numerical: return kNumericalError;
  }
  return kDataError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Model, fit and evaluate block verification time from transaction features",
               "joist"};
  app.require_subcommand(1, 1);

  // fetch
  auto* fetch = app.add_subcommand(
      "fetch", "Fetch block features from a node (JOIST_RPC_URL, JOIST_RPC_USER, JOIST_RPC_PASS)");
  Height from = 0, to = 0;
  std::size_t parallel = 4;
  long timeout_ms = 30'000;
  std::string fetch_out;
  fetch->add_option("--from", from, "First block height")->required();
  fetch->add_option("--to", to, "Last block height (inclusive)")->required();
  fetch->add_option("--out", fetch_out, "Features CSV to write")->required();
  fetch->add_option("--parallel", parallel, "Concurrent requests")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fetch->add_option("--timeout-ms", timeout_ms, "Per-request timeout")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  std::string synth_spec, synth_out;
  synth->add_option("--spec", synth_spec, "Synthetic spec JSON")->required();
  synth->add_option("--out", synth_out, "Dataset CSV to write")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a model by ordinary least squares");
  std::string fit_kind, fit_data, fit_out;
  std::optional<std::uint64_t> fit_seed;
  std::optional<std::size_t> fit_n;
  fit->add_option("--kind", fit_kind, "Model kind")
      ->required()
      ->check(CLI::IsMember({"joist", "block_size"}));
  fit->add_option("--data", fit_data, "Dataset CSV")->required();
  fit->add_option("--out", fit_out, "Model JSON to write")->required();
  auto* seed_opt = fit->add_option("--seed", fit_seed, "Split seed; fit on the fit half only");
  auto* nfit_opt = fit->add_option("--n-fit", fit_n, "Rows in the fit half");
  seed_opt->needs(nfit_opt);
  nfit_opt->needs(seed_opt);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Write measured vs predicted plot data");
  std::string pred_model, pred_data, pred_out;
  predict_cmd->add_option("--model", pred_model, "Model JSON")->required();
  predict_cmd->add_option("--data", pred_data, "Dataset CSV")->required();
  predict_cmd->add_option("--out", pred_out, "Plot CSV to write")->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Evaluate a model on a dataset");
  std::string eval_model, eval_data;
  eval->add_option("--model", eval_model, "Model JSON")->required();
  eval->add_option("--data", eval_data, "Dataset CSV")->required();

  // compare
  auto* compare = app.add_subcommand("compare", "Fit and compare models on a random split");
  std::string cmp_data;
  std::uint64_t cmp_seed = 0;
  std::size_t cmp_n_fit = 0;
  bool cmp_gervais = false;
  std::vector<std::string> cmp_kinds{"joist", "block_size"};
  compare->add_option("--data", cmp_data, "Dataset CSV")->required();
  compare->add_option("--seed", cmp_seed, "Split seed")->required();
  compare->add_option("--n-fit", cmp_n_fit, "Rows in the fit half")->required();
  compare->add_option("--kinds", cmp_kinds, "Fitted model kinds")
      ->delimiter(',')
      ->check(CLI::IsMember({"joist", "block_size"}))
      ->capture_default_str();
  compare->add_flag("--baseline-gervais", cmp_gervais, "Add the 0.3796 us/B fixed-rate baseline");

  // correlate
  auto* correlate = app.add_subcommand("correlate", "Pearson r of each feature with time");
  std::string cor_data;
  correlate->add_option("--data", cor_data, "Dataset CSV")->required();

  // composition
  auto* composition = app.add_subcommand("composition", "Per-block transaction composition");
  std::string comp_data;
  bool comp_summary = false;
  composition->add_option("--data", comp_data, "Dataset CSV")->required();
  composition->add_flag("--summary", comp_summary, "Print only the dataset means");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "joist: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (*fetch) {
      RpcEndpoint endpoint;
      endpoint.url = env_or_empty("JOIST_RPC_URL");
      if (endpoint.url.empty()) {
        err << "joist: JOIST_RPC_URL is not set\n";
        return kUsageError;
      }
      endpoint.credentials = {env_or_empty("JOIST_RPC_USER"), env_or_empty("JOIST_RPC_PASS")};
      endpoint.timeout = std::chrono::milliseconds(timeout_ms);
      endpoint.max_parallel = parallel;
      if (from > to) {
        err << "joist: --from must not exceed --to\n";
        return kUsageError;
      }
      const auto blocks = fetch_block_features(endpoint, {from, to});
      write_features_csv(blocks, fetch_out);
      err << "joist: wrote " << blocks.size() << " blocks to " << fetch_out
          << "; verify_time_us is 0 and must be filled in before fitting\n";
    } else if (*synth) {
      std::ifstream in(synth_spec, std::ios::binary);
      if (!in) throw Error(ErrorCategory::data, "cannot open spec " + synth_spec);
      std::ostringstream buf;
      buf << in.rdbuf();
      auto doc = nlohmann::json::parse(buf.str(), nullptr, false);
      if (doc.is_discarded()) throw ParseError("spec", synth_spec + " is not valid JSON");
      write_dataset(generate_synthetic(synth_spec_from_json(doc)), synth_out);
    } else if (*fit) {
      const auto kind = model_kind_from_string(fit_kind);
      const auto ds = read_dataset(fit_data);
      FitResult result = [&] {
        if (fit_seed) {
          if (*fit_n >= ds.size()) {
            throw ShapeError("--n-fit must be smaller than the dataset (" +
                             std::to_string(ds.size()) + " rows)");
          }
          const auto halves = split(ds, {*fit_seed, *fit_n, ds.size() - *fit_n});
          return ols_fit(kind, halves.fit_set);
        }
        return ols_fit(kind, ds);
      }();
      if (result.condition_warning) err << "joist: warning: " << *result.condition_warning << "\n";
      write_model(result.model, fit_out);
    } else if (*predict_cmd) {
      emit_plot_data(read_dataset(pred_data), read_model(pred_model), pred_out);
    } else if (*eval) {
      const auto model = read_model(eval_model);
      const auto ds = read_dataset(eval_data);
      const auto predicted = predict_all(model, ds.features());
      const auto report = evaluate(ds.times_us(), predicted, predictor_count(model.kind()));
      out << report_to_json(report).dump() << "\n";
    } else if (*compare) {
      const auto ds = read_dataset(cmp_data);
      if (cmp_n_fit >= ds.size()) {
        throw ShapeError("--n-fit must be smaller than the dataset (" +
                         std::to_string(ds.size()) + " rows)");
      }
      std::vector<ModelKind> kinds;
      for (const auto& k : cmp_kinds) kinds.push_back(model_kind_from_string(k));
      std::vector<NamedModel> baselines;
      if (cmp_gervais) baselines.push_back({"gervais", gervais_baseline()});
      const auto rows =
          run_comparison(ds, {cmp_seed, cmp_n_fit, ds.size() - cmp_n_fit}, kinds, baselines);
      out << format_comparison_csv(rows);
    } else if (*correlate) {
      out << format_correlation_csv(correlation_table(read_dataset(cor_data)));
    } else if (*composition) {
      const auto report = composition_analysis(read_dataset(comp_data));
      out << (comp_summary ? format_composition_summary_csv(report)
                           : format_composition_csv(report));
      if (report.n_excluded > 0) {
        err << "joist: excluded " << report.n_excluded << " blocks without inputs or descriptions\n";
      }
    }
  } catch (const Error& e) {
    err << "joist: " << e.what() << "\n";
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    err << "joist: " << e.what() << "\n";
    return kDataError;
  }
  return kSuccess;
}

}  // namespace joist::cli
