#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "joist/experiment.hpp"
#include "joist/ingest.hpp"
#include "joist/models.hpp"
#include "mock_node.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = joist::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TempDir {
  fs::path path = fs::temp_directory_path() / "joist_cli_test";
  TempDir() { fs::create_directories(path); }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string write_spec(const TempDir& dir, const nlohmann::json& spec) {
  const auto p = dir / "spec.json";
  std::ofstream(p) << spec.dump();
  return p;
}

// Integer coefficients keep whole-microsecond times exact.
const nlohmann::json kTruth = {{"kind", "joist"},
                               {"coefficients",
                                {{"joinsplit", 5359}, {"output", 5727}, {"transparent_in", 61}, {"spend", 16913}}},
                               {"intercept_us", 4469},
                               {"schema_version", 1}};

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"fit", "--kind", "ridge", "--data", "x", "--out", "y"}).code == 1);
  CHECK(run({"fit", "--kind", "joist", "--data", "x", "--out", "y", "--seed", "3"}).code == 1);
  const auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("compare") != std::string::npos);
}

TEST_CASE("synth, fit, evaluate, predict on exact data") {
  TempDir dir;
  const auto spec = write_spec(dir, {{"true_model", kTruth}, {"n_blocks", 400}, {"seed", 11}});
  const auto data = dir / "data.csv";
  REQUIRE(run({"synth", "--spec", spec, "--out", data}).code == 0);
  CHECK(joist::read_dataset(data).size() == 400);

  const auto model = dir / "model.json";
  auto r = run({"fit", "--kind", "joist", "--data", data, "--out", model});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  const auto fitted = joist::read_model(model);
  CHECK(std::abs(fitted.coefficient("spend") - 16913) < 1e-6 * 16913);

  std::ofstream(dir / "truth.json") << kTruth.dump();
  r = run({"evaluate", "--model", dir / "truth.json", "--data", data});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\"mae_us\":0") != std::string::npos);
  CHECK(r.out.find('\n') == r.out.size() - 1);
  const auto report = nlohmann::json::parse(r.out);
  CHECK(report.at("r2") == 1);
  CHECK(report.at("n") == 400);
  CHECK(report.at("n_exceeding_max_prediction") == 0);

  const auto plot = dir / "plot.csv";
  r = run({"predict", "--model", dir / "truth.json", "--data", data, "--out", plot});
  REQUIRE(r.code == 0);
  CHECK(slurp(plot).rfind("height,measured_us,predicted_us\n", 0) == 0);
  const auto line = nlohmann::json::parse(slurp(dir / "plot.line.json"));
  CHECK(std::abs(line.at("slope").get<double>() - 1.0) < 1e-9);
}

TEST_CASE("fit on a split uses only the fit half") {
  TempDir dir;
  const auto spec = write_spec(dir, {{"noise_sigma_us", 3000}, {"n_blocks", 600}, {"seed", 4}});
  const auto data = dir / "data.csv";
  REQUIRE(run({"synth", "--spec", spec, "--out", data}).code == 0);
  const auto a = dir / "a.json", b = dir / "b.json", c = dir / "c.json";
  REQUIRE(run({"fit", "--kind", "block_size", "--data", data, "--out", a, "--seed", "1", "--n-fit", "200"}).code == 0);
  REQUIRE(run({"fit", "--kind", "block_size", "--data", data, "--out", b, "--seed", "1", "--n-fit", "200"}).code == 0);
  REQUIRE(run({"fit", "--kind", "block_size", "--data", data, "--out", c}).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) != slurp(c));
  CHECK(run({"fit", "--kind", "joist", "--data", data, "--out", a, "--seed", "1", "--n-fit", "600"}).code == 2);
}

TEST_CASE("compare prints the comparison table") {
  TempDir dir;
  const auto spec = write_spec(dir, {{"true_model", kTruth}, {"n_blocks", 1500}, {"seed", 8}});
  const auto data = dir / "data.csv";
  REQUIRE(run({"synth", "--spec", spec, "--out", data}).code == 0);
  const auto r = run({"compare", "--data", data, "--seed", "1", "--n-fit", "500", "--baseline-gervais"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string header, joist_row, size_row, gervais_row;
  std::getline(lines, header);
  std::getline(lines, joist_row);
  std::getline(lines, size_row);
  std::getline(lines, gervais_row);
  CHECK(header == "model,split,n,mae_us,emr,r2,adj_r2,max_abs_error_us,max_prediction_us,n_exceeding");
  CHECK(joist_row.rfind("joist,500/1000,1000,", 0) == 0);
  CHECK(size_row.rfind("block_size,500/1000,1000,", 0) == 0);
  CHECK(gervais_row.rfind("gervais,500/1000,1000,", 0) == 0);

  auto mae = [](const std::string& row) {
    std::istringstream in(row);
    std::string field;
    for (int i = 0; i < 4; ++i) std::getline(in, field, ',');
    return std::stod(field);
  };
  CHECK(mae(joist_row) < mae(size_row));
  CHECK(mae(joist_row) < mae(gervais_row));

  CHECK(run({"compare", "--data", data, "--seed", "1", "--n-fit", "500"}).out ==
        run({"compare", "--data", data, "--seed", "1", "--n-fit", "500"}).out);
}

TEST_CASE("numerical failures exit 4 and name the predictor") {
  TempDir dir;
  const auto spec = write_spec(dir, {{"n_blocks", 100}, {"ranges", {{"spend", {2, 2}}}}});
  const auto data = dir / "data.csv";
  REQUIRE(run({"synth", "--spec", spec, "--out", data}).code == 0);
  const auto r = run({"fit", "--kind", "joist", "--data", data, "--out", dir / "m.json"});
  CHECK(r.code == 4);
  CHECK(r.err.find("spend") != std::string::npos);
  CHECK(r.out.empty());
}

TEST_CASE("data errors exit 2") {
  TempDir dir;
  const auto bad = dir / "bad.csv";
  std::ofstream(bad) << "height,time\n1,2\n";
  CHECK(run({"correlate", "--data", bad}).code == 2);
  CHECK(run({"correlate", "--data", dir / "missing.csv"}).code == 2);
  const auto dup = dir / "dup.csv";
  std::ofstream(dup) << joist::kDatasetHeader << "\n100,1,0,0,0,0,0,5\n100,1,0,0,0,0,0,6\n";
  const auto r = run({"composition", "--data", dup});
  CHECK(r.code == 2);
  CHECK(r.err.find("height 100") != std::string::npos);
}

TEST_CASE("correlate and composition") {
  TempDir dir;
  const auto spec = write_spec(dir, {{"n_blocks", 300}, {"noise_sigma_us", 100}, {"ranges", {{"joinsplit", {0, 0}}}}});
  const auto data = dir / "data.csv";
  REQUIRE(run({"synth", "--spec", spec, "--out", data}).code == 0);

  auto r = run({"correlate", "--data", data});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("feature,r,n\ntransparent_in,", 0) == 0);
  CHECK(r.out.find("joinsplit,degenerate,300\n") != std::string::npos);

  r = run({"composition", "--data", data});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("height,transparent_in,sapling,joinsplit\n", 0) == 0);
  r = run({"composition", "--data", data, "--summary"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("n_blocks,n_excluded,mean_transparent_in,mean_sapling,mean_joinsplit\n", 0) == 0);
}

TEST_CASE("fetch needs an RPC URL and reports transport failures") {
  TempDir dir;
  unsetenv("JOIST_RPC_URL");
  CHECK(run({"fetch", "--from", "1", "--to", "2", "--out", dir / "f.csv"}).code == 1);
  setenv("JOIST_RPC_URL", "http://127.0.0.1:1", 1);
  const auto r = run({"fetch", "--from", "1", "--to", "2", "--out", dir / "f.csv", "--timeout-ms", "300"});
  CHECK(r.code == 3);
  CHECK(r.err.find("127.0.0.1:1") != std::string::npos);
  unsetenv("JOIST_RPC_URL");
}

TEST_CASE("fetch writes a features file from the node") {
  TempDir dir;
  mock::MockNode node;
  node.blocks[500] = mock::block(500, {mock::tx(0, 1, 0, 0, 0, true)}, 400);
  node.blocks[501] = mock::block(501, {mock::tx(0, 1, 0, 0, 0, true), mock::tx(3, 2, 1, 2, 1)}, 7000);
  setenv("JOIST_RPC_URL", node.url().c_str(), 1);
  setenv("JOIST_RPC_USER", node.user.c_str(), 1);
  setenv("JOIST_RPC_PASS", node.pass.c_str(), 1);
  const auto out = dir / "features.csv";
  const auto r = run({"fetch", "--from", "500", "--to", "501", "--out", out, "--parallel", "2"});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  CHECK(r.err.find("verify_time_us") != std::string::npos);
  CHECK(slurp(out) == std::string(joist::kDatasetHeader) + "\n500,400,0,1,0,0,0,0\n501,7000,3,3,1,2,1,0\n");

  CHECK(run({"fetch", "--from", "500", "--to", "502", "--out", out}).code == 2);
  setenv("JOIST_RPC_PASS", "nope", 1);
  CHECK(run({"fetch", "--from", "500", "--to", "500", "--out", out}).code == 3);
  unsetenv("JOIST_RPC_URL");
  unsetenv("JOIST_RPC_USER");
  unsetenv("JOIST_RPC_PASS");
}
