#include "joist/ingest.hpp"

#include <array>
#include <atomic>
#include <charconv>
#include <exception>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <httplib.h>

#include "joist/error.hpp"

namespace joist {
namespace {

constexpr std::size_t kColumns = 8;
constexpr std::array<std::string_view, kColumns> kColumnNames = {
    "height",  "size_bytes", "n_transparent_in", "n_transparent_out",
    "n_spend", "n_output",   "n_joinsplit",      "verify_time_us"};

std::string location(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

std::uint64_t parse_field(std::string_view text, std::size_t column, std::string_view source,
                          std::size_t line) {
  const auto name = std::string(kColumnNames[column]);
  std::string_view digits = text;
  const bool negative = !digits.empty() && digits.front() == '-';
  if (negative) digits.remove_prefix(1);

  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw ParseError(name, location(source, line) + ": field " + name +
                               " is not a base-10 integer: \"" + std::string(text) + "\"");
  }
  if (negative && value != 0) {
    throw IntegrityError(location(source, line) + ": negative " + name);
  }
  return value;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::data, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out.flush()) throw Error(ErrorCategory::data, "failed writing " + path.string());
}

void append_row(std::string& out, const BlockFeatures& b, std::uint64_t time_us) {
  for (std::uint64_t v : {b.height, b.size_bytes, b.n_transparent_in, b.n_transparent_out,
                          b.n_spend, b.n_output, b.n_joinsplit}) {
    out += std::to_string(v);
    out += ',';
  }
  out += std::to_string(time_us);
  out += '\n';
}

// ---------------------------------------------------------------------------
// JSON-RPC

struct ParsedUrl {
  std::string host;
  int port = 80;
  std::string path = "/";
};

ParsedUrl parse_url(const std::string& url) {
  constexpr std::string_view scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    throw ConnectionError("unsupported RPC URL \"" + url + "\" (expected http://host:port)");
  }
  std::string rest = url.substr(scheme.size());
  ParsedUrl parsed;
  if (auto slash = rest.find('/'); slash != std::string::npos) {
    parsed.path = rest.substr(slash);
    rest.resize(slash);
  }
  if (auto colon = rest.rfind(':'); colon != std::string::npos) {
    const auto port = rest.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), parsed.port);
    if (port.empty() || ec != std::errc{} || ptr != port.data() + port.size()) {
      throw ConnectionError("invalid port in RPC URL \"" + url + "\"");
    }
    rest.resize(colon);
  }
  if (rest.empty()) throw ConnectionError("missing host in RPC URL \"" + url + "\"");
  parsed.host = rest;
  return parsed;
}

class RpcClient {
 public:
  RpcClient(const RpcEndpoint& endpoint, const ParsedUrl& url)
      : endpoint_(endpoint), path_(url.path), client_(url.host, url.port) {
    if (!endpoint.credentials.username.empty() || !endpoint.credentials.password.empty()) {
      client_.set_basic_auth(endpoint.credentials.username, endpoint.credentials.password);
    }
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
    const auto usecs =
        std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
    client_.set_connection_timeout(secs.count(), usecs.count());
    client_.set_read_timeout(secs.count(), usecs.count());
    client_.set_write_timeout(secs.count(), usecs.count());
  }

  nlohmann::json call(const std::string& method, nlohmann::json params, Height height) {
    const nlohmann::json request = {{"jsonrpc", "1.0"},
                                    {"id", "joist-" + std::to_string(height)},
                                    {"method", method},
                                    {"params", std::move(params)}};
    auto res = client_.Post(path_, request.dump(), "text/plain");
    if (!res) {
      throw ConnectionError("cannot reach " + endpoint_.url + " (" + method + "): " +
                            httplib::to_string(res.error()));
    }
    if (res->status == 401 || res->status == 403) {
      throw ConnectionError("authentication failed at " + endpoint_.url + " (HTTP " +
                            std::to_string(res->status) + ")");
    }
    auto reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object()) {
      throw ConnectionError("malformed JSON-RPC reply from " + endpoint_.url + " (HTTP " +
                            std::to_string(res->status) + ")");
    }
    if (auto err = reply.find("error"); err != reply.end() && !err->is_null()) {
      const int code = err->value("code", 0);
      const auto message = err->value("message", std::string("unknown error"));
      // -8: invalid parameter (height out of range), -5: block not found.
      if (code == -8 || code == -5) {
        throw RangeError("unknown height " + std::to_string(height) + ": " + message);
      }
      throw ConnectionError(endpoint_.url + " " + method + " failed (" + std::to_string(code) +
                            "): " + message);
    }
    if (res->status != 200) {
      throw ConnectionError("HTTP " + std::to_string(res->status) + " from " + endpoint_.url);
    }
    auto result = reply.find("result");
    if (result == reply.end()) {
      throw ConnectionError("JSON-RPC reply from " + endpoint_.url + " has no result");
    }
    return *result;
  }

  BlockFeatures block_at(Height height) {
    auto hash = call("getblockhash", nlohmann::json::array({height}), height);
    if (!hash.is_string()) {
      throw ParseError("result", "getblockhash returned a non-string at height " +
                                     std::to_string(height));
    }
    auto block = call("getblock", nlohmann::json::array({hash, 2}), height);
    return block_features_from_json(block, height);
  }

 private:
  const RpcEndpoint& endpoint_;
  std::string path_;
  httplib::Client client_;
};

}  // namespace

BlockFeatures block_features_from_json(const nlohmann::json& block, Height expected_height) {
  const auto where = "block " + std::to_string(expected_height);
  if (!block.is_object()) throw ParseError("block", where + ": record is not an object");

  if (auto h = block.find("height"); h != block.end()) {
    if (!h->is_number_unsigned() || h->get<Height>() != expected_height) {
      throw ParseError("height", where + ": record reports a different height");
    }
  }
  auto size = block.find("size");
  if (size == block.end() || !size->is_number_unsigned() || size->get<std::uint64_t>() == 0) {
    throw ParseError("size", where + ": missing or invalid \"size\"");
  }
  auto txs = block.find("tx");
  if (txs == block.end() || !txs->is_array()) {
    throw ParseError("tx", where + ": missing or invalid \"tx\"");
  }

  std::vector<TxFeatures> features;
  features.reserve(txs->size());
  for (const auto& tx : *txs) {
    if (tx.is_string()) {
      throw ParseError("tx", where + ": transactions are not decoded (verbosity must be 2)");
    }
    try {
      features.push_back(extract_tx_features(tx));
    } catch (const ParseError& e) {
      throw ParseError(e.field(), where + ": " + e.what());
    }
  }
  if (features.empty()) throw ParseError("tx", where + ": block has no transactions");
  return aggregate_block(features, expected_height, size->get<std::uint64_t>());
}

std::vector<BlockFeatures> fetch_block_features(const RpcEndpoint& endpoint, HeightRange range) {
  if (range.lo > range.hi) throw ShapeError("empty height range");
  if (endpoint.max_parallel == 0) throw SpecError("max_parallel must be at least 1");
  if (endpoint.timeout.count() <= 0) throw SpecError("RPC timeout must be positive");
  const auto url = parse_url(endpoint.url);

  const std::size_t count = range.hi - range.lo + 1;
  std::vector<std::optional<BlockFeatures>> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&] {
    RpcClient client(endpoint, url);
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        results[i] = client.block_at(range.lo + i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };

  const std::size_t n_threads = std::min(endpoint.max_parallel, count);
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<BlockFeatures> out;
  out.reserve(count);
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

Dataset parse_dataset_csv(std::string_view text, std::string_view source) {
  std::vector<VerificationSample> samples;
  std::size_t line_no = 0;
  bool header_seen = false;

  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;

    if (!header_seen) {
      if (line != kDatasetHeader) {
        throw FormatError(std::string(source) + ": header mismatch, expected \"" +
                          std::string(kDatasetHeader) + "\"");
      }
      header_seen = true;
      continue;
    }
    if (line.empty() && text.empty()) break;

    std::array<std::uint64_t, kColumns> v{};
    std::size_t column = 0;
    while (true) {
      const auto comma = line.find(',');
      if (column >= kColumns) {
        throw FormatError(location(source, line_no) + ": expected " +
                          std::to_string(kColumns) + " fields");
      }
      v[column] = parse_field(line.substr(0, comma), column, source, line_no);
      ++column;
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (column != kColumns) {
      throw FormatError(location(source, line_no) + ": expected " + std::to_string(kColumns) +
                        " fields, found " + std::to_string(column));
    }

    VerificationSample s;
    s.features = {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
    s.verify_time_us = v[7];
    samples.push_back(s);
  }

  if (!header_seen) throw FormatError(std::string(source) + ": empty file");
  if (samples.empty()) throw IntegrityError(std::string(source) + ": dataset has no rows");
  try {
    return Dataset::from_unordered(std::move(samples));
  } catch (const IntegrityError& e) {
    throw IntegrityError(std::string(source) + ": " + e.what());
  }
}

std::string format_dataset_csv(const Dataset& ds) {
  std::string out(kDatasetHeader);
  out += '\n';
  for (const auto& s : ds) append_row(out, s.features, s.verify_time_us);
  return out;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::data, "cannot open dataset " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset_csv(buf.str(), path.string());
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_text(path, format_dataset_csv(ds));
}

void write_features_csv(std::span<const BlockFeatures> blocks, const std::filesystem::path& path) {
  std::string out(kDatasetHeader);
  out += '\n';
  for (const auto& b : blocks) append_row(out, b, 0);
  write_text(path, out);
}

}  // namespace joist
