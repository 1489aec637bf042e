#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "joist/dataset.hpp"
#include "joist/features.hpp"

namespace joist {

/// Exact header of the dataset interchange CSV.
inline constexpr std::string_view kDatasetHeader =
    "height,size_bytes,n_transparent_in,n_transparent_out,n_spend,n_output,n_joinsplit,"
    "verify_time_us";

struct RpcCredentials {
  std::string username;
  std::string password;
};

/// A node's JSON-RPC endpoint, e.g. `http://127.0.0.1:8232`.
struct RpcEndpoint {
  std::string url;
  RpcCredentials credentials;
  std::chrono::milliseconds timeout{30'000};
  std::size_t max_parallel = 4;
};

struct HeightRange {
  Height lo = 0;
  Height hi = 0;  // inclusive
};

/// Builds the features of a block from its verbose JSON record (`getblock`
/// with verbosity 2). Throws ParseError naming the missing field and height.
BlockFeatures block_features_from_json(const nlohmann::json& block, Height expected_height);

/// Fetches one BlockFeatures per height in `range`, ascending. Issues at most
/// `endpoint.max_parallel` requests at a time.
///
/// Throws ConnectionError on transport, authentication or RPC failures,
/// RangeError when the node does not know a height, and ParseError on
/// malformed block records. When several heights fail, the error for the
/// lowest height is reported.
std::vector<BlockFeatures> fetch_block_features(const RpcEndpoint& endpoint, HeightRange range);

Dataset read_dataset(const std::filesystem::path& path);
void write_dataset(const Dataset& ds, const std::filesystem::path& path);

/// Writes features in the dataset layout with `verify_time_us` set to 0.
/// Such a file is rejected by read_dataset until measured times are merged in.
void write_features_csv(std::span<const BlockFeatures> blocks, const std::filesystem::path& path);

/// Parses dataset CSV text. `source` is used in error messages.
Dataset parse_dataset_csv(std::string_view text, std::string_view source = "<memory>");
std::string format_dataset_csv(const Dataset& ds);

}  // namespace joist
