#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

namespace joist {

using Height = std::uint64_t;
using Count = std::uint64_t;

/// Per-transaction counts of the components that drive verification cost.
struct TxFeatures {
  Count n_transparent_in = 0;   // inputs spending a previous output; coinbase input excluded
  Count n_transparent_out = 0;  // only used for correlation reporting
  Count n_spend = 0;            // Sapling Spend descriptions
  Count n_output = 0;           // Sapling Output descriptions
  Count n_joinsplit = 0;        // JoinSplit descriptions, one per description
  bool is_coinbase = false;

  friend bool operator==(const TxFeatures&, const TxFeatures&) = default;
};

/// Block-level sums of TxFeatures plus block identity and serialized size.
struct BlockFeatures {
  Height height = 0;
  std::uint64_t size_bytes = 0;
  Count n_transparent_in = 0;
  Count n_transparent_out = 0;
  Count n_spend = 0;
  Count n_output = 0;
  Count n_joinsplit = 0;

  friend bool operator==(const BlockFeatures&, const BlockFeatures&) = default;
};

/// Counts the components of one decoded transaction as returned by the node's
/// verbose block RPC (`vin`, `vout`, `vShieldedSpend`, `vShieldedOutput`,
/// `vjoinsplit`). `vin` and `vout` are mandatory; absent shielded lists count
/// as zero. Throws ParseError naming the offending field.
TxFeatures extract_tx_features(const nlohmann::json& tx);

/// Sums per-transaction counts into a block. Throws ShapeError for an empty
/// transaction list and IntegrityError for a zero size.
BlockFeatures aggregate_block(std::span<const TxFeatures> txs, Height height,
                              std::uint64_t size_bytes);

}  // namespace joist
