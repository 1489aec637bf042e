#include "joist/features.hpp"

#include <string>

#include "joist/error.hpp"

namespace joist {
namespace {

const nlohmann::json& required_array(const nlohmann::json& tx, const char* field) {
  auto it = tx.find(field);
  if (it == tx.end()) {
    throw ParseError(field, std::string("transaction record is missing \"") + field + "\"");
  }
  if (!it->is_array()) {
    throw ParseError(field, std::string("transaction field \"") + field + "\" is not an array");
  }
  return *it;
}

Count optional_array_size(const nlohmann::json& tx, const char* field) {
  auto it = tx.find(field);
  if (it == tx.end() || it->is_null()) return 0;
  if (!it->is_array()) {
    throw ParseError(field, std::string("transaction field \"") + field + "\" is not an array");
  }
  return it->size();
}

}  // namespace

TxFeatures extract_tx_features(const nlohmann::json& tx) {
  if (!tx.is_object()) throw ParseError("tx", "transaction record is not an object");

  TxFeatures f;
  for (const auto& in : required_array(tx, "vin")) {
    if (in.is_object() && in.contains("coinbase")) {
      f.is_coinbase = true;
    } else {
      ++f.n_transparent_in;
    }
  }
  f.n_transparent_out = required_array(tx, "vout").size();
  f.n_spend = optional_array_size(tx, "vShieldedSpend");
  f.n_output = optional_array_size(tx, "vShieldedOutput");
  f.n_joinsplit = optional_array_size(tx, "vjoinsplit");
  return f;
}

BlockFeatures aggregate_block(std::span<const TxFeatures> txs, Height height,
                              std::uint64_t size_bytes) {
  if (txs.empty()) {
    throw ShapeError("block " + std::to_string(height) + " has no transactions");
  }
  if (size_bytes == 0) {
    throw IntegrityError("block " + std::to_string(height) + " has size 0");
  }
  BlockFeatures b;
  b.height = height;
  b.size_bytes = size_bytes;
  for (const auto& tx : txs) {
    b.n_transparent_in += tx.n_transparent_in;
    b.n_transparent_out += tx.n_transparent_out;
    b.n_spend += tx.n_spend;
    b.n_output += tx.n_output;
    b.n_joinsplit += tx.n_joinsplit;
  }
  return b;
}

}  // namespace joist
