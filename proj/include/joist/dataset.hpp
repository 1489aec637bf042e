#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "joist/features.hpp"

namespace joist {

/// One observation: block features and the measured verification time.
struct VerificationSample {
  BlockFeatures features;
  std::uint64_t verify_time_us = 0;

  friend bool operator==(const VerificationSample&, const VerificationSample&) = default;
};

/// Non-empty sequence of samples with strictly increasing heights.
///
/// Every constructor validates; a Dataset that exists satisfies its
/// invariants. Throws IntegrityError naming the first offending height.
class Dataset {
 public:
  /// Takes samples that must already be in strictly increasing height order.
  explicit Dataset(std::vector<VerificationSample> samples);

  /// Sorts by height first, then validates.
  static Dataset from_unordered(std::vector<VerificationSample> samples);

  std::size_t size() const noexcept { return samples_.size(); }
  std::span<const VerificationSample> samples() const noexcept { return samples_; }
  const VerificationSample& operator[](std::size_t i) const { return samples_[i]; }
  auto begin() const noexcept { return samples_.begin(); }
  auto end() const noexcept { return samples_.end(); }

  std::vector<BlockFeatures> features() const;
  std::vector<double> times_us() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<VerificationSample> samples_;
};

}  // namespace joist
