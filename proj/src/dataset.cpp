#include "joist/dataset.hpp"

#include <algorithm>
#include <string>

#include "joist/error.hpp"

namespace joist {

Dataset::Dataset(std::vector<VerificationSample> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw IntegrityError("dataset is empty");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    const auto h = std::to_string(s.features.height);
    if (i > 0) {
      const auto prev = samples_[i - 1].features.height;
      if (prev == s.features.height) throw IntegrityError("duplicate height " + h);
      if (prev > s.features.height) {
        throw IntegrityError("heights not increasing at height " + h);
      }
    }
    if (s.verify_time_us == 0) {
      throw IntegrityError("non-positive verify_time_us at height " + h);
    }
    if (s.features.size_bytes == 0) {
      throw IntegrityError("non-positive size_bytes at height " + h);
    }
  }
}

Dataset Dataset::from_unordered(std::vector<VerificationSample> samples) {
  std::stable_sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) {
    return a.features.height < b.features.height;
  });
  return Dataset(std::move(samples));
}

std::vector<BlockFeatures> Dataset::features() const {
  std::vector<BlockFeatures> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.features);
  return out;
}

std::vector<double> Dataset::times_us() const {
  std::vector<double> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(static_cast<double>(s.verify_time_us));
  return out;
}

}  // namespace joist
