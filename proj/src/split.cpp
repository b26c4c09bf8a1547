#include "thyrofna/split.hpp"

#include "thyrofna/error.hpp"
#include "thyrofna/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace thyrofna {

std::array<int, 3> largest_remainder_counts(int total, const std::array<double, 3> &ratios) {
  std::array<int, 3> counts{};
  std::array<double, 3> fractions{};
  int assigned = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double quota = static_cast<double>(total) * ratios[k];
    // Guard against quotas like 6.9999999999 that are integral in exact arithmetic.
    const double floored = std::floor(quota + 1e-9);
    counts[k] = static_cast<int>(floored);
    fractions[k] = std::max(0.0, quota - floored);
    assigned += counts[k];
  }
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fractions[a] > fractions[b] + 1e-12; });
  for (int r = 0, i = 0; r < total - assigned; ++r, i = (i + 1) % 3) {
    ++counts[order[static_cast<std::size_t>(i)]];
  }
  return counts;
}

std::vector<ImageRecord> split_dataset(std::vector<ImageRecord> records, const SplitSpec &spec) {
  spec.validate();
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto &record = records[i];
    if (record.split == SplitTag::EXTERNAL) {
      continue;
    }
    if (record.split != SplitTag::UNSPLIT) {
      fail(ErrorCode::SplitViolation, "record '" + record.id + "' is already assigned to a split");
    }
    if (!record.label) {
      fail(ErrorCode::UnlabeledRecord, "record '" + record.id + "' has no label");
    }
    by_class[static_cast<std::size_t>(label_index(*record.label))].push_back(i);
  }

  constexpr std::array<SplitTag, 3> kTargets = {SplitTag::TRAIN, SplitTag::VAL, SplitTag::TEST};
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto &indices = by_class[c];
    // Sort by id first so the assignment does not depend on manifest order.
    std::sort(indices.begin(), indices.end(),
              [&](std::size_t a, std::size_t b) { return records[a].id < records[b].id; });
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(c)));
    rng.shuffle(std::span<std::size_t>(indices));
    const auto counts = largest_remainder_counts(static_cast<int>(indices.size()), spec.ratios);
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      for (int n = 0; n < counts[k]; ++n) {
        records[indices[cursor++]].split = kTargets[k];
      }
    }
  }
  return records;
}

std::vector<ImageRecord> records_in_split(const std::vector<ImageRecord> &records, SplitTag split) {
  std::vector<ImageRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [split](const ImageRecord &r) { return r.split == split; });
  return out;
}

} // namespace thyrofna
