#pragma once

#include "thyrofna/core_types.hpp"

#include <array>
#include <vector>

namespace thyrofna {

// Largest-remainder apportionment of `total` items by `ratios`. Ties in the
// fractional part go to the earlier slot.
std::array<int, 3> largest_remainder_counts(int total, const std::array<double, 3> &ratios);

// Stratified, seeded TRAIN/VAL/TEST assignment. EXTERNAL records pass through
// untouched; every other record must be UNSPLIT and labeled.
std::vector<ImageRecord> split_dataset(std::vector<ImageRecord> records, const SplitSpec &spec);

std::vector<ImageRecord> records_in_split(const std::vector<ImageRecord> &records, SplitTag split);

} // namespace thyrofna
