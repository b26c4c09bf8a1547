#pragma once

#include "thyrofna/augmentation.hpp"

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace thyrofna {

// Block order within every epoch: local crops first, full images last.
inline constexpr std::array<SetTag, 5> kCurriculumOrder = {SetTag::E, SetTag::D, SetTag::C,
                                                           SetTag::B, SetTag::A};

int curriculum_rank(SetTag tag);

struct EpochSchedule {
  int epoch_index = 0;
  std::uint64_t seed = 0;
  // Indices into the sample list the schedule was built from.
  std::vector<std::size_t> order;

  std::size_t size() const { return order.size(); }
};

// Blocks E,D,C,B,A; each block is a Fisher-Yates shuffle keyed by
// (seed, epoch_index, set_tag). Throws MixedSplit on non-TRAIN samples.
EpochSchedule build_epoch(std::span<const AugmentedSample> samples, int epoch_index, std::uint64_t seed);

// Seeded shuffle with no block structure (the no-augmentation baseline).
EpochSchedule build_shuffled_epoch(std::span<const AugmentedSample> samples, int epoch_index,
                                   std::uint64_t seed);

// Consecutive chunks of the schedule, in order; the last one may be short.
class BatchIterator {
public:
  BatchIterator(const EpochSchedule &schedule, std::size_t batch_size);

  std::size_t num_batches() const;
  std::span<const std::size_t> batch(std::size_t index) const;

private:
  const EpochSchedule *schedule_;
  std::size_t batch_size_;
};

std::vector<std::vector<std::size_t>> batch_iterator(const EpochSchedule &schedule, std::size_t batch_size);

// Audit rows: epoch, position, source_id, set_tag.
nlohmann::json schedule_to_json(const EpochSchedule &schedule, std::span<const AugmentedSample> samples);

} // namespace thyrofna
