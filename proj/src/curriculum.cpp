#include "thyrofna/curriculum.hpp"

#include "thyrofna/error.hpp"
#include "thyrofna/rng.hpp"

#include <nlohmann/json.hpp>

namespace thyrofna {

int curriculum_rank(SetTag tag) {
  for (std::size_t i = 0; i < kCurriculumOrder.size(); ++i) {
    if (kCurriculumOrder[i] == tag) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

EpochSchedule build_epoch(std::span<const AugmentedSample> samples, int epoch_index, std::uint64_t seed) {
  std::array<std::vector<std::size_t>, kCurriculumOrder.size()> blocks;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].split != SplitTag::TRAIN) {
      fail(ErrorCode::MixedSplit, "sample from '" + samples[i].source_id + "' is not TRAIN");
    }
    blocks[static_cast<std::size_t>(curriculum_rank(samples[i].set_tag))].push_back(i);
  }
  EpochSchedule schedule{epoch_index, seed, {}};
  schedule.order.reserve(samples.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(epoch_index),
                        static_cast<std::uint64_t>(kCurriculumOrder[b])));
    rng.shuffle(std::span<std::size_t>(blocks[b]));
    schedule.order.insert(schedule.order.end(), blocks[b].begin(), blocks[b].end());
  }
  return schedule;
}

EpochSchedule build_shuffled_epoch(std::span<const AugmentedSample> samples, int epoch_index,
                                   std::uint64_t seed) {
  EpochSchedule schedule{epoch_index, seed, {}};
  schedule.order.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].split != SplitTag::TRAIN) {
      fail(ErrorCode::MixedSplit, "sample from '" + samples[i].source_id + "' is not TRAIN");
    }
    schedule.order[i] = i;
  }
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(epoch_index), 0xA11ULL));
  rng.shuffle(std::span<std::size_t>(schedule.order));
  return schedule;
}

BatchIterator::BatchIterator(const EpochSchedule &schedule, std::size_t batch_size)
    : schedule_(&schedule), batch_size_(batch_size) {
  if (batch_size_ == 0) {
    fail(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  }
}

std::size_t BatchIterator::num_batches() const {
  return (schedule_->order.size() + batch_size_ - 1) / batch_size_;
}

std::span<const std::size_t> BatchIterator::batch(std::size_t index) const {
  const std::size_t begin = index * batch_size_;
  const std::size_t end = std::min(schedule_->order.size(), begin + batch_size_);
  return std::span<const std::size_t>(schedule_->order).subspan(begin, end - begin);
}

std::vector<std::vector<std::size_t>> batch_iterator(const EpochSchedule &schedule, std::size_t batch_size) {
  const BatchIterator it(schedule, batch_size);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < it.num_batches(); ++i) {
    const auto b = it.batch(i);
    batches.emplace_back(b.begin(), b.end());
  }
  return batches;
}

nlohmann::json schedule_to_json(const EpochSchedule &schedule, std::span<const AugmentedSample> samples) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t pos = 0; pos < schedule.order.size(); ++pos) {
    const auto &s = samples[schedule.order[pos]];
    rows.push_back({{"epoch", schedule.epoch_index},
                    {"position", pos},
                    {"source_id", s.source_id},
                    {"set_tag", set_tag_name(s.set_tag)}});
  }
  return rows;
}

} // namespace thyrofna
