#pragma once

#include "thyrofna/augmentation.hpp"
#include "thyrofna/core_types.hpp"
#include "thyrofna/region_proposal.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

namespace thyrofna {

// Reads a record's image and applies the first-stage (canonical) resize.
cv::Mat load_canonical(const ImageRecord &record);

// Training samples paired with their 224x224 model inputs.
class SampleSet {
public:
  void add(AugmentedSample sample, cv::Mat model_input);
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  std::span<const AugmentedSample> samples() const { return samples_; }
  const AugmentedSample &sample(std::size_t i) const { return samples_[i]; }
  const cv::Mat &input(std::size_t i) const { return inputs_[i]; }

private:
  std::vector<AugmentedSample> samples_;
  std::vector<cv::Mat> inputs_;
};

struct TrainingSetOptions {
  bool augment = true;       // 34 samples per record; otherwise Set A only
  std::uint64_t seed = 42;   // global augmentation seed
};

// Proposes regions, expands every TRAIN record, and materializes the inputs.
SampleSet build_training_set(std::span<const ImageRecord> train_records, const RegionProposer &proposer,
                             const TrainingSetOptions &options);

// Unaugmented full images resized to 224x224 (validation, test, inference).
struct EvalSet {
  std::vector<std::string> ids;
  std::vector<ClassLabel> labels;
  std::vector<cv::Mat> inputs;

  std::size_t size() const { return inputs.size(); }
  bool empty() const { return inputs.empty(); }
};

EvalSet build_eval_set(std::span<const ImageRecord> records);

} // namespace thyrofna
