#include "thyrofna/dataset.hpp"

#include "thyrofna/error.hpp"
#include "thyrofna/image.hpp"

namespace thyrofna {

cv::Mat load_canonical(const ImageRecord &record) {
  return canonical_resize(read_image(record.path)).image;
}

void SampleSet::add(AugmentedSample sample, cv::Mat model_input) {
  samples_.push_back(std::move(sample));
  inputs_.push_back(std::move(model_input));
}

SampleSet build_training_set(std::span<const ImageRecord> train_records, const RegionProposer &proposer,
                             const TrainingSetOptions &options) {
  SampleSet set;
  for (const auto &source : train_records) {
    ImageRecord record = source;
    const cv::Mat canonical = load_canonical(record);
    record.width = canonical.cols;
    record.height = canonical.rows;
    if (!options.augment) {
      if (record.split != SplitTag::TRAIN) {
        fail(ErrorCode::SplitViolation, "training set accepts TRAIN records only");
      }
      set.add(full_image_sample(record), model_input_resize(canonical).image);
      continue;
    }
    const auto proposals = proposer.propose(record.id, canonical);
    const auto samples = augment_record(record, proposals, options.seed);
    const RecordRasters rasters = prepare_rasters(canonical, proposals);
    for (const auto &sample : samples) {
      set.add(sample, model_input_resize(materialize(sample, rasters)).image);
    }
  }
  return set;
}

EvalSet build_eval_set(std::span<const ImageRecord> records) {
  EvalSet set;
  for (const auto &record : records) {
    if (!record.label) {
      fail(ErrorCode::UnlabeledRecord, "evaluation record '" + record.id + "' has no label");
    }
    set.ids.push_back(record.id);
    set.labels.push_back(*record.label);
    set.inputs.push_back(model_input_resize(load_canonical(record)).image);
  }
  return set;
}

} // namespace thyrofna
