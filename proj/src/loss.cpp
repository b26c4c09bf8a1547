#include "thyrofna/loss.hpp"

#include "thyrofna/error.hpp"

#include <algorithm>
#include <cmath>

namespace thyrofna {

ClassWeights class_weights_from_counts(const std::array<long, kNumClasses> &counts) {
  long total = 0;
  for (int j = 0; j < kNumClasses; ++j) {
    if (counts[static_cast<std::size_t>(j)] <= 0) {
      fail(ErrorCode::EmptyClass,
           "class " + std::string(label_name(label_from_index(j))) + " has no TRAIN samples");
    }
    total += counts[static_cast<std::size_t>(j)];
  }
  ClassWeights weights;
  for (std::size_t j = 0; j < weights.values.size(); ++j) {
    weights.values[j] = static_cast<double>(total) / (kNumClasses * static_cast<double>(counts[j]));
  }
  return weights;
}

ClassWeights compute_class_weights(std::span<const ImageRecord> train_records) {
  std::array<long, kNumClasses> counts{};
  for (const auto &record : train_records) {
    if (record.split != SplitTag::TRAIN) {
      fail(ErrorCode::SplitViolation, "class weights use TRAIN records only; got '" + record.id + "'");
    }
    if (!record.label) {
      fail(ErrorCode::UnlabeledRecord, "record '" + record.id + "' has no label");
    }
    ++counts[static_cast<std::size_t>(label_index(*record.label))];
  }
  return class_weights_from_counts(counts);
}

double weighted_nll(const std::array<double, kNumClasses> &probabilities, ClassLabel label,
                    const ClassWeights &weights) {
  const double p = probabilities[static_cast<std::size_t>(label_index(label))];
  return -weights[label] * std::log(std::max(p, kProbabilityFloor));
}

double weighted_cross_entropy(std::span<const PredictionVector> probabilities,
                              std::span<const ClassLabel> labels, const ClassWeights &weights) {
  if (probabilities.size() != labels.size()) {
    fail(ErrorCode::ShapeMismatch, "probabilities and labels differ in length");
  }
  if (probabilities.empty()) {
    fail(ErrorCode::ShapeMismatch, "empty batch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sum += weighted_nll(probabilities[i].values(), labels[i], weights);
  }
  return sum / static_cast<double>(labels.size());
}

nn::Vector weighted_ce_logit_gradient(const std::array<double, kNumClasses> &probabilities,
                                      ClassLabel label, const ClassWeights &weights,
                                      double batch_size) {
  nn::Vector grad(kNumClasses);
  const double scale = weights[label] / batch_size;
  for (int j = 0; j < kNumClasses; ++j) {
    grad(j) = scale * (probabilities[static_cast<std::size_t>(j)] - (label_index(label) == j ? 1.0 : 0.0));
  }
  return grad;
}

} // namespace thyrofna
