#pragma once

#include "thyrofna/core_types.hpp"
#include "thyrofna/nn/tensor.hpp"

#include <array>
#include <span>

namespace thyrofna {

inline constexpr double kProbabilityFloor = 1e-12;

// w_j = total / (num_classes * count_j), from TRAIN counts only.
struct ClassWeights {
  std::array<double, kNumClasses> values = {1.0, 1.0, 1.0};

  double operator[](ClassLabel label) const {
    return values[static_cast<std::size_t>(label_index(label))];
  }
};

ClassWeights class_weights_from_counts(const std::array<long, kNumClasses> &counts);

// Requires TRAIN, labeled records with every class present (EmptyClass otherwise).
ClassWeights compute_class_weights(std::span<const ImageRecord> train_records);

// L = -(1/N) sum_i w_{y_i} log(max(p_{i,y_i}, 1e-12)).
double weighted_cross_entropy(std::span<const PredictionVector> probabilities,
                              std::span<const ClassLabel> labels, const ClassWeights &weights);

// Per-sample term w_y * -log(max(p_y, 1e-12)).
double weighted_nll(const std::array<double, kNumClasses> &probabilities, ClassLabel label,
                    const ClassWeights &weights);

// d(term)/d(logits) for softmax outputs: w_y * (p - onehot(y)) / batch_size.
nn::Vector weighted_ce_logit_gradient(const std::array<double, kNumClasses> &probabilities,
                                      ClassLabel label, const ClassWeights &weights,
                                      double batch_size);

} // namespace thyrofna
