#include "thyrofna/core_types.hpp"

#include "thyrofna/error.hpp"

#include <algorithm>
#include <cmath>

namespace thyrofna {

ClassLabel label_from_index(int index) {
  if (index < 0 || index >= kNumClasses) {
    fail(ErrorCode::InvalidArgument, "class index out of range: " + std::to_string(index));
  }
  return static_cast<ClassLabel>(index);
}

std::string_view label_name(ClassLabel label) {
  switch (label) {
  case ClassLabel::BENIGN: return "BENIGN";
  case ClassLabel::INDET_SUS: return "INDET_SUS";
  case ClassLabel::MALIGNANT: return "MALIGNANT";
  }
  return "?";
}

std::optional<ClassLabel> parse_label(std::string_view text) {
  for (const ClassLabel label : kAllLabels) {
    if (text == label_name(label)) {
      return label;
    }
  }
  return std::nullopt;
}

std::string_view split_name(SplitTag split) {
  switch (split) {
  case SplitTag::TRAIN: return "TRAIN";
  case SplitTag::VAL: return "VAL";
  case SplitTag::TEST: return "TEST";
  case SplitTag::EXTERNAL: return "EXTERNAL";
  case SplitTag::UNSPLIT: return "";
  }
  return "";
}

std::optional<SplitTag> parse_split(std::string_view text) {
  if (text.empty()) {
    return SplitTag::UNSPLIT;
  }
  for (const SplitTag split : {SplitTag::TRAIN, SplitTag::VAL, SplitTag::TEST, SplitTag::EXTERNAL}) {
    if (text == split_name(split)) {
      return split;
    }
  }
  return std::nullopt;
}

PredictionVector::PredictionVector(const std::array<double, kNumClasses> &probs) : probs_(probs) {
  double sum = 0.0;
  for (const double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      fail(ErrorCode::InvalidArgument, "probability outside [0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    fail(ErrorCode::InvalidArgument, "probabilities do not sum to 1");
  }
}

PredictionVector PredictionVector::from_logits(std::span<const double> logits) {
  return PredictionVector(softmax3(logits));
}

ClassLabel PredictionVector::decision() const {
  int best = 0;
  for (int i = 1; i < kNumClasses; ++i) {
    if (probs_[static_cast<std::size_t>(i)] > probs_[static_cast<std::size_t>(best)]) {
      best = i;
    }
  }
  return label_from_index(best);
}

std::array<double, kNumClasses> softmax3(std::span<const double> logits) {
  if (logits.size() != static_cast<std::size_t>(kNumClasses)) {
    fail(ErrorCode::DimensionMismatch, "softmax3 expects 3 logits");
  }
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  std::array<double, kNumClasses> out{};
  double sum = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(logits[i] - max_logit);
    sum += out[i];
  }
  for (double &p : out) {
    p /= sum;
  }
  return out;
}

void SplitSpec::validate() const {
  double sum = 0.0;
  for (const double r : ratios) {
    if (!(r > 0.0)) {
      fail(ErrorCode::InvalidArgument, "split ratios must be positive");
    }
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    fail(ErrorCode::InvalidArgument, "split ratios must sum to 1");
  }
}

} // namespace thyrofna
