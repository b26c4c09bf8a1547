#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace thyrofna {

inline constexpr int kNumClasses = 3;

enum class ClassLabel : std::uint8_t { BENIGN = 0, INDET_SUS = 1, MALIGNANT = 2 };

inline constexpr std::array<ClassLabel, kNumClasses> kAllLabels = {
    ClassLabel::BENIGN, ClassLabel::INDET_SUS, ClassLabel::MALIGNANT};

constexpr int label_index(ClassLabel label) { return static_cast<int>(label); }
ClassLabel label_from_index(int index);
std::string_view label_name(ClassLabel label);
std::optional<ClassLabel> parse_label(std::string_view text);

enum class SplitTag : std::uint8_t { TRAIN, VAL, TEST, EXTERNAL, UNSPLIT };

std::string_view split_name(SplitTag split);
std::optional<SplitTag> parse_split(std::string_view text);

struct ImageRecord {
  std::string id;
  std::filesystem::path path;
  std::optional<ClassLabel> label;
  SplitTag split = SplitTag::UNSPLIT;
  int width = 0;
  int height = 0;
};

// Three-class probability output. Construction validates normalization.
class PredictionVector {
public:
  static constexpr double kSumTolerance = 1e-6;

  PredictionVector() : probs_{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0} {}
  explicit PredictionVector(const std::array<double, kNumClasses> &probs);

  static PredictionVector from_logits(std::span<const double> logits);

  double p_benign() const { return probs_[0]; }
  double p_indet() const { return probs_[1]; }
  double p_malignant() const { return probs_[2]; }
  double operator[](int i) const { return probs_[static_cast<std::size_t>(i)]; }
  const std::array<double, kNumClasses> &values() const { return probs_; }

  // Argmax with ties resolved towards the lowest ordinal.
  ClassLabel decision() const;

private:
  std::array<double, kNumClasses> probs_;
};

// Numerically stable softmax; shared by every prediction path so that
// equivalent logits give bit-identical probabilities.
std::array<double, kNumClasses> softmax3(std::span<const double> logits);

struct SplitSpec {
  std::uint64_t seed = 42;
  std::array<double, 3> ratios = {0.70, 0.15, 0.15};

  void validate() const;
};

} // namespace thyrofna
