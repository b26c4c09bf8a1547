#pragma once

#include "thyrofna/core_types.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

namespace thyrofna {

// Rows are true labels, columns predicted labels.
struct ConfusionMatrix {
  std::array<std::array<long, kNumClasses>, kNumClasses> counts{};

  long at(ClassLabel truth, ClassLabel predicted) const {
    return counts[static_cast<std::size_t>(label_index(truth))]
                 [static_cast<std::size_t>(label_index(predicted))];
  }
  long row_sum(int truth) const;
  long column_sum(int predicted) const;
  long total() const;
  long trace() const;
};

ConfusionMatrix confusion_from_predictions(std::span<const ClassLabel> truths,
                                           std::span<const ClassLabel> predictions);

struct F1Scores {
  std::array<double, kNumClasses> per_class{};
  double macro = 0.0;
  // Classes with no true and no predicted instances; their F1 is reported as 0.
  std::array<bool, kNumClasses> degenerate{};
};

F1Scores f1_scores(const ConfusionMatrix &matrix);

// One-vs-rest ROC AUC per class from the Mann-Whitney rank statistic with
// midranks for ties. Throws SingleClassInput when a class is absent.
std::array<double, kNumClasses> ovr_auc(std::span<const ClassLabel> truths,
                                        std::span<const PredictionVector> probabilities);

// Binary AUC of `scores` for the given positive mask.
double rank_auc(std::span<const double> scores, std::span<const bool> positive);

struct EvalReport {
  long n = 0;
  ConfusionMatrix confusion;
  std::array<double, kNumClasses> per_class_f1{};
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  // Absent when some class is missing from the evaluated set.
  std::optional<std::array<double, kNumClasses>> per_class_auc;
};

EvalReport evaluate(std::span<const ClassLabel> truths, std::span<const PredictionVector> probabilities);

nlohmann::json to_json(const EvalReport &report);
void write_eval_report(const std::filesystem::path &path, const EvalReport &report);

// Projects rows onto their top two principal components (rows x 2).
Eigen::MatrixXd pca_project_2d(const Eigen::MatrixXd &points);

// CSV `id,p_benign,p_indet,p_malignant,label` (+ `pc1,pc2` when with_pca).
void export_latent(const std::filesystem::path &path, std::span<const std::string> ids,
                   std::span<const PredictionVector> probabilities,
                   std::span<const std::optional<ClassLabel>> truths, bool with_pca = false);

} // namespace thyrofna
