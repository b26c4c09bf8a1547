#include "thyrofna/evaluation.hpp"

#include "thyrofna/error.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

namespace thyrofna {

long ConfusionMatrix::row_sum(int truth) const {
  const auto &row = counts[static_cast<std::size_t>(truth)];
  return std::accumulate(row.begin(), row.end(), 0L);
}

long ConfusionMatrix::column_sum(int predicted) const {
  long sum = 0;
  for (const auto &row : counts) {
    sum += row[static_cast<std::size_t>(predicted)];
  }
  return sum;
}

long ConfusionMatrix::total() const {
  long sum = 0;
  for (int t = 0; t < kNumClasses; ++t) {
    sum += row_sum(t);
  }
  return sum;
}

long ConfusionMatrix::trace() const {
  long sum = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    sum += counts[i][i];
  }
  return sum;
}

ConfusionMatrix confusion_from_predictions(std::span<const ClassLabel> truths,
                                           std::span<const ClassLabel> predictions) {
  if (truths.size() != predictions.size()) {
    fail(ErrorCode::LengthMismatch, "truths and predictions differ in length");
  }
  if (truths.empty()) {
    fail(ErrorCode::EmptyInput, "no predictions to tabulate");
  }
  ConfusionMatrix matrix;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    ++matrix.counts[static_cast<std::size_t>(label_index(truths[i]))]
                   [static_cast<std::size_t>(label_index(predictions[i]))];
  }
  return matrix;
}

F1Scores f1_scores(const ConfusionMatrix &matrix) {
  F1Scores scores;
  for (int j = 0; j < kNumClasses; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    const long tp = matrix.counts[idx][idx];
    const long fp = matrix.column_sum(j) - tp;
    const long fn = matrix.row_sum(j) - tp;
    const long denominator = 2 * tp + fp + fn;
    if (denominator == 0) {
      scores.degenerate[idx] = true;
      scores.per_class[idx] = 0.0;
      std::clog << "warning: class " << label_name(label_from_index(j))
                << " has no true or predicted instances; F1 set to 0\n";
      continue;
    }
    scores.per_class[idx] = 2.0 * static_cast<double>(tp) / static_cast<double>(denominator);
  }
  scores.macro = (scores.per_class[0] + scores.per_class[1] + scores.per_class[2]) / kNumClasses;
  return scores;
}

double rank_auc(std::span<const double> scores, std::span<const bool> positive) {
  if (scores.size() != positive.size()) {
    fail(ErrorCode::LengthMismatch, "scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      ++j;
    }
    const double midrank = 0.5 * static_cast<double>(i + 1 + j); // ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (positive[order[k]]) {
        positive_rank_sum += midrank;
      }
    }
    i = j;
  }
  for (const bool p : positive) {
    n_pos += p ? 1 : 0;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    fail(ErrorCode::SingleClassInput, "AUC needs both positive and negative samples");
  }
  const double np = static_cast<double>(n_pos);
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

std::array<double, kNumClasses> ovr_auc(std::span<const ClassLabel> truths,
                                        std::span<const PredictionVector> probabilities) {
  if (truths.size() != probabilities.size()) {
    fail(ErrorCode::LengthMismatch, "truths and probabilities differ in length");
  }
  std::array<double, kNumClasses> auc{};
  std::vector<double> scores(truths.size());
  std::unique_ptr<bool[]> positive(new bool[truths.size()]);
  for (int j = 0; j < kNumClasses; ++j) {
    for (std::size_t i = 0; i < truths.size(); ++i) {
      scores[i] = probabilities[i][j];
      positive[i] = label_index(truths[i]) == j;
    }
    auc[static_cast<std::size_t>(j)] =
        rank_auc(scores, std::span<const bool>(positive.get(), truths.size()));
  }
  return auc;
}

EvalReport evaluate(std::span<const ClassLabel> truths, std::span<const PredictionVector> probabilities) {
  if (truths.size() != probabilities.size()) {
    fail(ErrorCode::LengthMismatch, "truths and probabilities differ in length");
  }
  std::vector<ClassLabel> decisions;
  decisions.reserve(probabilities.size());
  for (const auto &p : probabilities) {
    decisions.push_back(p.decision());
  }
  EvalReport report;
  report.n = static_cast<long>(truths.size());
  report.confusion = confusion_from_predictions(truths, decisions);
  const auto f1 = f1_scores(report.confusion);
  report.per_class_f1 = f1.per_class;
  report.macro_f1 = f1.macro;
  report.accuracy = static_cast<double>(report.confusion.trace()) / static_cast<double>(report.n);
  try {
    report.per_class_auc = ovr_auc(truths, probabilities);
  } catch (const Error &e) {
    if (e.code() != ErrorCode::SingleClassInput) {
      throw;
    }
  }
  return report;
}

nlohmann::json to_json(const EvalReport &report) {
  nlohmann::json confusion = nlohmann::json::array();
  for (const auto &row : report.confusion.counts) {
    confusion.push_back(row);
  }
  nlohmann::json f1;
  nlohmann::json auc = nullptr;
  for (int j = 0; j < kNumClasses; ++j) {
    const std::string name(label_name(label_from_index(j)));
    f1[name] = report.per_class_f1[static_cast<std::size_t>(j)];
    if (report.per_class_auc) {
      auc[name] = (*report.per_class_auc)[static_cast<std::size_t>(j)];
    }
  }
  return {{"n", report.n},         {"confusion", confusion},        {"per_class_f1", f1},
          {"macro_f1", report.macro_f1}, {"per_class_auc", auc}, {"accuracy", report.accuracy}};
}

void write_eval_report(const std::filesystem::path &path, const EvalReport &report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(ErrorCode::IoFailure, "cannot write " + path.string());
  }
  out << to_json(report).dump(2) << '\n';
}

Eigen::MatrixXd pca_project_2d(const Eigen::MatrixXd &points) {
  if (points.rows() == 0) {
    fail(ErrorCode::EmptyInput, "no points to project");
  }
  const Eigen::RowVectorXd mean = points.colwise().mean();
  const Eigen::MatrixXd centered = points.rowwise() - mean;
  const Eigen::MatrixXd covariance = centered.transpose() * centered;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  // Eigenvalues ascend; take the last two columns, largest first.
  Eigen::MatrixXd basis(points.cols(), 2);
  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXd axis = solver.eigenvectors().col(points.cols() - 1 - k);
    Eigen::Index pivot = 0;
    axis.cwiseAbs().maxCoeff(&pivot);
    if (axis(pivot) < 0.0) {
      axis = -axis; // fixed sign convention for reproducible output
    }
    basis.col(k) = axis;
  }
  return centered * basis;
}

void export_latent(const std::filesystem::path &path, std::span<const std::string> ids,
                   std::span<const PredictionVector> probabilities,
                   std::span<const std::optional<ClassLabel>> truths, bool with_pca) {
  if (probabilities.empty()) {
    fail(ErrorCode::EmptyInput, "nothing to export");
  }
  if (ids.size() != probabilities.size() || truths.size() != probabilities.size()) {
    fail(ErrorCode::LengthMismatch, "ids, probabilities and labels differ in length");
  }
  Eigen::MatrixXd projected;
  if (with_pca) {
    Eigen::MatrixXd points(static_cast<Eigen::Index>(probabilities.size()), kNumClasses);
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
      for (int j = 0; j < kNumClasses; ++j) {
        points(static_cast<Eigen::Index>(i), j) = probabilities[i][j];
      }
    }
    projected = pca_project_2d(points);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(ErrorCode::IoFailure, "cannot write " + path.string());
  }
  out << "id,p_benign,p_indet,p_malignant,label" << (with_pca ? ",pc1,pc2" : "") << '\n';
  out << std::fixed << std::setprecision(8);
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const auto &p = probabilities[i];
    out << ids[i] << ',' << p.p_benign() << ',' << p.p_indet() << ',' << p.p_malignant() << ','
        << (truths[i] ? label_name(*truths[i]) : "");
    if (with_pca) {
      out << ',' << projected(static_cast<Eigen::Index>(i), 0) << ','
          << projected(static_cast<Eigen::Index>(i), 1);
    }
    out << '\n';
  }
  if (!out) {
    fail(ErrorCode::IoFailure, "failed writing " + path.string());
  }
}

} // namespace thyrofna
