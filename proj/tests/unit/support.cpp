#include "unit/support.hpp"

#include "thyrofna/augmentation.hpp"
#include "thyrofna/image.hpp"
#include "thyrofna/rng.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <opencv2/imgproc.hpp>

namespace testsupport {

using namespace thyrofna;

std::filesystem::path fresh_dir(const std::string &name) {
  const auto dir = std::filesystem::current_path() / "tmp" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

cv::Mat random_image(int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  cv::Mat m(height, width, CV_8UC3);
  for (int y = 0; y < height; ++y) {
    auto *row = m.ptr<uchar>(y);
    for (int x = 0; x < width * 3; ++x) {
      row[x] = static_cast<uchar>(rng.uniform_index(256));
    }
  }
  return m;
}

cv::Mat random_canonical(std::uint64_t seed) { return random_image(kCanonicalWidth, kCanonicalHeight, seed); }

std::vector<Component> bfs_components(const cv::Mat &mask) {
  cv::Mat visited = cv::Mat::zeros(mask.size(), CV_8U);
  std::vector<Component> out;
  for (int y = 0; y < mask.rows; ++y) {
    for (int x = 0; x < mask.cols; ++x) {
      if (mask.at<uchar>(y, x) == 0 || visited.at<uchar>(y, x) != 0) {
        continue;
      }
      int x0 = x, x1 = x, y0 = y, y1 = y, area = 0;
      std::deque<cv::Point> queue{{x, y}};
      visited.at<uchar>(y, x) = 1;
      while (!queue.empty()) {
        const cv::Point p = queue.front();
        queue.pop_front();
        ++area;
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const cv::Point q(p.x + dx, p.y + dy);
            if (q.x < 0 || q.y < 0 || q.x >= mask.cols || q.y >= mask.rows) {
              continue;
            }
            if (mask.at<uchar>(q) != 0 && visited.at<uchar>(q) == 0) {
              visited.at<uchar>(q) = 1;
              queue.push_back(q);
            }
          }
        }
      }
      out.push_back({cv::Rect(x0, y0, x1 - x0 + 1, y1 - y0 + 1), area});
    }
  }
  return out;
}

GradCheck check_gradients(const std::function<double()> &loss, const std::vector<nn::Parameter *> &params,
                          int per_parameter, std::uint64_t seed, double step, double floor) {
  GradCheck result;
  Rng rng(seed);
  for (auto *p : params) {
    const Eigen::Index n = p->value.size();
    const int count = static_cast<int>(std::min<Eigen::Index>(n, per_parameter));
    std::vector<Eigen::Index> picks(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      picks[static_cast<std::size_t>(i)] = i;
    }
    rng.shuffle(std::span<Eigen::Index>(picks));
    for (int k = 0; k < count; ++k) {
      const Eigen::Index i = picks[static_cast<std::size_t>(k)];
      double &w = p->value.data()[i];
      const double saved = w;
      w = saved + step;
      const double up = loss();
      w = saved - step;
      const double down = loss();
      w = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = p->grad.data()[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
      result.max_relative_error = std::max(result.max_relative_error, std::abs(analytic - numeric) / denom);
      ++result.checked;
    }
  }
  return result;
}

std::unique_ptr<Backbone> tiny_backbone(std::uint64_t seed, std::vector<int> channels, int kernel) {
  return make_backbone("reference_cnn", {{"channels", channels}, {"kernel", kernel}}, seed);
}

cv::Mat toy_input(ClassLabel label, std::uint64_t seed) {
  Rng rng(seed);
  cv::Mat m(kModelInputSize, kModelInputSize, CV_8UC3, cv::Scalar(225, 215, 230));
  const int blobs = 1 + 4 * label_index(label);
  for (int i = 0; i < blobs; ++i) {
    const cv::Point c(rng.uniform_int(20, 203), rng.uniform_int(20, 203));
    cv::circle(m, c, 14, cv::Scalar(90, 40, 90), cv::FILLED);
  }
  return m;
}

SampleSet toy_sample_set(int per_class, std::uint64_t seed, bool all_sets) {
  SampleSet set;
  for (const ClassLabel label : kAllLabels) {
    for (int i = 0; i < per_class; ++i) {
      const std::string id = std::string(label_name(label)) + "_" + std::to_string(i);
      const auto image_seed = derive_seed(seed, id);
      AugmentedSample a;
      a.source_id = id;
      a.label = label;
      a.crop = cv::Rect(0, 0, kCanonicalWidth, kCanonicalHeight);
      if (!all_sets) {
        set.add(a, toy_input(label, image_seed));
        continue;
      }
      // 34 samples per record with the real set multiset; pixels stay toy.
      const SetTag tags[] = {SetTag::A, SetTag::B, SetTag::C, SetTag::D, SetTag::E};
      const int sizes[] = {1, 1, kSetCCrops, kGridTiles, kGridTiles};
      for (int t = 0; t < 5; ++t) {
        for (int k = 0; k < sizes[t]; ++k) {
          AugmentedSample s = a;
          s.set_tag = tags[t];
          s.index = k;
          s.origin = t < 2 ? CropOrigin::FULL : (t == 2 ? CropOrigin::PROPOSAL : CropOrigin::GRID);
          set.add(s, toy_input(label, derive_seed(image_seed, static_cast<std::uint64_t>(t), k)));
        }
      }
    }
  }
  return set;
}

EvalSet toy_eval_set(int per_class, std::uint64_t seed) {
  EvalSet set;
  for (const ClassLabel label : kAllLabels) {
    for (int i = 0; i < per_class; ++i) {
      const std::string id = "eval_" + std::string(label_name(label)) + "_" + std::to_string(i);
      set.ids.push_back(id);
      set.labels.push_back(label);
      set.inputs.push_back(toy_input(label, derive_seed(seed, id)));
    }
  }
  return set;
}

} // namespace testsupport
