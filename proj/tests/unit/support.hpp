#pragma once

#include "thyrofna/backbone.hpp"
#include "thyrofna/core_types.hpp"
#include "thyrofna/dataset.hpp"
#include "thyrofna/nn/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

namespace testsupport {

// Fresh, empty directory under ./tmp (the test working directory).
std::filesystem::path fresh_dir(const std::string &name);

// Uniform random 8-bit BGR raster.
cv::Mat random_image(int width, int height, std::uint64_t seed);
cv::Mat random_canonical(std::uint64_t seed);

// Independent oracle: 8-connected components of `mask` (non-zero = foreground)
// by breadth-first search; returns bounding boxes and pixel areas.
struct Component {
  cv::Rect box;
  int area = 0;
};
std::vector<Component> bfs_components(const cv::Mat &mask);

// Largest |a - n| / max(|a|, |n|, floor) over the checked entries, where `a`
// is the analytic gradient and `n` the central difference of `loss`.
struct GradCheck {
  double max_relative_error = 0.0;
  int checked = 0;
};
GradCheck check_gradients(const std::function<double()> &loss, const std::vector<thyrofna::nn::Parameter *> &params,
                          int per_parameter, std::uint64_t seed, double step = 1e-5, double floor = 1e-7);

// Tiny backbone for fast tests (3 conv stages at reduced width).
std::unique_ptr<thyrofna::Backbone> tiny_backbone(std::uint64_t seed, std::vector<int> channels = {4, 6, 8},
                                                  int kernel = 3);

// Class-coloured 224x224 inputs: a simple separable in-memory dataset.
cv::Mat toy_input(thyrofna::ClassLabel label, std::uint64_t seed);
thyrofna::SampleSet toy_sample_set(int per_class, std::uint64_t seed, bool all_sets = false);
thyrofna::EvalSet toy_eval_set(int per_class, std::uint64_t seed);

} // namespace testsupport
