#pragma once

#include "thyrofna/backbone.hpp"
#include "thyrofna/core_types.hpp"

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>
#include <opencv2/core.hpp>

namespace thyrofna {

struct SaliencySource {
  enum class Kind { FULL, REGION };
  Kind kind = Kind::FULL;
  int region = -1; // 0..11 for REGION

  static SaliencySource full() { return {}; }
  static SaliencySource tile(int index) { return {Kind::REGION, index}; }
  bool operator==(const SaliencySource &) const = default;
};

struct SaliencyMap {
  cv::Mat values; // CV_64FC1, same size as the explained view, values in [0,1]
  ClassLabel target_class = ClassLabel::BENIGN;
  SaliencySource source;
};

struct ExplainConfig {
  double alpha = 0.4;               // heat-map opacity in overlays
  std::string colormap = "inferno"; // inferno, magma, viridis, jet

  void validate() const;
  static ExplainConfig from_json(const nlohmann::json &j, const std::string &path = "explain");
  nlohmann::json to_json() const;
};

// Gradient-weighted class activation map at the backbone's saliency layer,
// rectified, max-normalized, and bilinearly upsampled to the view's size.
SaliencyMap grad_cam(const cv::Mat &view, Backbone &backbone, ClassLabel target,
                     SaliencySource source = SaliencySource::full());

// Share of the map's total mass inside `box` (0 when the map is all zero).
double saliency_mass_fraction(const SaliencyMap &map, const cv::Rect &box);

// Composite layout: full image panel on the left, 3x4 tile grid on the right.
inline constexpr int kCompositeFullWidth = 512;
inline constexpr int kCompositeFullHeight = 384;
inline constexpr int kCompositeTile = 128;
inline constexpr int kCompositeTileGap = 4;
inline constexpr int kCompositePanelGap = 8;
cv::Size composite_size();

struct CaseExplanation {
  std::vector<SaliencyMap> maps; // FULL first, then REGION 0..11
  cv::Mat composite;             // BGR, composite_size()
};

// Heat-map overlay of one map on its view.
cv::Mat render_overlay(const cv::Mat &view, const SaliencyMap &map, const ExplainConfig &config = {});

// One FULL and 12 REGION maps, all targeting the predicted decision class.
CaseExplanation explain_case(const cv::Mat &canonical, Backbone &backbone, const PredictionVector &predicted,
                             const ExplainConfig &config = {});

} // namespace thyrofna
