#include "thyrofna/explainability.hpp"

#include "thyrofna/augmentation.hpp"
#include "thyrofna/config_reader.hpp"
#include "thyrofna/error.hpp"
#include "thyrofna/image.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>
#include <opencv2/imgproc.hpp>

namespace thyrofna {

namespace {

int colormap_code(const std::string &name) {
  if (name == "inferno") {
    return cv::COLORMAP_INFERNO;
  }
  if (name == "magma") {
    return cv::COLORMAP_MAGMA;
  }
  if (name == "viridis") {
    return cv::COLORMAP_VIRIDIS;
  }
  if (name == "jet") {
    return cv::COLORMAP_JET;
  }
  fail(ErrorCode::ConfigError, "explain.colormap: unknown colormap '" + name + "'");
}

cv::Mat to_bgr(const cv::Mat &image) {
  cv::Mat out;
  if (image.channels() == 1) {
    cv::cvtColor(image, out, cv::COLOR_GRAY2BGR);
  } else if (image.channels() == 4) {
    cv::cvtColor(image, out, cv::COLOR_BGRA2BGR);
  } else {
    out = image;
  }
  if (out.depth() != CV_8U) {
    out.convertTo(out, CV_8U);
  }
  return out;
}

} // namespace

void ExplainConfig::validate() const {
  if (alpha < 0.0 || alpha > 1.0) {
    fail(ErrorCode::ConfigError, "explain.alpha: must be in [0, 1]");
  }
  colormap_code(colormap);
}

ExplainConfig ExplainConfig::from_json(const nlohmann::json &j, const std::string &path) {
  ConfigReader r(j, path);
  ExplainConfig c;
  c.alpha = r.number("alpha", c.alpha);
  c.colormap = r.string("colormap", c.colormap);
  r.finish();
  c.validate();
  return c;
}

nlohmann::json ExplainConfig::to_json() const { return {{"alpha", alpha}, {"colormap", colormap}}; }

SaliencyMap grad_cam(const cv::Mat &view, Backbone &backbone, ClassLabel target, SaliencySource source) {
  if (!backbone.trained()) {
    fail(ErrorCode::UntrainedBackbone, backbone.name() + " has no trained weights");
  }
  if (view.empty()) {
    fail(ErrorCode::EmptyImage, "cannot explain an empty view");
  }
  const auto input = to_model_input(model_input_resize(view).image);
  backbone.forward(input, nn::ForwardContext{});
  const nn::FeatureMap activation = backbone.saliency_activation();
  nn::Vector onehot = nn::Vector::Zero(kNumClasses);
  onehot(label_index(target)) = 1.0;
  const nn::FeatureMap gradient = backbone.saliency_gradient(onehot);

  const nn::Vector channel_weights = gradient.data.rowwise().mean();
  const nn::Vector cam = (activation.data.transpose() * channel_weights).cwiseMax(0.0);

  cv::Mat small(activation.height, activation.width, CV_64FC1);
  for (int y = 0; y < activation.height; ++y) {
    for (int x = 0; x < activation.width; ++x) {
      small.at<double>(y, x) = cam(y * activation.width + x);
    }
  }
  SaliencyMap map;
  map.target_class = target;
  map.source = source;
  cv::resize(small, map.values, view.size(), 0, 0, cv::INTER_LINEAR);
  // Normalize after upsampling so the emitted map peaks at exactly 1.
  double max_value = 0.0;
  cv::minMaxLoc(map.values, nullptr, &max_value);
  if (max_value > 0.0) {
    // Element-wise division (not multiplication by the reciprocal) so the
    // peak is exactly 1.
    map.values.forEach<double>([max_value](double &v, const int *) { v = std::clamp(v / max_value, 0.0, 1.0); });
  } else {
    map.values.setTo(0.0);
  }
  return map;
}

double saliency_mass_fraction(const SaliencyMap &map, const cv::Rect &box) {
  const double total = cv::sum(map.values)[0];
  if (total <= 0.0) {
    return 0.0;
  }
  const cv::Rect clipped = box & cv::Rect(0, 0, map.values.cols, map.values.rows);
  return cv::sum(map.values(clipped))[0] / total;
}

cv::Size composite_size() {
  const int grid_w = kGridColumns * kCompositeTile + (kGridColumns - 1) * kCompositeTileGap;
  const int grid_h = kGridRows * kCompositeTile + (kGridRows - 1) * kCompositeTileGap;
  return {kCompositeFullWidth + kCompositePanelGap + grid_w, std::max(kCompositeFullHeight, grid_h)};
}

cv::Mat render_overlay(const cv::Mat &view, const SaliencyMap &map, const ExplainConfig &config) {
  const cv::Mat base = to_bgr(view);
  if (map.values.size() != base.size()) {
    fail(ErrorCode::DimensionMismatch, "saliency map and view differ in size");
  }
  cv::Mat scaled;
  map.values.convertTo(scaled, CV_8U, 255.0);
  cv::Mat heat;
  cv::applyColorMap(scaled, heat, colormap_code(config.colormap));
  cv::Mat out;
  cv::addWeighted(base, 1.0 - config.alpha, heat, config.alpha, 0.0, out);
  return out;
}

CaseExplanation explain_case(const cv::Mat &canonical, Backbone &backbone, const PredictionVector &predicted,
                             const ExplainConfig &config) {
  require_canonical(canonical, "explain_case");
  config.validate();
  const ClassLabel target = predicted.decision();
  CaseExplanation result;
  result.maps.push_back(grad_cam(canonical, backbone, target, SaliencySource::full()));
  const auto rects = grid_rects();
  for (int i = 0; i < kGridTiles; ++i) {
    result.maps.push_back(grad_cam(canonical(rects[static_cast<std::size_t>(i)]), backbone, target,
                                   SaliencySource::tile(i)));
  }

  result.composite = cv::Mat(composite_size(), CV_8UC3, cv::Scalar(255, 255, 255));
  cv::Mat full_panel;
  cv::resize(render_overlay(canonical, result.maps[0], config), full_panel,
             cv::Size(kCompositeFullWidth, kCompositeFullHeight), 0, 0, cv::INTER_AREA);
  full_panel.copyTo(result.composite(cv::Rect(0, 0, kCompositeFullWidth, kCompositeFullHeight)));
  const int grid_x = kCompositeFullWidth + kCompositePanelGap;
  for (int i = 0; i < kGridTiles; ++i) {
    const cv::Rect tile_rect = rects[static_cast<std::size_t>(i)];
    cv::Mat tile;
    cv::resize(render_overlay(canonical(tile_rect), result.maps[static_cast<std::size_t>(i + 1)], config),
               tile, cv::Size(kCompositeTile, kCompositeTile), 0, 0, cv::INTER_AREA);
    const int col = i % kGridColumns;
    const int row = i / kGridColumns;
    const cv::Rect dst(grid_x + col * (kCompositeTile + kCompositeTileGap),
                       row * (kCompositeTile + kCompositeTileGap), kCompositeTile, kCompositeTile);
    tile.copyTo(result.composite(dst));
  }
  return result;
}

} // namespace thyrofna
